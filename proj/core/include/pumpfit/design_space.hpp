#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pumpfit/dataset.hpp"

namespace pumpfit {

/// Pump duty point. Flow is held in m³/s; use `from_m3h` for catalogue units.
struct DutyPoint {
  double flow_m3s = 0.0;
  double head_m = 0.0;
  double speed_rpm = 0.0;
  double power_kw = 0.0;  // informational

  void validate() const;
  /// The 10-stage pump studied here: 100 m³/h, 80 m/stage, 2950 r/min, 355 kW.
  static DutyPoint reference();
};

double m3h_to_m3s(double flow_m3h);

/// n_s = 3.65·n·√Q / H^(3/4), Q in m³/s, n in r/min, H in m.
double specific_speed(const DutyPoint& d);

struct DesignVariable {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  std::string unit;

  double mid() const { return 0.5 * (lower + upper); }
  bool operator==(const DesignVariable&) const = default;
};

class DesignSpace {
 public:
  DesignSpace() = default;
  explicit DesignSpace(std::vector<DesignVariable> vars);

  const std::vector<DesignVariable>& variables() const { return vars_; }
  std::size_t size() const { return vars_.size(); }
  const DesignVariable& at(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;
  std::vector<double> midpoint() const;

  bool operator==(const DesignSpace&) const = default;

 private:
  std::vector<DesignVariable> vars_;
};

void to_json(nlohmann::json& j, const DesignSpace& s);
void from_json(const nlohmann::json& j, DesignSpace& s);

/// Canonical variable names, in design-space order.
inline constexpr std::string_view kZ = "Z", kBeta1 = "beta1", kBeta2 = "beta2", kD2 = "D2",
                                  kB2 = "b2", kDs = "Ds", kDh = "Dh", kPhi = "phi",
                                  kTheta = "theta", kD3 = "D3", kY = "Y";

/// Design-variable ranges for a duty point. D3 bounds are relative to the D2
/// midpoint unless `d2` is given.
DesignSpace design_bounds(const DutyPoint& d, std::optional<double> d2 = std::nullopt);

/// [lower, upper] of D3 for a concrete outlet diameter.
std::pair<double, double> d3_bounds(double d2);

/// Latin Hypercube sample of `count` points over the named subset.
///
/// Each variable's range is cut into `count` equal bins holding exactly one
/// sample at a uniform position; bins are paired across dimensions by
/// independent seeded permutations.
Dataset lhs_sample(const DesignSpace& space, std::span<const std::string> subset,
                   std::size_t count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// One-at-a-time sensitivity screen

/// Response functions for sensitivity probing: full design point (in
/// `DesignSpace` order) to named responses.
struct ResponseOracle {
  std::vector<std::string> response_names;
  std::function<std::vector<double>(std::span<const double>)> evaluate;
};

enum class SensitivityAggregate { max_abs, sum_abs };

struct SensitivityOptions {
  double perturbation = 0.02;
  SensitivityAggregate aggregate = SensitivityAggregate::max_abs;
  /// Responses entering the ranking; empty means all.
  std::vector<std::string> ranked_responses;
};

struct SensitivityEntry {
  std::string variable;
  double base_value = 0.0;
  double perturbed_value = 0.0;
  bool clamped = false;
  std::vector<double> epsilon;  // one per response
  double score = 0.0;           // aggregate used for ranking
};

struct SensitivityResult {
  std::vector<std::string> response_names;
  std::vector<double> base_response;
  std::vector<SensitivityEntry> entries;  // design-space order
  std::vector<std::string> ranking;       // by score, descending
};

/// ε = ((f₁ − f₀)/f₀)/δ with f₁ evaluated after raising one variable by the
/// relative step δ; f₀ is evaluated once at `defaults`. Probe points leaving
/// the box are clamped to the upper bound and flagged.
SensitivityResult sensitivity(const ResponseOracle& oracle, const DesignSpace& space,
                              std::span<const double> defaults,
                              const SensitivityOptions& options = {});

void to_json(nlohmann::json& j, const SensitivityResult& r);

}  // namespace pumpfit
