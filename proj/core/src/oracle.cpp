#include "pumpfit/oracle.hpp"

#include <array>
#include <cmath>

#include "pumpfit/error.hpp"
#include "pumpfit/rng.hpp"

namespace pumpfit {
namespace {

// Variable slots in design-space order.
enum Slot : std::size_t { Z, Beta1, Beta2, D2, B2, Ds, Dh, Phi, Theta, D3, Y, kSlots };

// Quadratic core over the key variables (a = u_D2, b = u_b2, c = u_beta2):
//   k0 + k1 a + k2 b + k3 c + k4 a² + k5 b² + k6 c² + k7 ab + k8 ac + k9 bc
using Core = std::array<double, 10>;
// Linear weights of the remaining variables, indexed by Slot (key slots unused).
using Secondary = std::array<double, kSlots>;

constexpr Core kHeadCore{1.0, 0.050, 0.020, 0.030, -0.010, -0.006, -0.012, 0.008, -0.005, 0.004};
constexpr Secondary kHeadSecondary{0.0040, 0.0025, 0, 0, 0, 0.0006, -0.0005, 0.0012, -0.0010, 0.0001, 0.0018};

constexpr Core kPowerCore{1.0, 0.055, 0.045, 0.020, -0.008, -0.010, -0.006, 0.006, 0.004, -0.003};
constexpr Secondary kPowerSecondary{0.0030, 0.0020, 0, 0, 0, 0.0005, -0.0004, 0.0008, -0.0006, 0.0001, 0.0012};

// Efficiency in percentage points around kEfficiency0.
constexpr Core kEffCore{0.0, 0.60, 1.40, -0.90, -0.80, -1.10, -0.70, 0.30, -0.20, 0.25};
constexpr Secondary kEffSecondary{0.20, 0.15, 0, 0, 0, 0.03, -0.02, 0.05, -0.04, 0.004, -0.10};

double core(const Core& k, double a, double b, double c) {
  return k[0] + k[1] * a + k[2] * b + k[3] * c + k[4] * a * a + k[5] * b * b + k[6] * c * c +
         k[7] * a * b + k[8] * a * c + k[9] * b * c;
}

double secondary(const Secondary& w, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t k = 0; k < kSlots; ++k) s += w[k] * u[k];
  return s;
}

}  // namespace

SyntheticPumpOracle::SyntheticPumpOracle(OracleOptions options)
    : options_(options), space_(design_bounds(DutyPoint::reference())) {
  if (!(options_.noise_sigma >= 0.0) || !std::isfinite(options_.noise_sigma)) {
    throw ConfigError("oracle noise_sigma must be a nonnegative number");
  }
  if (!std::isfinite(options_.nonquadratic_scale)) throw ConfigError("oracle nonquadratic_scale must be finite");
}

OracleResponse SyntheticPumpOracle::exact(std::span<const double> x) const {
  if (x.size() != kSlots) throw DataError("oracle expects a full design point of 11 variables");
  std::array<double, kSlots> u{};
  OracleResponse r;
  for (std::size_t k = 0; k < kSlots; ++k) {
    if (!std::isfinite(x[k])) throw DataError("oracle input is not finite");
    const auto& v = space_.variables()[k];
    u[k] = (x[k] - v.mid()) / (0.5 * (v.upper - v.lower));
    r.extrapolated = r.extrapolated || x[k] < v.lower || x[k] > v.upper;
  }
  const double a = u[D2], b = u[B2], c = u[Beta2];
  const double s = options_.nonquadratic_scale;

  r.head_m = kHead0 * (core(kHeadCore, a, b, c) + secondary(kHeadSecondary, u) +
                       s * 0.012 * std::sin(2.2 * a + 1.7 * b * c));
  r.power_kw = kPower0 * (core(kPowerCore, a, b, c) + secondary(kPowerSecondary, u) +
                          s * 0.015 * std::tanh(1.8 * a * b + 0.9 * c));
  r.efficiency_pct = kEfficiency0 + core(kEffCore, a, b, c) + secondary(kEffSecondary, u) +
                     s * 0.8 * std::cos(1.9 * b + 1.3 * a * c);
  return r;
}

OracleResponse SyntheticPumpOracle::evaluate(std::span<const double> x, std::uint64_t call_index) const {
  auto r = exact(x);
  if (options_.noise_sigma > 0.0) {
    Rng rng(derive_seed(derive_seed(options_.seed, "oracle-noise"), call_index));
    std::normal_distribution<double> z(0.0, 1.0);
    r.head_m *= 1.0 + options_.noise_sigma * z(rng);
    r.power_kw *= 1.0 + options_.noise_sigma * z(rng);
    r.efficiency_pct *= 1.0 + options_.noise_sigma * z(rng);
  }
  return r;
}

Dataset SyntheticPumpOracle::evaluate(const Dataset& inputs, bool with_efficiency) const {
  const auto in_idx = inputs.indices(Role::input);
  std::vector<std::size_t> slot;
  for (std::size_t k : in_idx) slot.push_back(space_.index_of(inputs.attributes()[k].name));

  std::vector<AttributeSpec> attrs;
  for (std::size_t k : in_idx) attrs.push_back(inputs.attributes()[k]);
  attrs.push_back({"head", Role::output, "m"});
  attrs.push_back({"power", Role::output, "kW"});
  if (with_efficiency) attrs.push_back({"efficiency", Role::output, "%"});

  const auto defaults = space_.midpoint();
  std::vector<double> values;
  values.reserve(inputs.n_rows() * attrs.size());
  for (std::size_t i = 0; i < inputs.n_rows(); ++i) {
    auto x = defaults;
    for (std::size_t j = 0; j < in_idx.size(); ++j) {
      x[slot[j]] = inputs.at(i, in_idx[j]);
      values.push_back(x[slot[j]]);
    }
    const auto r = evaluate(x, i);
    values.push_back(r.head_m);
    values.push_back(r.power_kw);
    if (with_efficiency) values.push_back(r.efficiency_pct);
  }
  return Dataset(std::move(attrs), std::move(values));
}

ResponseOracle SyntheticPumpOracle::response_oracle() const {
  return {{"efficiency", "head", "power"}, [self = *this](std::span<const double> x) {
            const auto r = self.exact(x);
            return std::vector<double>{r.efficiency_pct, r.head_m, r.power_kw};
          }};
}

}  // namespace pumpfit
