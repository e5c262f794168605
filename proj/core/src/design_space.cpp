#include "pumpfit/design_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "pumpfit/error.hpp"
#include "pumpfit/rng.hpp"

namespace pumpfit {

void DutyPoint::validate() const {
  if (!(flow_m3s > 0.0) || !(head_m > 0.0) || !(speed_rpm > 0.0)) {
    throw DataError("duty point needs Q > 0, H > 0 and n > 0");
  }
}

DutyPoint DutyPoint::reference() { return {m3h_to_m3s(100.0), 80.0, 2950.0, 355.0}; }

double m3h_to_m3s(double flow_m3h) { return flow_m3h / 3600.0; }

double specific_speed(const DutyPoint& d) {
  d.validate();
  return 3.65 * d.speed_rpm * std::sqrt(d.flow_m3s) / std::pow(d.head_m, 0.75);
}

// ---------------------------------------------------------------------------

DesignSpace::DesignSpace(std::vector<DesignVariable> vars) : vars_(std::move(vars)) {
  std::set<std::string_view> seen;
  for (const auto& v : vars_) {
    if (!seen.insert(v.name).second) throw DataError("duplicate design variable '" + v.name + "'");
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper) || !(v.lower < v.upper)) {
      throw DataError("design variable '" + v.name + "' needs finite bounds with lower < upper");
    }
  }
}

std::size_t DesignSpace::index_of(std::string_view name) const {
  for (std::size_t k = 0; k < vars_.size(); ++k) {
    if (vars_[k].name == name) return k;
  }
  throw DataError("unknown design variable '" + std::string(name) + "'");
}

const DesignVariable& DesignSpace::at(std::string_view name) const { return vars_[index_of(name)]; }

bool DesignSpace::contains(std::string_view name) const {
  return std::any_of(vars_.begin(), vars_.end(), [&](auto& v) { return v.name == name; });
}

std::vector<std::string> DesignSpace::names() const {
  std::vector<std::string> out;
  for (const auto& v : vars_) out.push_back(v.name);
  return out;
}

std::vector<double> DesignSpace::midpoint() const {
  std::vector<double> out;
  for (const auto& v : vars_) out.push_back(v.mid());
  return out;
}

void to_json(nlohmann::json& j, const DesignSpace& s) {
  j = nlohmann::json::array();
  for (const auto& v : s.variables()) {
    j.push_back({{"name", v.name}, {"lo", v.lower}, {"hi", v.upper}, {"unit", v.unit}});
  }
}

void from_json(const nlohmann::json& j, DesignSpace& s) {
  std::vector<DesignVariable> vars;
  for (const auto& e : j) {
    vars.push_back({e.at("name").get<std::string>(), e.at("lo").get<double>(),
                    e.at("hi").get<double>(), e.value("unit", std::string{})});
  }
  s = DesignSpace(std::move(vars));
}

std::pair<double, double> d3_bounds(double d2) { return {1.03 * d2, 1.06 * d2}; }

DesignSpace design_bounds(const DutyPoint& d, std::optional<double> d2) {
  const double ns = specific_speed(d);
  const double k = std::cbrt(d.flow_m3s / d.speed_rpm);
  const double r = ns / 100.0;

  const double d2_lo = 10.4 * std::pow(r, -0.5) * k;
  const double d2_hi = 11.1 * std::pow(r, -0.5) * k;
  const auto [d3_lo, d3_hi] = d3_bounds(d2.value_or(0.5 * (d2_lo + d2_hi)));

  return DesignSpace({
      {std::string(kZ), 3.0, 7.0, "-"},
      {std::string(kBeta1), 10.0, 35.0, "deg"},
      {std::string(kBeta2), 14.0, 24.0, "deg"},
      {std::string(kD2), d2_lo, d2_hi, "m"},
      {std::string(kB2), 0.85 * std::pow(r, 5.0 / 6.0) * k, 1.2 * std::pow(r, 5.0 / 6.0) * k, "m"},
      {std::string(kDs), 12.0 * k, 15.0 * k, "m"},
      {std::string(kDh), 8.5 * k, 11.7 * k, "m"},
      {std::string(kPhi), 140.0, 180.0, "deg"},
      {std::string(kTheta), 18.0, 28.0, "deg"},
      {std::string(kD3), d3_lo, d3_hi, "m"},
      {std::string(kY), 0.8, 2.0, "-"},
  });
}

// ---------------------------------------------------------------------------

Dataset lhs_sample(const DesignSpace& space, std::span<const std::string> subset,
                   std::size_t count, std::uint64_t seed) {
  if (subset.empty()) throw DataError("lhs_sample needs at least one variable");
  if (count == 0) throw DataError("lhs_sample needs count >= 1");

  std::vector<AttributeSpec> attrs;
  std::vector<const DesignVariable*> vars;
  for (const auto& name : subset) {
    vars.push_back(&space.at(name));
    attrs.push_back({name, Role::input, vars.back()->unit});
  }

  Rng rng(derive_seed(seed, "lhs"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t dims = vars.size();
  std::vector<double> values(count * dims);
  std::vector<std::size_t> perm(count);
  for (std::size_t j = 0; j < dims; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const double lo = vars[j]->lower, width = vars[j]->upper - vars[j]->lower;
    for (std::size_t i = 0; i < count; ++i) {
      const double t = (static_cast<double>(perm[i]) + unit(rng)) / static_cast<double>(count);
      values[i * dims + j] = std::min(lo + t * width, vars[j]->upper);
    }
  }
  return Dataset(std::move(attrs), std::move(values));
}

// ---------------------------------------------------------------------------

SensitivityResult sensitivity(const ResponseOracle& oracle, const DesignSpace& space,
                              std::span<const double> defaults, const SensitivityOptions& options) {
  if (defaults.size() != space.size()) throw DataError("default point does not match the design space");
  if (!(options.perturbation > 0.0)) throw DataError("perturbation ratio must be positive");
  for (std::size_t k = 0; k < space.size(); ++k) {
    const auto& v = space.variables()[k];
    if (!(defaults[k] >= v.lower && defaults[k] <= v.upper)) {
      throw DataError("default value of '" + v.name + "' is outside its bounds");
    }
  }

  auto probe = [&](std::span<const double> x) {
    std::vector<double> f;
    try {
      f = oracle.evaluate(x);
    } catch (const std::exception& e) {
      throw NumericalError(std::string("oracle failed at a probe point: ") + e.what());
    }
    if (f.size() != oracle.response_names.size()) throw NumericalError("oracle returned wrong arity");
    for (double v : f) {
      if (!std::isfinite(v)) throw NumericalError("oracle returned a non-finite response");
    }
    return f;
  };

  SensitivityResult out;
  out.response_names = oracle.response_names;
  out.base_response = probe(defaults);
  for (std::size_t r = 0; r < out.base_response.size(); ++r) {
    if (out.base_response[r] == 0.0) {
      throw NumericalError("base response '" + out.response_names[r] + "' is zero");
    }
  }

  std::vector<std::size_t> ranked;
  if (options.ranked_responses.empty()) {
    ranked.resize(out.response_names.size());
    std::iota(ranked.begin(), ranked.end(), std::size_t{0});
  } else {
    for (const auto& name : options.ranked_responses) {
      auto it = std::find(out.response_names.begin(), out.response_names.end(), name);
      if (it == out.response_names.end()) throw DataError("unknown response '" + name + "'");
      ranked.push_back(static_cast<std::size_t>(it - out.response_names.begin()));
    }
  }

  std::vector<double> x(defaults.begin(), defaults.end());
  for (std::size_t k = 0; k < space.size(); ++k) {
    const auto& v = space.variables()[k];
    SensitivityEntry e;
    e.variable = v.name;
    e.base_value = defaults[k];
    e.perturbed_value = defaults[k] * (1.0 + options.perturbation);
    if (e.perturbed_value > v.upper) {
      e.perturbed_value = v.upper;
      e.clamped = true;
    }
    x[k] = e.perturbed_value;
    const auto f1 = probe(x);
    x[k] = defaults[k];

    for (std::size_t r = 0; r < f1.size(); ++r) {
      const double f0 = out.base_response[r];
      e.epsilon.push_back(((f1[r] - f0) / f0) / options.perturbation);
    }
    for (std::size_t r : ranked) {
      const double a = std::abs(e.epsilon[r]);
      e.score = options.aggregate == SensitivityAggregate::max_abs ? std::max(e.score, a) : e.score + a;
    }
    out.entries.push_back(std::move(e));
  }

  std::vector<std::size_t> order(out.entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.entries[a].score > out.entries[b].score; });
  for (std::size_t k : order) out.ranking.push_back(out.entries[k].variable);
  return out;
}

void to_json(nlohmann::json& j, const SensitivityResult& r) {
  j = nlohmann::json::object();
  j["responses"] = r.response_names;
  j["base_response"] = r.base_response;
  auto& entries = j["variables"] = nlohmann::json::array();
  for (const auto& e : r.entries) {
    nlohmann::json eps = nlohmann::json::object();
    for (std::size_t k = 0; k < e.epsilon.size(); ++k) eps[r.response_names[k]] = e.epsilon[k];
    entries.push_back({{"name", e.variable},
                       {"base", e.base_value},
                       {"perturbed", e.perturbed_value},
                       {"clamped", e.clamped},
                       {"epsilon", eps},
                       {"score", e.score}});
  }
  j["ranking"] = r.ranking;
}

}  // namespace pumpfit
