#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pumpfit/dataset.hpp"
#include "pumpfit/design_space.hpp"

namespace pumpfit {

struct OracleOptions {
  /// Relative standard deviation of multiplicative Gaussian noise.
  double noise_sigma = 0.005;
  std::uint64_t seed = 0;
  /// Multiplies the non-quadratic term of every response; 0 leaves a pure
  /// quadratic in the design variables.
  double nonquadratic_scale = 1.0;
};

struct OracleResponse {
  double head_m = 0.0;
  double power_kw = 0.0;
  double efficiency_pct = 0.0;
  bool extrapolated = false;
};

/// Closed-form stand-in for a CFD solver over the eleven design variables.
///
/// Each response is a quadratic in the box-normalized coordinates
/// u = (x − mid)/half of the reference design space plus one smooth
/// non-quadratic interaction of (D2, b2, beta2). docs/oracle.md lists every
/// coefficient. Evaluation is pure apart from the noise, which is drawn from
/// a stream keyed by (seed, call index) so concurrent callers never share state.
class SyntheticPumpOracle {
 public:
  explicit SyntheticPumpOracle(OracleOptions options = {});

  const OracleOptions& options() const { return options_; }
  /// Design bounds at the reference duty point; defines u and the default point.
  const DesignSpace& space() const { return space_; }

  static constexpr double kHead0 = 80.0;
  static constexpr double kPower0 = 29.6;
  static constexpr double kEfficiency0 = 74.0;

  /// Noise-free response at a full design point (space() order).
  OracleResponse exact(std::span<const double> x) const;
  /// Response with the noise draw for `call_index`.
  OracleResponse evaluate(std::span<const double> x, std::uint64_t call_index) const;

  /// Completes `inputs` with output columns head [m] and power [kW]
  /// (and efficiency [%] when asked). Variables absent from `inputs` sit at
  /// the box midpoint; row i uses call index i.
  Dataset evaluate(const Dataset& inputs, bool with_efficiency = false) const;

  /// Noise-free (efficiency, head, power) probe usable by `sensitivity`.
  ResponseOracle response_oracle() const;

 private:
  OracleOptions options_;
  DesignSpace space_;
};

}  // namespace pumpfit
