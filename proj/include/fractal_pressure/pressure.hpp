#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fractal_pressure/grid_cover.hpp"

namespace fp {

/// Real function on ambient space with a declared Lipschitz constant.
class Potential {
 public:
  using Function = std::function<double(std::span<const double>)>;

  static Potential constant(double value);
  // f(x) = coeffs·x + intercept. The declared constant must be at least |coeffs|.
  static Potential linear(std::vector<double> coeffs, double intercept, double lipschitz);
  static Potential custom(Function f, double lipschitz, std::string description);

  double operator()(std::span<const double> x) const { return fn_(x); }
  double lipschitz() const noexcept { return lipschitz_; }
  const std::optional<double>& constant_value() const noexcept { return constant_; }
  const std::string& description() const noexcept { return description_; }

  // f + c, with the same Lipschitz constant.
  Potential shifted(double c) const;

 private:
  Potential() = default;
  Function fn_;
  double lipschitz_ = 0.0;
  std::optional<double> constant_;
  std::string description_;
};

/// Spot-checks the Lipschitz bound on random pairs in the attractor box and
/// throws ErrorCode::potential_rejected on a violation.
void check_lipschitz(const Potential& f, const AffineIFS& ifs, unsigned samples = 1000, std::uint64_t seed = 1);

/// Bounds on sup over the cylinder [u] of the Birkhoff sum S_n f∘π.
struct BirkhoffBracket {
  Word word;
  double low = 0.0;   // S_n f at the periodic point u^∞
  double high = 0.0;  // sum of suffix-enclosure sup bounds
};

BirkhoffBracket birkhoff_bounds(const AffineIFS& ifs, const Potential& f, const Word& u);

struct PressureBracket {
  unsigned depth = 0;
  unsigned refine = 0;
  double low = 0.0;
  double high = 0.0;
  std::size_t box_count_used = 0;  // outer cells in the upper sum
  std::size_t inner_count = 0;     // witnessed cells in the lower sum
  std::string potential;
};

PressureBracket pressure_bracket(const AffineIFS& ifs, const Potential& f, unsigned depth,
                                 const EnumerationOptions& options = {});

/// log Σ exp(v_i), evaluated around the maximum. Throws on an empty list.
double log_sum_exp(std::span<const double> values);

struct DepthExponent {
  unsigned depth = 0;
  std::size_t n_minus = 0;
  std::size_t n_plus = 0;
  double ratio_lo = 0.0;  // log N₋ / (n·scale)
  double ratio_hi = 0.0;  // log N₊ / (n·scale)
  // Differences against the previous depth; absent at the first depth.
  std::optional<double> slope_lo;
  std::optional<double> slope_hi;
};

struct BisectionCheck {
  double root = 0.0;
  unsigned iterations = 0;
  bool agrees = false;
};

/// Exponent estimates over a depth range. With a conformal system the values
/// are dimensions (scale = −log r); otherwise they are nats per step
/// (scale = 1) and `dimension` is false.
struct DimensionReport {
  double r = 0.0;
  bool conformal = false;
  bool dimension = false;
  unsigned refine = 0;
  std::vector<DepthExponent> depths;
  double estimate = 0.0;     // slope midpoint at the largest depth pair
  double estimate_lo = 0.0;  // slope bracket at the largest depth pair
  double estimate_hi = 0.0;
  double root_lo = 0.0;      // closed-form Bowen interval, widened to
  double root_hi = 0.0;      // contain the slope bracket
  bool drift = false;        // consecutive slope brackets disagree
  std::optional<BisectionCheck> bisection;

  bool converged() const noexcept { return !drift && (!bisection || bisection->agrees); }
};

DimensionReport box_exponent(const AffineIFS& ifs, unsigned first_depth, unsigned last_depth,
                             const EnumerationOptions& options = {});
/// Solves P(t·log r) = 0. Refuses non-conformal systems.
DimensionReport bowen_root(const AffineIFS& ifs, unsigned first_depth, unsigned last_depth,
                           const EnumerationOptions& options = {});

std::string dimension_report_json(const DimensionReport& report);
std::string pressure_bracket_json(const PressureBracket& bracket);

}  // namespace fp
