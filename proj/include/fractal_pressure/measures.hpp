#pragma once

#include <span>
#include <vector>

#include "fractal_pressure/pressure.hpp"

namespace fp {

/// Product measure on symbol sequences given by weights p_1..p_l.
class BernoulliMeasure {
 public:
  // Requires p_i >= 0 and |Σp − 1| <= 1e-12.
  explicit BernoulliMeasure(std::vector<double> weights);
  static BernoulliMeasure uniform(std::size_t symbols);

  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double cylinder_weight(const Word& u) const;
  // Weights of the k-block measure, indexed like power_ifs symbols.
  BernoulliMeasure power(unsigned k) const;

 private:
  std::vector<double> weights_;
};

/// −Σ p_i log p_i in nats.
double classical_entropy(const BernoulliMeasure& p);

struct LogSumCheck {
  double lhs = 0.0;  // Σ p_i (a_i − log p_i)
  double rhs = 0.0;  // log Σ e^{a_i}
  std::vector<double> gibbs;
};

/// Both sides of the log-sum inequality and its maximizing weights. Throws
/// on a size mismatch, a non-probability p, or lhs > rhs + 1e-12.
LogSumCheck log_sum_check(std::span<const double> p, std::span<const double> a);
std::vector<double> gibbs_weights(std::span<const double> a);

struct EntropyEstimate {
  unsigned depth = 0;
  double value = 0.0;        // H(pushforward onto depth-n cells) / n
  double h_classical = 0.0;
  std::size_t cells = 0;     // cells carrying mass
  double boundary_mass = 0.0;
  bool boundary_warning = false;  // boundary_mass > 1%
};

/// Pushes each depth-n cylinder weight onto the cell of its fixed point.
EntropyEstimate projection_entropy_estimate(const AffineIFS& ifs, const BernoulliMeasure& p, unsigned depth,
                                            const EnumerationOptions& options = {});

struct IntegralEstimate {
  double value = 0.0;
  double low = 0.0;
  double high = 0.0;
};

/// Σ_u p(u) f(fixed point of u) with error bar L·‖A‖ⁿ·diam(K).
IntegralEstimate integral_estimate(const AffineIFS& ifs, const BernoulliMeasure& p, const Potential& f,
                                   unsigned depth, const EnumerationOptions& options = {});

struct VariationalGap {
  double upper = 0.0;           // pressure_bracket high
  double entropy = 0.0;         // projection entropy estimate
  double integral_low = 0.0;
  double gap = 0.0;             // upper − (entropy + integral_low)
};

VariationalGap variational_gap(const AffineIFS& ifs, const BernoulliMeasure& p, const Potential& f,
                               unsigned depth, const EnumerationOptions& options = {});

/// Words with pairwise disjoint closed cylinder enclosures, chosen greedily by
/// Birkhoff upper bound, with Gibbs weights.
struct SeparatedFamily {
  unsigned depth = 0;
  std::vector<Word> words;
  std::vector<GridKey> cells;     // cell holding each word's fixed point
  std::vector<double> weights;    // ∝ exp(high)
  std::vector<double> high;       // Birkhoff upper bound per word
  std::vector<double> low;        // Birkhoff lower bound over the cylinder
  std::size_t candidates = 0;
  std::size_t dropped = 0;        // removed by the disjointness check
  double certified_lower = 0.0;
  double packing_efficiency = 0.0;
};

SeparatedFamily separated_family(const AffineIFS& ifs, const Potential& f, unsigned depth,
                                 const EnumerationOptions& options = {});
double packing_efficiency(const AffineIFS& ifs, const Potential& f, unsigned depth,
                          const EnumerationOptions& options = {});

std::string entropy_estimate_json(const EntropyEstimate& e);
std::string separated_family_json(const SeparatedFamily& family);

}  // namespace fp
