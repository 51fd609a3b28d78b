#pragma once

// Depth-first enumeration of words by prepending symbols. A node at level j
// stands for a suffix s of length j with offset t_s; prepending symbol i gives
// t_{is} = c_i + A t_s. Along the way the engine accumulates
//
//   H(s) = Σ over suffixes s' of s of [ f(center of S_{s'}(box_K)) + L·ρ_{|s'|} ]
//
// where ρ_j bounds the distance from the center of A^j(box_K) to its corners,
// together with the matching lower sum (−L·ρ). At a leaf of depth n the two
// sums bound S_n f∘π over [u] from above and below.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "fractal_pressure/pressure.hpp"
#include "parallel.hpp"

namespace fp::detail {

template <class T>
struct WordPath {
  unsigned depth = 0;
  std::vector<Vector<T>> t;          // t[j]: offset of the suffix of length j
  std::vector<Vector<double>> td;    // double mirror of t
  std::vector<double> high;          // high[j] = H(suffix of length j)
  std::vector<double> floor;         // lower counterpart of high
  std::vector<std::uint32_t> first;  // first[j]: leading symbol of that suffix
  std::uint64_t index = 0;           // lexicographic index of the leaf word

  Word word() const {
    std::vector<std::uint32_t> symbols(depth);
    for (unsigned i = 0; i < depth; ++i) symbols[i] = first[depth - i];
    return Word(std::move(symbols));
  }
};

template <class T>
class WordEngine {
 public:
  WordEngine(const AffineIFS& ifs, unsigned depth, const Potential* f)
      : ifs_(ifs), depth_(depth), f_(f), linear_(ifs.linear_as<T>()), translations_(ifs.translations_as<T>()) {
    const std::size_t d = ifs.dimension();
    const auto& box = ifs.bounds().box;
    Vector<double> center(d), half(d);
    for (std::size_t j = 0; j < d; ++j) {
      center[j] = 0.5 * (box.lo[j] + box.hi[j]);
      half[j] = 0.5 * (box.hi[j] - box.lo[j]);
    }
    Matrix<double> aj = Matrix<double>::identity(d);
    for (unsigned j = 0; j <= depth; ++j) {
      centers_.push_back(aj * center);
      double radius = 0.0;
      Vector<double> corner(d);
      for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        for (std::size_t k = 0; k < d; ++k) corner[k] = (mask >> k) & 1U ? half[k] : -half[k];
        const Vector<double> image = aj * corner;
        double norm = 0.0;
        for (double v : image) norm += v * v;
        radius = std::max(radius, std::sqrt(norm));
      }
      rho_.push_back(radius * (1.0 + 1e-12));
      aj = ifs.linear() * aj;
    }
  }

  unsigned depth() const noexcept { return depth_; }
  // f at the center of the enclosure of S_s(K), given the suffix offset.
  double suffix_center_value(const Vector<double>& ts, unsigned length, Vector<double>& scratch) const {
    scratch.resize(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) scratch[k] = ts[k] + centers_[length][k];
    return (*f_)(scratch);
  }
  double slack(unsigned length) const { return f_->lipschitz() * rho_[length]; }
  double suffix_bound(const Vector<double>& ts, unsigned length, Vector<double>& scratch) const {
    return suffix_center_value(ts, length, scratch) + slack(length);
  }

  // Calls acc.leaf(path) for every word of length depth(). Each work unit
  // owns one accumulator; the returned list is in unit order.
  template <class Acc>
  std::vector<Acc> run(const EnumerationOptions& options, const std::function<Acc()>& make) const {
    const std::size_t l = ifs_.symbol_count();
    unsigned split = 0;
    std::size_t units = 1;
    while (split < depth_ && units < std::max<std::size_t>(options.chunks, 1)) {
      units *= l;
      ++split;
    }
    std::vector<Acc> accs;
    accs.reserve(units);
    for (std::size_t u = 0; u < units; ++u) accs.push_back(make());
    run_units(units, options.threads, [&](std::size_t unit) {
      WordPath<T> path = fresh_path();
      // Unit digits select the first `split` prepended symbols.
      std::size_t rest = unit;
      std::vector<std::uint32_t> digits(split);
      for (unsigned s = split; s-- > 0;) {
        digits[s] = static_cast<std::uint32_t>(rest % l);
        rest /= l;
      }
      std::uint64_t weight = 1;
      for (unsigned j = 0; j < split; ++j) {
        extend(path, j, digits[j], weight);
        weight *= l;
      }
      descend(path, split, weight, accs[unit]);
    });
    return accs;
  }

 private:
  WordPath<T> fresh_path() const {
    const std::size_t d = ifs_.dimension();
    WordPath<T> path;
    path.depth = depth_;
    path.t.assign(depth_ + 1, Vector<T>(d, T(0)));
    path.td.assign(depth_ + 1, Vector<double>(d, 0.0));
    path.high.assign(depth_ + 1, 0.0);
    path.floor.assign(depth_ + 1, 0.0);
    path.first.assign(depth_ + 1, 0);
    return path;
  }

  // Builds level j + 1 from level j by prepending `symbol`; `weight` is
  // l^j, the index contribution of the new leading symbol.
  void extend(WordPath<T>& path, unsigned j, std::uint32_t symbol, std::uint64_t weight) const {
    Vector<T>& next = path.t[j + 1];
    multiply_into(linear_, path.t[j], next);
    for (std::size_t k = 0; k < next.size(); ++k) {
      next[k] += translations_[symbol][k];
      path.td[j + 1][k] = to_double(next[k]);
    }
    path.first[j + 1] = symbol;
    path.high[j + 1] = path.high[j];
    path.floor[j + 1] = path.floor[j];
    if (f_ != nullptr) {
      const double center = suffix_center_value(path.td[j + 1], j + 1, scratch_for_thread());
      path.high[j + 1] += center + slack(j + 1);
      path.floor[j + 1] += center - slack(j + 1);
    }
    if (j == 0) path.index = symbol;
    else path.index = path.index % weight + symbol * weight;
  }

  template <class Acc>
  void descend(WordPath<T>& path, unsigned j, std::uint64_t weight, Acc& acc) const {
    if (j == depth_) {
      acc.leaf(path);
      return;
    }
    const std::size_t l = ifs_.symbol_count();
    for (std::size_t i = 0; i < l; ++i) {
      extend(path, j, static_cast<std::uint32_t>(i), weight);
      descend(path, j + 1, weight * l, acc);
    }
  }

  static Vector<double>& scratch_for_thread() {
    thread_local Vector<double> scratch;
    return scratch;
  }

  const AffineIFS& ifs_;
  unsigned depth_;
  const Potential* f_;
  const Matrix<T>& linear_;
  const std::vector<Vector<T>>& translations_;
  std::vector<Vector<double>> centers_;
  std::vector<double> rho_;
};

// Best value per cell, ties to the smallest word index.
// `extra` travels with the winning word.
struct CellBest {
  double value = -INFINITY;
  std::uint64_t word = UINT64_MAX;
  double extra = 0.0;

  void offer(double v, std::uint64_t w, double e) {
    if (v > value || (v == value && w < word)) {
      value = v;
      word = w;
      extra = e;
    }
  }
  static void merge(CellBest& into, const CellBest& other) { into.offer(other.value, other.word, other.extra); }
};

}  // namespace fp::detail
