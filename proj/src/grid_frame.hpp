#pragma once

// Grid-frame geometry. At depth n a cylinder S_u(K) is viewed through A⁻ⁿ,
// where it becomes g_u + K with g_u = A⁻ⁿ t_u, and grid cells become unit
// cubes [0,1)^d + α. Offsets obey g_{u·i} = A⁻¹(g_u + c_i), which the walker
// below expands level by level.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "fractal_pressure/grid_cover.hpp"
#include "fractal_pressure/lattice.hpp"
#include "parallel.hpp"

namespace fp::detail {

inline constexpr double kConditioningCap = 1e8;

struct KeyRange {
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> hi;
};

// Refuses floating-mode work at depths where A⁻ⁿ is ill-conditioned.
void check_conditioning(const AffineIFS& ifs, unsigned depth);

template <class T>
class GridFrame {
 public:
  GridFrame(const AffineIFS& ifs, unsigned max_level)
      : dim_(ifs.dimension()), symbols_(ifs.symbol_count()), inverse_(ifs.inverse_linear_as<T>()),
        linear_(ifs.linear_as<T>()), box_(ifs.box_as<T>()) {
    if constexpr (std::is_same_v<T, double>) check_conditioning(ifs, max_level);
    for (const auto& c : ifs.translations_as<T>()) shifted_.push_back(inverse_ * c);
  }

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t symbols() const noexcept { return symbols_; }
  const Box<T>& box() const noexcept { return box_; }
  const Matrix<T>& inverse() const noexcept { return inverse_; }
  const Matrix<T>& linear() const noexcept { return linear_; }

  // out = A⁻¹ g + A⁻¹ c_i
  void child(const Vector<T>& g, std::size_t i, Vector<T>& out) const {
    multiply_into(inverse_, g, out);
    for (std::size_t j = 0; j < dim_; ++j) out[j] += shifted_[i][j];
  }

  // Valid key range per axis at depth n: the hull of A⁻ⁿ(box_K), with the
  // top face assigned to the last interior cell.
  KeyRange key_range(unsigned depth) const {
    Matrix<T> inv_n = power(inverse_, depth);
    KeyRange range{std::vector<std::int64_t>(dim_), std::vector<std::int64_t>(dim_)};
    Vector<T> lo(dim_), hi(dim_);
    bool first = true;
    Vector<T> corner(dim_), image;
    for (std::size_t mask = 0; mask < (std::size_t{1} << dim_); ++mask) {
      for (std::size_t j = 0; j < dim_; ++j) corner[j] = (mask >> j) & 1U ? box_.hi[j] : box_.lo[j];
      multiply_into(inv_n, corner, image);
      for (std::size_t j = 0; j < dim_; ++j) {
        if (first || image[j] < lo[j]) lo[j] = image[j];
        if (first || image[j] > hi[j]) hi[j] = image[j];
      }
      first = false;
    }
    for (std::size_t j = 0; j < dim_; ++j) {
      range.lo[j] = floor_key(lo[j]);
      range.hi[j] = std::max(range.lo[j], ceil_key(hi[j]) - 1);
    }
    return range;
  }

  // (I - A^m)^{-1} A^{m-n}: maps a depth-m offset g_w to A⁻ⁿ of the fixed
  // point of S_w.
  Matrix<T> fixed_point_matrix(unsigned depth, unsigned fixed_depth) const {
    Matrix<T> am = power(linear_, fixed_depth);
    Matrix<T> lhs = Matrix<T>::identity(dim_) - am;
    return solve(lhs, power(linear_, fixed_depth - depth));
  }

 private:
  std::size_t dim_;
  std::size_t symbols_;
  Matrix<T> inverse_;
  Matrix<T> linear_;
  Box<T> box_;
  std::vector<Vector<T>> shifted_;
};

// Emits every key whose closed cell meets the closed box g + box_K grown by
// `inflate`, clipped to `range`.
template <class T, class Emit>
void for_each_enclosure_key(const GridFrame<T>& frame, const KeyRange& range, const Vector<T>& g, const T& inflate,
                            std::vector<std::int64_t>& scratch, Emit&& emit) {
  const std::size_t d = frame.dimension();
  std::int64_t lo[8], hi[8];
  std::vector<std::int64_t> lo_big, hi_big;
  std::int64_t* plo = lo;
  std::int64_t* phi = hi;
  if (d > 8) {
    lo_big.resize(d);
    hi_big.resize(d);
    plo = lo_big.data();
    phi = hi_big.data();
  }
  for (std::size_t j = 0; j < d; ++j) {
    T a = g[j] + frame.box().lo[j] - inflate;
    T b = g[j] + frame.box().hi[j] + inflate;
    plo[j] = std::max(range.lo[j], ceil_key(a) - 1);
    phi[j] = std::min(range.hi[j], floor_key(b));
    if (plo[j] > phi[j]) return;
  }
  scratch.assign(plo, plo + d);
  while (true) {
    emit(std::span<const std::int64_t>(scratch));
    std::size_t j = 0;
    while (j < d && scratch[j] == phi[j]) {
      scratch[j] = plo[j];
      ++j;
    }
    if (j == d) return;
    ++scratch[j];
  }
}

// Key of a point given in the grid frame, with the top-face clamp.
template <class T>
void point_key(const Vector<T>& x, const KeyRange& range, std::vector<std::int64_t>& out) {
  out.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = std::min(floor_key(x[j]), range.hi[j]);
}

template <class T>
struct LatticeNode {
  Vector<T> g;
  double weight = 1.0;
};

// Expands the offset tree to `max_level`, calling visitor.visit(level, g,
// weight) for every level whose bit is set in `visit_mask`.
//
// Breadth-first levels merge identical offsets (their subtrees coincide),
// summing weights. Once a level would exceed options.frontier_limit the
// remaining depth is walked depth-first from fixed contiguous chunks of the
// frontier, one visitor per chunk. The returned visitors are ordered
// (breadth-first phase first, then chunks), so folding them in order gives
// results independent of the thread count.
template <class T, class Visitor>
std::vector<Visitor> walk_lattice(const GridFrame<T>& frame, unsigned max_level, std::uint64_t visit_mask,
                                  const std::vector<double>* symbol_weights, const EnumerationOptions& options,
                                  const std::function<Visitor()>& make_visitor) {
  const std::size_t l = frame.symbols();
  const std::size_t d = frame.dimension();
  auto wants = [visit_mask](unsigned level) { return ((visit_mask >> level) & 1U) != 0; };
  auto symbol_weight = [&](std::size_t i) { return symbol_weights ? (*symbol_weights)[i] : 1.0; };

  std::vector<Visitor> visitors;
  visitors.push_back(make_visitor());

  std::vector<LatticeNode<T>> nodes(1);
  nodes[0].g.assign(d, T(0));
  unsigned level = 0;
  if (wants(0)) visitors[0].visit(0, nodes[0].g, nodes[0].weight);

  while (level < max_level && nodes.size() * l <= std::max<std::size_t>(options.frontier_limit, l)) {
    std::vector<LatticeNode<T>> next;
    next.reserve(nodes.size() * l);
    for (const auto& node : nodes)
      for (std::size_t i = 0; i < l; ++i) {
        const double w = symbol_weight(i);
        if (symbol_weights && w == 0.0) continue;
        LatticeNode<T> child;
        frame.child(node.g, i, child.g);
        child.weight = node.weight * w;
        next.push_back(std::move(child));
      }
    std::vector<std::size_t> order(next.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(next[a].g.begin(), next[a].g.end(), next[b].g.begin(), next[b].g.end());
    });
    nodes.clear();
    for (std::size_t idx : order) {
      if (!nodes.empty() && nodes.back().g == next[idx].g) {
        nodes.back().weight += next[idx].weight;
      } else {
        nodes.push_back(std::move(next[idx]));
      }
    }
    ++level;
    if (wants(level))
      for (const auto& node : nodes) visitors[0].visit(level, node.g, node.weight);
  }
  if (level == max_level || nodes.empty()) return visitors;

  const std::size_t chunk_count = std::max<std::size_t>(1, std::min(options.chunks, nodes.size()));
  const std::size_t base_level = level;
  for (std::size_t c = 0; c < chunk_count; ++c) visitors.push_back(make_visitor());

  run_units(chunk_count, options.threads, [&](std::size_t c) {
    Visitor& visitor = visitors[c + 1];
    const std::size_t begin = nodes.size() * c / chunk_count;
    const std::size_t end = nodes.size() * (c + 1) / chunk_count;
    std::vector<Vector<T>> buffers(max_level + 1, Vector<T>(d));
    std::function<void(unsigned, const Vector<T>&, double)> descend = [&](unsigned lvl, const Vector<T>& g,
                                                                           double weight) {
      for (std::size_t i = 0; i < l; ++i) {
        const double w = symbol_weight(i);
        if (symbol_weights && w == 0.0) continue;
        Vector<T>& child = buffers[lvl + 1];
        frame.child(g, i, child);
        const double cw = weight * w;
        if (wants(lvl + 1)) visitor.visit(lvl + 1, child, cw);
        if (lvl + 1 < max_level) descend(lvl + 1, child, cw);
      }
    };
    for (std::size_t k = begin; k < end; ++k) descend(static_cast<unsigned>(base_level), nodes[k].g, nodes[k].weight);
  });
  return visitors;
}

}  // namespace fp::detail
