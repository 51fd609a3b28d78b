#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "fractal_pressure/ifs.hpp"

namespace fp {

/// Controls for the symbolic enumeration shared by every estimator.
struct EnumerationOptions {
  std::uint64_t word_cap = kDefaultWordCap;
  // 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
  // Extra depth for inner (fixed-point) certificates where an operation has
  // no explicit refine argument.
  unsigned refine = 2;
  // Breadth-first levels are expanded with duplicate merging while the level
  // stays within this many nodes; the remainder is walked depth-first from
  // the resulting frontier.
  std::size_t frontier_limit = std::size_t{1} << 16;
  // Number of independent work units the frontier is split into. Results do
  // not depend on this value or on the thread count.
  std::size_t chunks = 64;
};

/// Cell Aⁿ([0,1)^d + α) of the depth-n grid.
struct GridKey {
  unsigned depth = 0;
  std::vector<std::int64_t> alpha;

  friend bool operator==(const GridKey&, const GridKey&) = default;
  friend auto operator<=>(const GridKey&, const GridKey&) = default;
};

struct CoverBounds {
  std::size_t dimension = 0;
  unsigned depth = 0;
  unsigned refine = 0;
  std::vector<GridKey> inner_keys;  // sorted; each holds a computed point of K
  std::vector<GridKey> outer_keys;  // sorted; superset of the cells meeting K

  std::size_t n_minus() const noexcept { return inner_keys.size(); }
  std::size_t n_plus() const noexcept { return outer_keys.size(); }
};

/// α = floor(A⁻ⁿ x). Exact for Rational input on an exact IFS; in floating
/// mode coordinates within 1e-9 cells of a boundary are snapped onto it.
template <class T>
GridKey grid_key_of_point(const AffineIFS& ifs, const Vector<T>& x, unsigned depth);

/// Keys at depth |u| whose closed cells meet the closed enclosure of S_u(K),
/// grown by `inflate` grid units on every side.
std::vector<GridKey> cylinder_cell_range(const AffineIFS& ifs, const Word& u, double inflate = 0.0);

std::vector<GridKey> outer_cover(const AffineIFS& ifs, unsigned depth, const EnumerationOptions& options = {});
/// Depth-n keys of the fixed points of all words of depth n + refine (at
/// least 1).
std::vector<GridKey> inner_cover(const AffineIFS& ifs, unsigned depth, unsigned refine,
                                 const EnumerationOptions& options = {});
CoverBounds cover_bounds(const AffineIFS& ifs, unsigned depth, unsigned refine,
                         const EnumerationOptions& options = {});

/// CSV dump: versioned header line, then one row per outer key with
/// certificate "inner" or "outer-only".
std::string cover_csv(const CoverBounds& cover);
/// {"depth": n, "n_minus": …, "n_plus": …}
std::string cover_counts_json(const CoverBounds& cover);

inline constexpr const char* kCsvVersionLine = "# fractal-pressure v1";

}  // namespace fp
