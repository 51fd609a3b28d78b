#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fractal_pressure/linalg.hpp"

namespace fp {

enum class Arithmetic { exact, floating };

inline constexpr std::uint64_t kDefaultWordCap = 10'000'000;

// Number of words of length n over l symbols, saturating at UINT64_MAX.
std::uint64_t word_count(std::size_t symbols, unsigned depth);
// Largest n with symbols^n <= cap (a large sentinel when symbols == 1).
unsigned max_depth_within(std::size_t symbols, std::uint64_t cap);
// Throws CapExceeded when symbols^depth > cap.
void require_within_cap(std::size_t symbols, unsigned depth, std::uint64_t cap);

/// A finite word over the alphabet of an IFS.
///
/// Symbols are stored zero-based; text forms ("1,3") are one-based to match
/// the usual S_1..S_l numbering.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<std::uint32_t> symbols) : symbols_(std::move(symbols)) {}

  static Word parse(std::string_view one_based);
  // Word with index `index` in the lexicographic order of depth-`depth` words.
  static Word from_index(std::uint64_t index, std::size_t symbols, unsigned depth);

  std::size_t depth() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  std::uint32_t operator[](std::size_t i) const { return symbols_[i]; }
  const std::vector<std::uint32_t>& symbols() const noexcept { return symbols_; }

  Word concat(const Word& tail) const;
  std::string to_string() const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  std::vector<std::uint32_t> symbols_;
};

template <class T>
struct BasicAffineMap {
  Matrix<T> linear;
  Vector<T> offset;

  static BasicAffineMap identity(std::size_t d) { return {Matrix<T>::identity(d), Vector<T>(d, T(0))}; }

  Vector<T> operator()(const Vector<T>& x) const { return linear * x + offset; }

  // this ∘ inner
  BasicAffineMap after(const BasicAffineMap& inner) const {
    return {linear * inner.linear, linear * inner.offset + offset};
  }
};

using AffineMap = BasicAffineMap<double>;
using ExactAffineMap = BasicAffineMap<Rational>;

template <class T>
struct Box {
  Vector<T> lo;
  Vector<T> hi;

  bool contains(const Box& other) const {
    for (std::size_t j = 0; j < lo.size(); ++j)
      if (other.lo[j] < lo[j] || other.hi[j] > hi[j]) return false;
    return true;
  }
};

struct AttractorBounds {
  Box<double> box;
  std::optional<Box<Rational>> exact_box;  // present in exact mode
  double diameter = 0.0;
  // False only for the ball fallback used when no invariant axis-aligned box
  // exists; the box still contains K.
  bool invariant = true;
};

/// Affine IFS {S_i(x) = A x + c_i} with a single shared linear part.
///
/// Immutable; copies share storage. In exact mode all data is rational and a
/// double mirror is kept for potential evaluation.
class AffineIFS {
 public:
  static AffineIFS make_exact(Matrix<Rational> linear, std::vector<Vector<Rational>> translations);
  static AffineIFS make_floating(Matrix<double> linear, std::vector<Vector<double>> translations);

  std::size_t dimension() const noexcept;
  std::size_t symbol_count() const noexcept;
  // Spectral norm of A.
  double ratio() const noexcept;
  bool conformal() const noexcept;
  Arithmetic mode() const noexcept;
  bool exact() const noexcept { return mode() == Arithmetic::exact; }

  const Matrix<double>& linear() const noexcept;
  const std::vector<Vector<double>>& translations() const noexcept;
  // Throw ErrorCode::invalid_argument in floating mode.
  const Matrix<Rational>& exact_linear() const;
  const std::vector<Vector<Rational>>& exact_translations() const;

  template <class T>
  const Matrix<T>& linear_as() const {
    if constexpr (std::is_same_v<T, double>) return linear();
    else return exact_linear();
  }
  template <class T>
  const std::vector<Vector<T>>& translations_as() const {
    if constexpr (std::is_same_v<T, double>) return translations();
    else return exact_translations();
  }

  // A^{-1}. In floating mode this is the exact inverse of the stored double
  // matrix, rounded once.
  template <class T>
  const Matrix<T>& inverse_linear_as() const;

  const AttractorBounds& bounds() const noexcept;
  template <class T>
  const Box<T>& box_as() const {
    if constexpr (std::is_same_v<T, double>) return bounds().box;
    else return *bounds().exact_box;
  }

  struct Data;  // opaque

 private:
  explicit AffineIFS(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  static AffineIFS finish(std::shared_ptr<Data> data);
  std::shared_ptr<const Data> data_;
};

template <>
const Matrix<double>& AffineIFS::inverse_linear_as<double>() const;
template <>
const Matrix<Rational>& AffineIFS::inverse_linear_as<Rational>() const;

/// S_{u_1} ∘ ... ∘ S_{u_n} as (Aⁿ, t_u). Rational requires an exact IFS.
template <class T>
BasicAffineMap<T> compose_word(const AffineIFS& ifs, const Word& u);

/// Unique fixed point of a contracting affine map.
template <class T>
Vector<T> fixed_point(const BasicAffineMap<T>& map);

AttractorBounds attractor_bounds(const AffineIFS& ifs);

/// The IFS of all k-fold compositions, symbols in lexicographic word order.
AffineIFS power_ifs(const AffineIFS& ifs, unsigned k, std::uint64_t cap = kDefaultWordCap);

}  // namespace fp
