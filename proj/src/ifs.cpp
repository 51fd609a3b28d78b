#include "fractal_pressure/ifs.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace fp {

std::uint64_t word_count(std::size_t symbols, unsigned depth) {
  std::uint64_t count = 1;
  for (unsigned i = 0; i < depth; ++i) {
    if (count > std::numeric_limits<std::uint64_t>::max() / symbols) return std::numeric_limits<std::uint64_t>::max();
    count *= symbols;
  }
  return count;
}

unsigned max_depth_within(std::size_t symbols, std::uint64_t cap) {
  if (symbols <= 1) return 62;
  unsigned n = 0;
  while (n < 62 && word_count(symbols, n + 1) <= cap) ++n;
  return n;
}

void require_within_cap(std::size_t symbols, unsigned depth, std::uint64_t cap) {
  if (depth > 62) throw Error(ErrorCode::invalid_argument, "depth " + std::to_string(depth) + " exceeds the supported maximum 62");
  if (word_count(symbols, depth) <= cap) return;
  const unsigned feasible = max_depth_within(symbols, cap);
  throw CapExceeded(cap, feasible,
                    std::to_string(symbols) + "^" + std::to_string(depth) + " words exceed the enumeration cap " +
                        std::to_string(cap) + "; maximal feasible depth is " + std::to_string(feasible));
}

Word Word::parse(std::string_view one_based) {
  std::vector<std::uint32_t> symbols;
  std::string token;
  std::istringstream in{std::string(one_based)};
  while (std::getline(in, token, ',')) {
    token.erase(std::remove_if(token.begin(), token.end(), [](unsigned char c) { return std::isspace(c); }), token.end());
    if (token.empty()) {
      if (one_based.find_first_not_of(" \t") == std::string_view::npos) break;
      throw Error(ErrorCode::invalid_word, "empty symbol in word '" + std::string(one_based) + "'");
    }
    if (!std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); }) || token.size() > 9)
      throw Error(ErrorCode::invalid_word, "bad symbol '" + token + "' in word");
    const unsigned long value = std::stoul(token);
    if (value == 0) throw Error(ErrorCode::invalid_word, "symbols are numbered from 1");
    symbols.push_back(static_cast<std::uint32_t>(value - 1));
  }
  return Word(std::move(symbols));
}

Word Word::from_index(std::uint64_t index, std::size_t symbols, unsigned depth) {
  std::vector<std::uint32_t> s(depth);
  for (unsigned i = depth; i-- > 0;) {
    s[i] = static_cast<std::uint32_t>(index % symbols);
    index /= symbols;
  }
  return Word(std::move(s));
}

Word Word::concat(const Word& tail) const {
  std::vector<std::uint32_t> s = symbols_;
  s.insert(s.end(), tail.symbols_.begin(), tail.symbols_.end());
  return Word(std::move(s));
}

std::string Word::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(symbols_[i] + 1);
  }
  return out;
}

struct AffineIFS::Data {
  std::size_t d = 0;
  Arithmetic mode = Arithmetic::floating;
  Matrix<double> linear;
  std::vector<Vector<double>> translations;
  Matrix<Rational> exact_linear;
  std::vector<Vector<Rational>> exact_translations;
  Matrix<double> inverse;
  Matrix<Rational> exact_inverse;
  double ratio = 0.0;
  bool conformal = false;
  AttractorBounds bounds;
};

namespace {

void check_shapes(std::size_t rows, std::size_t cols, std::size_t count, const std::vector<std::size_t>& sizes) {
  if (rows == 0 || rows != cols) throw Error(ErrorCode::invalid_argument, "linear part must be a non-empty square matrix");
  if (count == 0) throw Error(ErrorCode::invalid_argument, "an IFS needs at least one map");
  for (std::size_t s : sizes)
    if (s != rows) throw Error(ErrorCode::invalid_argument, "translation dimension does not match the matrix");
}

template <class T>
T positive_part(const T& x) {
  return x > 0 ? T(x) : T(0);
}
template <class T>
T negative_part(const T& x) {
  return x < 0 ? T(x) : T(0);
}

template <class T>
Box<T> image_hull(const Matrix<T>& a, const Vector<T>& c, const Box<T>& b) {
  const std::size_t d = c.size();
  Box<T> out{Vector<T>(d), Vector<T>(d)};
  for (std::size_t j = 0; j < d; ++j) {
    T lo = c[j], hi = c[j];
    for (std::size_t k = 0; k < d; ++k) {
      lo += positive_part(a(j, k)) * b.lo[k] + negative_part(a(j, k)) * b.hi[k];
      hi += positive_part(a(j, k)) * b.hi[k] + negative_part(a(j, k)) * b.lo[k];
    }
    out.lo[j] = lo;
    out.hi[j] = hi;
  }
  return out;
}

// Least box B with hull(S_i(B)) ⊆ B for all i, via the linear system
//   hi = cmax + A⁺hi + A⁻lo,  lo = cmin + A⁺lo + A⁻hi.
template <class T>
std::optional<Box<T>> least_invariant_box(const Matrix<T>& a, const std::vector<Vector<T>>& c) {
  const std::size_t d = a.rows();
  Vector<T> cmax = c[0], cmin = c[0];
  for (const auto& ci : c)
    for (std::size_t j = 0; j < d; ++j) {
      if (ci[j] > cmax[j]) cmax[j] = ci[j];
      if (ci[j] < cmin[j]) cmin[j] = ci[j];
    }
  Matrix<T> system = Matrix<T>::identity(2 * d);
  Vector<T> rhs(2 * d);
  for (std::size_t j = 0; j < d; ++j) {
    rhs[j] = cmax[j];
    rhs[d + j] = cmin[j];
    for (std::size_t k = 0; k < d; ++k) {
      system(j, k) -= positive_part(a(j, k));
      system(j, d + k) -= negative_part(a(j, k));
      system(d + j, d + k) -= positive_part(a(j, k));
      system(d + j, k) -= negative_part(a(j, k));
    }
  }
  Vector<T> x;
  try {
    x = solve(system, rhs);
  } catch (const Error&) {
    return std::nullopt;
  }
  Box<T> box{Vector<T>(x.begin() + static_cast<std::ptrdiff_t>(d), x.end()),
             Vector<T>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(d))};
  for (std::size_t j = 0; j < d; ++j)
    if (box.lo[j] > box.hi[j]) return std::nullopt;
  return box;
}

// Nearest double on the given side of q.
double rounded_toward(const Rational& q, int direction) {
  double x = q.get_d();
  const Rational back = exact_rational(x);
  if (direction < 0 && back > q) x = std::nextafter(x, -INFINITY);
  if (direction > 0 && back < q) x = std::nextafter(x, INFINITY);
  return x;
}

double outward(double x, int direction) {
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(x));
  return direction < 0 ? x - slack : x + slack;
}

bool invariant_under(const Matrix<double>& a, const std::vector<Vector<double>>& c, const Box<double>& box) {
  for (const auto& ci : c)
    if (!box.contains(image_hull(a, ci, box))) return false;
  return true;
}

AttractorBounds compute_bounds(const AffineIFS::Data& data);

}  // namespace

AffineIFS AffineIFS::finish(std::shared_ptr<Data> data) {
  const std::size_t d = data->d;
  if (data->mode == Arithmetic::exact) {
    const Matrix<Rational>& a = data->exact_linear;
    Matrix<Rational> gram = a * a.transposed();
    bool conformal = true;
    for (std::size_t i = 0; i < d && conformal; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if ((i == j && gram(i, j) != gram(0, 0)) || (i != j && gram(i, j) != 0)) {
          conformal = false;
          break;
        }
    data->conformal = conformal;
    if (conformal) {
      if (gram(0, 0) >= 1) throw Error(ErrorCode::invalid_argument, "linear part is not a strict contraction (‖A‖ ≥ 1)");
      data->ratio = std::sqrt(gram(0, 0).get_d());
    } else {
      data->ratio = spectral_norm(data->linear);
    }
    try {
      data->exact_inverse = inverse(a);
    } catch (const Error&) {
      throw Error(ErrorCode::invalid_argument, "linear part must be invertible");
    }
    data->inverse = to_double(data->exact_inverse);
  } else {
    const Matrix<double>& a = data->linear;
    for (double x : a.data())
      if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "non-finite matrix entry");
    for (const auto& c : data->translations)
      for (double x : c)
        if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "non-finite translation entry");
    data->ratio = spectral_norm(a);
    const double r2 = data->ratio * data->ratio;
    Matrix<double> gram = a * a.transposed();
    double deviation = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) deviation = std::max(deviation, std::fabs(gram(i, j) - (i == j ? r2 : 0.0)));
    data->conformal = deviation <= 1e-12;
    // Invert the double matrix exactly, then round once.
    Matrix<Rational> exact(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) exact(i, j) = exact_rational(a(i, j));
    try {
      data->inverse = to_double(inverse(exact));
    } catch (const Error&) {
      throw Error(ErrorCode::invalid_argument, "linear part must be invertible");
    }
  }
  if (!(data->ratio < 1.0)) throw Error(ErrorCode::invalid_argument, "linear part is not a strict contraction (‖A‖ ≥ 1)");
  data->bounds = compute_bounds(*data);
  return AffineIFS(std::move(data));
}

AffineIFS AffineIFS::make_exact(Matrix<Rational> linear, std::vector<Vector<Rational>> translations) {
  std::vector<std::size_t> sizes;
  for (const auto& c : translations) sizes.push_back(c.size());
  check_shapes(linear.rows(), linear.cols(), translations.size(), sizes);
  auto data = std::make_shared<Data>();
  data->d = linear.rows();
  data->mode = Arithmetic::exact;
  data->linear = to_double(linear);
  for (const auto& c : translations) data->translations.push_back(to_double(c));
  data->exact_linear = std::move(linear);
  data->exact_translations = std::move(translations);
  return finish(std::move(data));
}

AffineIFS AffineIFS::make_floating(Matrix<double> linear, std::vector<Vector<double>> translations) {
  std::vector<std::size_t> sizes;
  for (const auto& c : translations) sizes.push_back(c.size());
  check_shapes(linear.rows(), linear.cols(), translations.size(), sizes);
  auto data = std::make_shared<Data>();
  data->d = linear.rows();
  data->mode = Arithmetic::floating;
  data->linear = std::move(linear);
  data->translations = std::move(translations);
  return finish(std::move(data));
}

std::size_t AffineIFS::dimension() const noexcept { return data_->d; }
std::size_t AffineIFS::symbol_count() const noexcept { return data_->translations.size(); }
double AffineIFS::ratio() const noexcept { return data_->ratio; }
bool AffineIFS::conformal() const noexcept { return data_->conformal; }
Arithmetic AffineIFS::mode() const noexcept { return data_->mode; }
const Matrix<double>& AffineIFS::linear() const noexcept { return data_->linear; }
const std::vector<Vector<double>>& AffineIFS::translations() const noexcept { return data_->translations; }
const AttractorBounds& AffineIFS::bounds() const noexcept { return data_->bounds; }

const Matrix<Rational>& AffineIFS::exact_linear() const {
  if (!exact()) throw Error(ErrorCode::invalid_argument, "exact data requested from a floating-mode IFS");
  return data_->exact_linear;
}

const std::vector<Vector<Rational>>& AffineIFS::exact_translations() const {
  if (!exact()) throw Error(ErrorCode::invalid_argument, "exact data requested from a floating-mode IFS");
  return data_->exact_translations;
}

template <>
const Matrix<double>& AffineIFS::inverse_linear_as<double>() const {
  return data_->inverse;
}

template <>
const Matrix<Rational>& AffineIFS::inverse_linear_as<Rational>() const {
  if (!exact()) throw Error(ErrorCode::invalid_argument, "exact data requested from a floating-mode IFS");
  return data_->exact_inverse;
}

namespace {

AttractorBounds compute_bounds(const AffineIFS::Data& data) {
  AttractorBounds out;
  const std::size_t d = data.d;
  if (data.mode == Arithmetic::exact) {
    auto box = least_invariant_box(data.exact_linear, data.exact_translations);
    if (box) {
      bool ok = true;
      for (const auto& c : data.exact_translations)
        if (!box->contains(image_hull(data.exact_linear, c, *box))) ok = false;
      if (ok) {
        out.exact_box = *box;
        out.box = {Vector<double>(d), Vector<double>(d)};
        for (std::size_t j = 0; j < d; ++j) {
          out.box.lo[j] = rounded_toward(box->lo[j], -1);
          out.box.hi[j] = rounded_toward(box->hi[j], +1);
        }
        // The mirror box is only used for potential sampling and sup bounds;
        // grid computations read exact_box.
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double w = Rational(box->hi[j] - box->lo[j]).get_d();
          sq += w * w;
        }
        out.diameter = std::sqrt(sq);
        return out;
      }
    }
  } else {
    auto box = least_invariant_box(data.linear, data.translations);
    if (box) {
      for (std::size_t j = 0; j < d; ++j) {
        box->lo[j] = outward(box->lo[j], -1);
        box->hi[j] = outward(box->hi[j], +1);
      }
      if (invariant_under(data.linear, data.translations, *box)) {
        out.box = *box;
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) sq += (box->hi[j] - box->lo[j]) * (box->hi[j] - box->lo[j]);
        out.diameter = std::sqrt(sq);
        return out;
      }
    }
  }
  // No invariant axis-aligned box (|A| has spectral radius >= 1 after
  // rotation). Fall back to the bounding box of an invariant ball around the
  // fixed point of S_1.
  AffineMap s1{data.linear, data.translations[0]};
  Vector<double> p = fixed_point(s1);
  double radius = 0.0;
  for (const auto& c : data.translations) {
    Vector<double> q = data.linear * p + c;
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) sq += (q[j] - p[j]) * (q[j] - p[j]);
    radius = std::max(radius, std::sqrt(sq));
  }
  radius = outward(radius / (1.0 - data.ratio), +1);
  out.box = {Vector<double>(d), Vector<double>(d)};
  for (std::size_t j = 0; j < d; ++j) {
    out.box.lo[j] = outward(p[j] - radius, -1);
    out.box.hi[j] = outward(p[j] + radius, +1);
  }
  if (data.mode == Arithmetic::exact) {
    Box<Rational> exact{Vector<Rational>(d), Vector<Rational>(d)};
    for (std::size_t j = 0; j < d; ++j) {
      exact.lo[j] = exact_rational(out.box.lo[j]);
      exact.hi[j] = exact_rational(out.box.hi[j]);
    }
    out.exact_box = exact;
  }
  out.diameter = 2.0 * radius * std::sqrt(static_cast<double>(d));
  out.invariant = false;
  return out;
}

}  // namespace

AttractorBounds attractor_bounds(const AffineIFS& ifs) { return ifs.bounds(); }

template <class T>
BasicAffineMap<T> compose_word(const AffineIFS& ifs, const Word& u) {
  const std::size_t l = ifs.symbol_count();
  for (std::uint32_t s : u.symbols())
    if (s >= l)
      throw Error(ErrorCode::invalid_word,
                  "symbol " + std::to_string(s + 1) + " out of range 1.." + std::to_string(l));
  const Matrix<T>& a = ifs.linear_as<T>();
  const auto& c = ifs.translations_as<T>();
  auto map = BasicAffineMap<T>::identity(ifs.dimension());
  // t_u = c_{u_1} + A c_{u_2} + ... + A^{n-1} c_{u_n}
  for (std::uint32_t s : u.symbols()) {
    Vector<T> shift = map.linear * c[s];
    for (std::size_t j = 0; j < shift.size(); ++j) map.offset[j] += shift[j];
    map.linear = map.linear * a;
  }
  return map;
}

template BasicAffineMap<double> compose_word<double>(const AffineIFS&, const Word&);
template BasicAffineMap<Rational> compose_word<Rational>(const AffineIFS&, const Word&);

template <class T>
Vector<T> fixed_point(const BasicAffineMap<T>& map) {
  if (!(spectral_norm(to_double(map.linear)) < 1.0))
    throw Error(ErrorCode::invalid_argument, "fixed point requested for a non-contracting map");
  const std::size_t d = map.offset.size();
  return solve(Matrix<T>::identity(d) - map.linear, map.offset);
}

template Vector<double> fixed_point<double>(const BasicAffineMap<double>&);
template Vector<Rational> fixed_point<Rational>(const BasicAffineMap<Rational>&);

AffineIFS power_ifs(const AffineIFS& ifs, unsigned k, std::uint64_t cap) {
  if (k == 0) throw Error(ErrorCode::invalid_argument, "power must be at least 1");
  const std::size_t l = ifs.symbol_count();
  require_within_cap(l, k, cap);
  const std::uint64_t count = word_count(l, k);
  if (ifs.exact()) {
    std::vector<Vector<Rational>> translations;
    translations.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
      translations.push_back(compose_word<Rational>(ifs, Word::from_index(i, l, k)).offset);
    return AffineIFS::make_exact(power(ifs.exact_linear(), k), std::move(translations));
  }
  std::vector<Vector<double>> translations;
  translations.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i)
    translations.push_back(compose_word<double>(ifs, Word::from_index(i, l, k)).offset);
  return AffineIFS::make_floating(power(ifs.linear(), k), std::move(translations));
}

}  // namespace fp
