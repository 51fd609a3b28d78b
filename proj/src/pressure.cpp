#include "fractal_pressure/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cell_values.hpp"
#include "grid_frame.hpp"

namespace fp {

namespace {

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

Potential Potential::constant(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::potential_rejected, "constant potential must be finite");
  Potential p;
  p.fn_ = [value](std::span<const double>) { return value; };
  p.constant_ = value;
  p.description_ = "const:" + format_number(value);
  return p;
}

Potential Potential::linear(std::vector<double> coeffs, double intercept, double lipschitz) {
  double norm = 0.0;
  for (double a : coeffs) {
    if (!std::isfinite(a)) throw Error(ErrorCode::potential_rejected, "linear coefficients must be finite");
    norm += a * a;
  }
  norm = std::sqrt(norm);
  if (!std::isfinite(intercept) || !std::isfinite(lipschitz) || lipschitz < 0.0)
    throw Error(ErrorCode::potential_rejected, "intercept and Lipschitz constant must be finite, L >= 0");
  if (lipschitz < norm * (1.0 - 1e-12))
    throw Error(ErrorCode::potential_rejected,
                "declared Lipschitz constant " + format_number(lipschitz) + " is below |coeffs| = " + format_number(norm));
  bool all_zero = norm == 0.0;
  Potential p;
  std::ostringstream desc;
  desc << "linear:";
  for (std::size_t i = 0; i < coeffs.size(); ++i) desc << (i ? "," : "") << format_number(coeffs[i]);
  desc << ':' << format_number(intercept) << ':' << format_number(lipschitz);
  p.description_ = desc.str();
  p.lipschitz_ = lipschitz;
  if (all_zero) p.constant_ = intercept;
  p.fn_ = [coeffs = std::move(coeffs), intercept](std::span<const double> x) {
    if (x.size() != coeffs.size())
      throw Error(ErrorCode::potential_rejected, "linear potential dimension does not match the point");
    double s = intercept;
    for (std::size_t i = 0; i < x.size(); ++i) s += coeffs[i] * x[i];
    return s;
  };
  return p;
}

Potential Potential::custom(Function f, double lipschitz, std::string description) {
  if (!f) throw Error(ErrorCode::potential_rejected, "custom potential needs a function");
  if (!std::isfinite(lipschitz) || lipschitz < 0.0)
    throw Error(ErrorCode::potential_rejected, "Lipschitz constant must be finite and non-negative");
  Potential p;
  p.fn_ = std::move(f);
  p.lipschitz_ = lipschitz;
  p.description_ = std::move(description);
  return p;
}

Potential Potential::shifted(double c) const {
  Potential p = *this;
  p.fn_ = [inner = fn_, c](std::span<const double> x) { return inner(x) + c; };
  if (constant_) p.constant_ = *constant_ + c;
  p.description_ = description_ + "+" + format_number(c);
  if (constant_) p.description_ = "const:" + format_number(*p.constant_);
  return p;
}

void check_lipschitz(const Potential& f, const AffineIFS& ifs, unsigned samples, std::uint64_t seed) {
  if (f.constant_value()) return;
  const auto& box = ifs.bounds().box;
  const std::size_t d = ifs.dimension();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector<double> x(d), y(d);
  for (unsigned s = 0; s < samples; ++s) {
    double dist = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = box.lo[j] + unit(rng) * (box.hi[j] - box.lo[j]);
      y[j] = box.lo[j] + unit(rng) * (box.hi[j] - box.lo[j]);
      dist += (x[j] - y[j]) * (x[j] - y[j]);
    }
    dist = std::sqrt(dist);
    const double fx = f(x), fy = f(y);
    if (!std::isfinite(fx) || !std::isfinite(fy))
      throw Error(ErrorCode::potential_rejected, "potential is not finite on the attractor box");
    if (std::fabs(fx - fy) > f.lipschitz() * dist * (1.0 + 1e-9) + 1e-12)
      throw Error(ErrorCode::potential_rejected, "potential violates its declared Lipschitz constant " +
                                                     format_number(f.lipschitz()) + " on the attractor box");
  }
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::invalid_argument, "log_sum_exp of an empty list");
  const double m = *std::max_element(values.begin(), values.end());
  if (values.size() == 1 || std::isinf(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

BirkhoffBracket birkhoff_bounds(const AffineIFS& ifs, const Potential& f, const Word& u) {
  const unsigned n = static_cast<unsigned>(u.depth());
  if (n == 0) throw Error(ErrorCode::invalid_argument, "Birkhoff bounds need a word of depth at least 1");
  for (std::size_t i = 0; i < n; ++i)
    if (u[i] >= ifs.symbol_count()) throw Error(ErrorCode::invalid_word, "symbol out of range in word " + u.to_string());
  BirkhoffBracket out{u, 0.0, 0.0};
  if (f.constant_value()) {
    out.low = out.high = n * *f.constant_value();
    return out;
  }
  detail::WordEngine<double> engine(ifs, n, &f);
  const auto& a = ifs.linear();
  Vector<double> t(ifs.dimension(), 0.0), scratch;
  for (unsigned j = 1; j <= n; ++j) {
    t = a * t;
    const auto& c = ifs.translations()[u[n - j]];
    for (std::size_t k = 0; k < t.size(); ++k) t[k] += c[k];
    out.high += engine.suffix_bound(t, j, scratch);
  }
  std::vector<std::uint32_t> rotated(u.symbols());
  for (unsigned k = 0; k < n; ++k) {
    out.low += f(fixed_point(compose_word<double>(ifs, Word(rotated))));
    std::rotate(rotated.begin(), rotated.begin() + 1, rotated.end());
  }
  return out;
}

namespace detail {

PressureBracket constant_bracket(std::size_t n_minus, std::size_t n_plus, unsigned depth, unsigned refine,
                                 double c) {
  PressureBracket b;
  b.depth = depth;
  b.refine = refine;
  b.low = std::log(static_cast<double>(n_minus)) / depth + c;
  b.high = std::log(static_cast<double>(n_plus)) / depth + c;
  b.box_count_used = n_plus;
  b.inner_count = n_minus;
  return b;
}

}  // namespace detail

namespace {

using detail::CellTable;

double table_log_sum(const CellTable& table) {
  std::vector<double> values;
  for (const auto& e : table.sorted_entries()) values.push_back(e.value.value);
  return log_sum_exp(values);
}

template <class T>
struct UpperPass {
  const detail::GridFrame<T>* frame;
  const detail::KeyRange* range;
  const Matrix<T>* to_grid;  // A⁻ⁿ
  CellTable cells;
  Vector<T> g;
  std::vector<std::int64_t> scratch;
  T zero{0};

  void leaf(const detail::WordPath<T>& path) {
    multiply_into(*to_grid, path.t[path.depth], g);
    const detail::CellBest best{path.high[path.depth], path.index, path.floor[path.depth]};
    detail::for_each_enclosure_key(*frame, *range, g, zero, scratch, [&](std::span<const std::int64_t> key) {
      cells.upsert(key, best, detail::CellBest::merge);
    });
  }
};

template <class T>
struct LowerPass {
  const detail::KeyRange* range;
  const Matrix<T>* to_key;            // A⁻ⁿ(I − A^m)⁻¹
  const std::vector<Matrix<double>>* rotation;  // (I − A^m)⁻¹ A^j
  const Potential* f;
  unsigned depth;
  CellTable cells;
  Vector<T> x;
  Vector<double> p, shift;
  std::vector<std::int64_t> scratch;

  void leaf(const detail::WordPath<T>& path) {
    const unsigned m = path.depth;
    multiply_into(*to_key, path.t[m], x);
    detail::point_key(x, *range, scratch);
    double value = 0.0;
    for (unsigned k = 0; k < depth; ++k) {
      multiply_into((*rotation)[m - k], path.td[m], shift);
      p = path.td[m - k];
      for (std::size_t j = 0; j < p.size(); ++j) p[j] += shift[j];
      value += (*f)(p);
    }
    cells.upsert(scratch, detail::CellBest{value, path.index}, detail::CellBest::merge);
  }
};

template <class T>
CellTable upper_cells_impl(const AffineIFS& ifs, const Potential& f, unsigned n, const EnumerationOptions& options) {
  const std::size_t d = ifs.dimension();
  detail::GridFrame<T> frame(ifs, n);
  const detail::KeyRange range = frame.key_range(n);
  const Matrix<T> inv_n = power(frame.inverse(), n);
  detail::WordEngine<T> engine(ifs, n, &f);
  auto uppers = engine.template run<UpperPass<T>>(
      options, [&] { return UpperPass<T>{&frame, &range, &inv_n, CellTable(d), {}, {}}; });
  CellTable outer(d);
  for (const auto& u : uppers) outer.merge_from(u.cells, detail::CellBest::merge);
  return outer;
}

template <class T>
PressureBracket word_bracket(const AffineIFS& ifs, const Potential& f, unsigned n, const EnumerationOptions& options) {
  const unsigned m = n + options.refine;
  const std::size_t d = ifs.dimension();
  const CellTable outer = upper_cells_impl<T>(ifs, f, n, options);
  detail::GridFrame<T> frame(ifs, m);
  const detail::KeyRange range = frame.key_range(n);
  const Matrix<T> inv_n = power(frame.inverse(), n);

  const Matrix<T> am = power(frame.linear(), m);
  const Matrix<T> to_key = inv_n * inverse(Matrix<T>::identity(d) - am);
  const Matrix<double> resolvent = inverse(Matrix<double>::identity(d) - to_double(am));
  std::vector<Matrix<double>> rotation(m + 1);
  Matrix<double> aj = Matrix<double>::identity(d);
  for (unsigned j = 0; j <= m; ++j) {
    rotation[j] = resolvent * aj;
    aj = ifs.linear() * aj;
  }
  detail::WordEngine<T> lower_engine(ifs, m, nullptr);
  auto lowers = lower_engine.template run<LowerPass<T>>(options, [&] {
    return LowerPass<T>{&range, &to_key, &rotation, &f, n, CellTable(d), {}, {}, {}, {}};
  });
  CellTable inner(d);
  for (const auto& l : lowers) inner.merge_from(l.cells, detail::CellBest::merge);

  PressureBracket b;
  b.depth = n;
  b.refine = options.refine;
  b.high = table_log_sum(outer) / n;
  b.low = table_log_sum(inner) / n;
  b.box_count_used = outer.size();
  b.inner_count = inner.size();
  return b;
}

}  // namespace

detail::CellTable detail::upper_cells(const AffineIFS& ifs, const Potential& f, unsigned depth,
                                      const EnumerationOptions& options) {
  if (ifs.exact()) return upper_cells_impl<Rational>(ifs, f, depth, options);
  return upper_cells_impl<double>(ifs, f, depth, options);
}

PressureBracket pressure_bracket(const AffineIFS& ifs, const Potential& f, unsigned depth,
                                 const EnumerationOptions& options) {
  if (depth == 0) throw Error(ErrorCode::invalid_argument, "pressure needs depth at least 1");
  require_within_cap(ifs.symbol_count(), depth + options.refine, options.word_cap);
  PressureBracket b;
  if (f.constant_value()) {
    const CoverBounds cover = cover_bounds(ifs, depth, options.refine, options);
    b = detail::constant_bracket(cover.n_minus(), cover.n_plus(), depth, options.refine, *f.constant_value());
  } else {
    check_lipschitz(f, ifs);
    b = ifs.exact() ? word_bracket<Rational>(ifs, f, depth, options) : word_bracket<double>(ifs, f, depth, options);
  }
  b.potential = f.description();
  return b;
}

namespace {

double outward_down(double x) {
  for (int i = 0; i < 4; ++i) x = std::nextafter(x, -INFINITY);
  return x;
}

double outward_up(double x) {
  for (int i = 0; i < 4; ++i) x = std::nextafter(x, INFINITY);
  return x;
}

DimensionReport exponent_report(const AffineIFS& ifs, unsigned first, unsigned last, const EnumerationOptions& options,
                                std::vector<CoverBounds>* covers) {
  if (first == 0 || last < first + 2)
    throw Error(ErrorCode::invalid_argument, "exponent estimates need at least three depths starting at 1 or more");
  require_within_cap(ifs.symbol_count(), last + options.refine, options.word_cap);
  DimensionReport report;
  report.r = ifs.ratio();
  report.conformal = ifs.conformal();
  report.dimension = ifs.conformal();
  report.refine = options.refine;
  const double scale = report.dimension ? -std::log(report.r) : 1.0;

  for (unsigned n = first; n <= last; ++n) {
    CoverBounds cover = cover_bounds(ifs, n, options.refine, options);
    DepthExponent e;
    e.depth = n;
    e.n_minus = cover.n_minus();
    e.n_plus = cover.n_plus();
    e.ratio_lo = std::log(static_cast<double>(e.n_minus)) / (n * scale);
    e.ratio_hi = std::log(static_cast<double>(e.n_plus)) / (n * scale);
    if (!report.depths.empty()) {
      const auto& prev = report.depths.back();
      e.slope_lo = (std::log(static_cast<double>(e.n_minus)) - std::log(static_cast<double>(prev.n_minus))) / scale;
      e.slope_hi = (std::log(static_cast<double>(e.n_plus)) - std::log(static_cast<double>(prev.n_plus))) / scale;
    }
    report.depths.push_back(e);
    if (covers) covers->push_back(std::move(cover));
  }

  const auto& top = report.depths.back();
  report.estimate_lo = std::min(*top.slope_lo, *top.slope_hi);
  report.estimate_hi = std::max(*top.slope_lo, *top.slope_hi);
  report.estimate = 0.5 * (report.estimate_lo + report.estimate_hi);
  report.root_lo = outward_down(std::min(top.ratio_lo, report.estimate_lo));
  report.root_hi = outward_up(std::max(top.ratio_hi, report.estimate_hi));

  for (std::size_t i = 2; i < report.depths.size(); ++i) {
    const auto& a = report.depths[i - 1];
    const auto& b = report.depths[i];
    const double width_a = std::fabs(*a.slope_hi - *a.slope_lo);
    const double width_b = std::fabs(*b.slope_hi - *b.slope_lo);
    const double mid_a = 0.5 * (*a.slope_hi + *a.slope_lo);
    const double mid_b = 0.5 * (*b.slope_hi + *b.slope_lo);
    if (std::fabs(mid_b - mid_a) > width_a + width_b + 0.01) report.drift = true;
  }
  return report;
}

}  // namespace

DimensionReport box_exponent(const AffineIFS& ifs, unsigned first_depth, unsigned last_depth,
                             const EnumerationOptions& options) {
  return exponent_report(ifs, first_depth, last_depth, options, nullptr);
}

DimensionReport bowen_root(const AffineIFS& ifs, unsigned first_depth, unsigned last_depth,
                           const EnumerationOptions& options) {
  if (!ifs.conformal())
    throw Error(ErrorCode::non_conformal,
                "Bowen's equation needs a conformal linear part (A·Aᵀ = c·I); "
                "use the box exponent for a nats-per-step estimate instead");
  std::vector<CoverBounds> covers;
  DimensionReport report = exponent_report(ifs, first_depth, last_depth, options, &covers);

  const CoverBounds& cover = covers.back();
  const double log_r = std::log(report.r);
  auto midpoint = [&](double t) {
    const PressureBracket b = detail::constant_bracket(cover.n_minus(), cover.n_plus(), cover.depth, cover.refine,
                                                       t * log_r);
    return 0.5 * (b.low + b.high);
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 64 && midpoint(hi) > 0.0; ++i) hi *= 2.0;
  BisectionCheck check;
  while (hi - lo > 1e-9 && check.iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    if (midpoint(mid) > 0.0) lo = mid;
    else hi = mid;
    ++check.iterations;
  }
  check.root = 0.5 * (lo + hi);
  const auto& top = report.depths.back();
  const double closed = 0.5 * (top.ratio_lo + top.ratio_hi);
  check.agrees = hi - lo <= 1e-9 && std::fabs(check.root - closed) <= (top.ratio_hi - top.ratio_lo) + 1e-9;
  report.bisection = check;
  return report;
}

std::string dimension_report_json(const DimensionReport& report) {
  nlohmann::ordered_json j;
  j["r"] = report.r;
  j["conformal"] = report.conformal;
  j["units"] = report.dimension ? "dimension" : "nats_per_step";
  j["refine"] = report.refine;
  using Array = nlohmann::ordered_json;
  Array depths = Array::array(), n_minus = Array::array(), n_plus = Array::array();
  Array ratio_lo = Array::array(), ratio_hi = Array::array();
  Array slope_lo = Array::array(), slope_hi = Array::array(), slope = Array::array();
  for (const auto& e : report.depths) {
    depths.push_back(e.depth);
    n_minus.push_back(e.n_minus);
    n_plus.push_back(e.n_plus);
    ratio_lo.push_back(e.ratio_lo);
    ratio_hi.push_back(e.ratio_hi);
    if (e.slope_lo) {
      slope_lo.push_back(*e.slope_lo);
      slope_hi.push_back(*e.slope_hi);
      slope.push_back(0.5 * (*e.slope_lo + *e.slope_hi));
    } else {
      slope_lo.push_back(nullptr);
      slope_hi.push_back(nullptr);
      slope.push_back(nullptr);
    }
  }
  j["depths"] = std::move(depths);
  j["n_minus"] = std::move(n_minus);
  j["n_plus"] = std::move(n_plus);
  j["ratio_lo"] = std::move(ratio_lo);
  j["ratio_hi"] = std::move(ratio_hi);
  j["slope_lo"] = std::move(slope_lo);
  j["slope_hi"] = std::move(slope_hi);
  j["slope"] = std::move(slope);
  j["estimate"] = report.estimate;
  j["estimate_interval"] = {report.estimate_lo, report.estimate_hi};
  j["root_interval"] = {report.root_lo, report.root_hi};
  j["drift"] = report.drift;
  if (report.bisection) {
    j["bisection"] = {{"root", report.bisection->root},
                      {"iterations", report.bisection->iterations},
                      {"agrees", report.bisection->agrees}};
  }
  return j.dump();
}

std::string pressure_bracket_json(const PressureBracket& b) {
  nlohmann::ordered_json j;
  j["depth"] = b.depth;
  j["refine"] = b.refine;
  j["low"] = b.low;
  j["high"] = b.high;
  j["box_count_used"] = b.box_count_used;
  j["inner_count"] = b.inner_count;
  j["potential"] = b.potential;
  return j.dump();
}

}  // namespace fp
