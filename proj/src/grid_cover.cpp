#include "fractal_pressure/grid_cover.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "grid_frame.hpp"

namespace fp {
namespace detail {

void check_conditioning(const AffineIFS& ifs, unsigned depth) {
  if (ifs.exact() || ifs.conformal() || depth == 0) return;
  const double cond = condition_number(power(ifs.linear(), depth));
  if (!(cond <= kConditioningCap)) {
    std::ostringstream msg;
    msg << "cond(A^" << depth << ") = " << cond << " exceeds " << kConditioningCap
        << " in floating mode; rerun with an exact (rational) configuration";
    throw Error(ErrorCode::numeric, msg.str());
  }
}

}  // namespace detail

namespace {

using detail::GridFrame;
using detail::KeyRange;

template <class T>
struct CoverContext {
  const GridFrame<T>* frame;
  KeyRange range;
  Matrix<T> fixed;
  unsigned depth;
  unsigned fixed_depth;
  bool want_outer;
  bool want_inner;
};

template <class T>
class CoverVisitor {
 public:
  explicit CoverVisitor(const CoverContext<T>* ctx)
      : ctx_(ctx), outer(ctx->frame->dimension()), inner(ctx->frame->dimension()), zero_(0) {}

  void visit(unsigned level, const Vector<T>& g, double) {
    if (ctx_->want_outer && level == ctx_->depth)
      detail::for_each_enclosure_key(*ctx_->frame, ctx_->range, g, zero_, scratch_,
                                     [&](std::span<const std::int64_t> key) { outer.insert(key); });
    if (ctx_->want_inner && level == ctx_->fixed_depth) {
      multiply_into(ctx_->fixed, g, point_);
      detail::point_key(point_, ctx_->range, scratch_);
      inner.insert(scratch_);
    }
  }

  const CoverContext<T>* ctx_;
  LatticeKeySet outer;
  LatticeKeySet inner;

 private:
  T zero_;
  Vector<T> point_;
  std::vector<std::int64_t> scratch_;
};

std::vector<GridKey> to_keys(const LatticeKeySet& set, unsigned depth) {
  std::vector<GridKey> out;
  for (auto& e : set.sorted_entries()) out.push_back(GridKey{depth, std::move(e.key)});
  return out;
}

template <class T>
CoverBounds compute_cover(const AffineIFS& ifs, unsigned depth, unsigned refine, bool want_outer, bool want_inner,
                          const EnumerationOptions& options) {
  // The empty word has no fixed point, so depth-0 witnesses come from depth-1 words.
  const unsigned fixed_depth = std::max(depth + refine, 1U);
  require_within_cap(ifs.symbol_count(), depth, options.word_cap);
  if (want_inner) require_within_cap(ifs.symbol_count(), fixed_depth, options.word_cap);
  const unsigned max_level = want_inner ? fixed_depth : depth;

  GridFrame<T> frame(ifs, max_level);
  CoverContext<T> ctx{&frame, frame.key_range(depth), Matrix<T>(), depth, fixed_depth, want_outer, want_inner};
  if (want_inner) ctx.fixed = frame.fixed_point_matrix(depth, fixed_depth);

  std::uint64_t mask = 0;
  if (want_outer) mask |= std::uint64_t{1} << depth;
  if (want_inner) mask |= std::uint64_t{1} << fixed_depth;

  auto visitors = detail::walk_lattice<T, CoverVisitor<T>>(
      frame, max_level, mask, nullptr, options, [&ctx] { return CoverVisitor<T>(&ctx); });

  LatticeKeySet outer(ifs.dimension()), inner(ifs.dimension());
  auto keep = [](NoValue&, const NoValue&) {};
  for (const auto& v : visitors) {
    outer.merge_from(v.outer, keep);
    inner.merge_from(v.inner, keep);
  }

  CoverBounds cover;
  cover.dimension = ifs.dimension();
  cover.depth = depth;
  cover.refine = refine;
  cover.outer_keys = to_keys(outer, depth);
  cover.inner_keys = to_keys(inner, depth);
  if (want_outer && want_inner) {
    for (const auto& key : cover.inner_keys)
      if (!outer.contains(key.alpha))
        throw Error(ErrorCode::internal, "inner certificate outside the outer cover");
  }
  return cover;
}

CoverBounds dispatch_cover(const AffineIFS& ifs, unsigned depth, unsigned refine, bool want_outer, bool want_inner,
                           const EnumerationOptions& options) {
  if (ifs.exact()) return compute_cover<Rational>(ifs, depth, refine, want_outer, want_inner, options);
  return compute_cover<double>(ifs, depth, refine, want_outer, want_inner, options);
}

template <class T>
std::vector<GridKey> cell_range_impl(const AffineIFS& ifs, const Word& u, double inflate) {
  const unsigned depth = static_cast<unsigned>(u.depth());
  GridFrame<T> frame(ifs, depth);
  Vector<T> g(ifs.dimension(), T(0)), next;
  for (std::size_t i = 0; i < u.depth(); ++i) {
    if (u[i] >= ifs.symbol_count()) throw Error(ErrorCode::invalid_word, "symbol out of range in word " + u.to_string());
    frame.child(g, u[i], next);
    std::swap(g, next);
  }
  T grow;
  if constexpr (std::is_same_v<T, double>) grow = inflate;
  else grow = exact_rational(inflate);

  LatticeKeySet keys(ifs.dimension(), 0);
  std::vector<std::int64_t> scratch;
  detail::for_each_enclosure_key(frame, frame.key_range(depth), g, grow, scratch,
                                 [&](std::span<const std::int64_t> key) { keys.insert(key); });
  return to_keys(keys, depth);
}

}  // namespace

template <class T>
GridKey grid_key_of_point(const AffineIFS& ifs, const Vector<T>& x, unsigned depth) {
  if (x.size() != ifs.dimension()) throw Error(ErrorCode::invalid_argument, "point dimension does not match the IFS");
  if constexpr (std::is_same_v<T, Rational>) {
    if (!ifs.exact()) throw Error(ErrorCode::invalid_argument, "rational points need an exact IFS");
  } else {
    detail::check_conditioning(ifs, depth);
  }
  const Vector<T> y = power(ifs.inverse_linear_as<T>(), depth) * x;
  GridKey key{depth, std::vector<std::int64_t>(y.size())};
  for (std::size_t j = 0; j < y.size(); ++j) key.alpha[j] = floor_key(y[j]);
  return key;
}

template GridKey grid_key_of_point<double>(const AffineIFS&, const Vector<double>&, unsigned);
template GridKey grid_key_of_point<Rational>(const AffineIFS&, const Vector<Rational>&, unsigned);

std::vector<GridKey> cylinder_cell_range(const AffineIFS& ifs, const Word& u, double inflate) {
  if (!(inflate >= 0.0) || !std::isfinite(inflate))
    throw Error(ErrorCode::invalid_argument, "inflate must be a finite non-negative number");
  if (ifs.exact()) return cell_range_impl<Rational>(ifs, u, inflate);
  return cell_range_impl<double>(ifs, u, inflate);
}

std::vector<GridKey> outer_cover(const AffineIFS& ifs, unsigned depth, const EnumerationOptions& options) {
  return dispatch_cover(ifs, depth, 0, true, false, options).outer_keys;
}

std::vector<GridKey> inner_cover(const AffineIFS& ifs, unsigned depth, unsigned refine,
                                 const EnumerationOptions& options) {
  return dispatch_cover(ifs, depth, refine, false, true, options).inner_keys;
}

CoverBounds cover_bounds(const AffineIFS& ifs, unsigned depth, unsigned refine, const EnumerationOptions& options) {
  return dispatch_cover(ifs, depth, refine, true, true, options);
}

std::string cover_csv(const CoverBounds& cover) {
  std::ostringstream out;
  out << kCsvVersionLine << '\n' << "depth";
  for (std::size_t j = 0; j < cover.dimension; ++j) out << ",alpha_" << (j + 1);
  out << ",certificate\n";
  auto inner = cover.inner_keys.begin();
  for (const auto& key : cover.outer_keys) {
    while (inner != cover.inner_keys.end() && *inner < key) ++inner;
    const bool certified = inner != cover.inner_keys.end() && *inner == key;
    out << key.depth;
    for (auto a : key.alpha) out << ',' << a;
    out << ',' << (certified ? "inner" : "outer-only") << '\n';
  }
  return out.str();
}

std::string cover_counts_json(const CoverBounds& cover) {
  nlohmann::ordered_json j;
  j["depth"] = cover.depth;
  j["n_minus"] = cover.n_minus();
  j["n_plus"] = cover.n_plus();
  return j.dump();
}

}  // namespace fp
