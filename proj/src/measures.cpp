#include "fractal_pressure/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "cell_values.hpp"
#include "grid_frame.hpp"

namespace fp {

BernoulliMeasure::BernoulliMeasure(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw Error(ErrorCode::invalid_argument, "a Bernoulli measure needs at least one weight");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::invalid_argument, "weights must be finite and >= 0");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw Error(ErrorCode::invalid_argument, "weights must sum to 1");
}

BernoulliMeasure BernoulliMeasure::uniform(std::size_t symbols) {
  return BernoulliMeasure(std::vector<double>(symbols, 1.0 / static_cast<double>(symbols)));
}

double BernoulliMeasure::cylinder_weight(const Word& u) const {
  double w = 1.0;
  for (std::size_t i = 0; i < u.depth(); ++i) {
    if (u[i] >= weights_.size()) throw Error(ErrorCode::invalid_word, "symbol out of range in word " + u.to_string());
    w *= weights_[u[i]];
  }
  return w;
}

BernoulliMeasure BernoulliMeasure::power(unsigned k) const {
  if (k == 0) throw Error(ErrorCode::invalid_argument, "power needs k >= 1");
  require_within_cap(weights_.size(), k, kDefaultWordCap);
  const std::uint64_t count = word_count(weights_.size(), k);
  std::vector<double> out(count);
  for (std::uint64_t i = 0; i < count; ++i) out[i] = cylinder_weight(Word::from_index(i, weights_.size(), k));
  BernoulliMeasure m(std::vector<double>{1.0});
  m.weights_ = std::move(out);
  return m;
}

double classical_entropy(const BernoulliMeasure& p) {
  double h = 0.0;
  for (double w : p.weights())
    if (w > 0.0) h -= w * std::log(w);
  return h;
}

std::vector<double> gibbs_weights(std::span<const double> a) {
  const double z = log_sum_exp(a);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::exp(a[i] - z);
  return out;
}

LogSumCheck log_sum_check(std::span<const double> p, std::span<const double> a) {
  if (p.size() != a.size() || p.empty())
    throw Error(ErrorCode::invalid_argument, "p and a must be non-empty and of equal length");
  double total = 0.0;
  for (double w : p) {
    if (!(w >= 0.0)) throw Error(ErrorCode::invalid_argument, "p must be non-negative");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw Error(ErrorCode::invalid_argument, "p must sum to 1");
  LogSumCheck out;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) out.lhs += p[i] * (a[i] - std::log(p[i]));
  out.rhs = log_sum_exp(a);
  out.gibbs = gibbs_weights(a);
  if (out.lhs > out.rhs + 1e-12 * std::max(1.0, std::fabs(out.rhs)))
    throw Error(ErrorCode::internal, "log-sum inequality violated numerically");
  return out;
}

namespace {

using detail::GridFrame;
using detail::KeyRange;

void require_measure(const AffineIFS& ifs, const BernoulliMeasure& p, unsigned depth,
                     const EnumerationOptions& options) {
  if (p.size() != ifs.symbol_count())
    throw Error(ErrorCode::invalid_argument, "measure has " + std::to_string(p.size()) + " weights but the system has " +
                                                 std::to_string(ifs.symbol_count()) + " maps");
  if (depth == 0) throw Error(ErrorCode::invalid_argument, "depth must be at least 1");
  require_within_cap(ifs.symbol_count(), depth, options.word_cap);
}

template <class T>
struct MassContext {
  Matrix<T> fixed;  // g ↦ A⁻ⁿ(fixed point)
  KeyRange range;
};

template <class T>
struct MassVisitor {
  const MassContext<T>* ctx;
  LatticeTable<double> mass;
  double boundary = 0.0;
  Vector<T> x{};
  std::vector<std::int64_t> scratch{};

  void visit(unsigned, const Vector<T>& g, double w) {
    multiply_into(ctx->fixed, g, x);
    bool edge = false;
    for (const auto& v : x) edge = edge || on_integer(v);
    if (edge) boundary += w;
    detail::point_key(x, ctx->range, scratch);
    mass.upsert(scratch, w, [](double& into, double add) { into += add; });
  }
};

template <class T>
EntropyEstimate entropy_impl(const AffineIFS& ifs, const BernoulliMeasure& p, unsigned n,
                             const EnumerationOptions& options) {
  GridFrame<T> frame(ifs, n);
  MassContext<T> ctx{frame.fixed_point_matrix(n, n), frame.key_range(n)};
  const std::size_t d = ifs.dimension();
  auto visitors = detail::walk_lattice<T, MassVisitor<T>>(frame, n, std::uint64_t{1} << n, &p.weights(), options,
                                                           [&] { return MassVisitor<T>{&ctx, LatticeTable<double>(d)}; });
  LatticeTable<double> mass(d);
  EntropyEstimate e;
  for (const auto& v : visitors) {
    mass.merge_from(v.mass, [](double& into, double add) { into += add; });
    e.boundary_mass += v.boundary;
  }
  double h = 0.0;
  for (const auto& entry : mass.sorted_entries())
    if (entry.value > 0.0) {
      h -= entry.value * std::log(entry.value);
      ++e.cells;
    }
  e.depth = n;
  e.value = h / n;
  e.h_classical = classical_entropy(p);
  e.boundary_warning = e.boundary_mass > 0.01;
  return e;
}

template <class T>
struct IntegralVisitor {
  const Matrix<double>* to_point;  // g ↦ fixed point
  const Potential* f;
  double sum = 0.0;
  Vector<double> gd{}, x{};

  void visit(unsigned, const Vector<T>& g, double w) {
    gd.resize(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) gd[j] = to_double(g[j]);
    multiply_into(*to_point, gd, x);
    sum += w * (*f)(x);
  }
};

template <class T>
double integral_impl(const AffineIFS& ifs, const BernoulliMeasure& p, const Potential& f, unsigned n,
                     const EnumerationOptions& options) {
  GridFrame<T> frame(ifs, n);
  const Matrix<T> an = power(frame.linear(), n);
  const Matrix<double> to_point = to_double(solve(Matrix<T>::identity(ifs.dimension()) - an, an));
  auto visitors = detail::walk_lattice<T, IntegralVisitor<T>>(frame, n, std::uint64_t{1} << n, &p.weights(), options,
                                                               [&] { return IntegralVisitor<T>{&to_point, &f}; });
  double total = 0.0;
  for (const auto& v : visitors) total += v.sum;
  return total;
}

}  // namespace

EntropyEstimate projection_entropy_estimate(const AffineIFS& ifs, const BernoulliMeasure& p, unsigned depth,
                                            const EnumerationOptions& options) {
  require_measure(ifs, p, depth, options);
  if (ifs.exact()) return entropy_impl<Rational>(ifs, p, depth, options);
  return entropy_impl<double>(ifs, p, depth, options);
}

IntegralEstimate integral_estimate(const AffineIFS& ifs, const BernoulliMeasure& p, const Potential& f,
                                   unsigned depth, const EnumerationOptions& options) {
  require_measure(ifs, p, depth, options);
  IntegralEstimate out;
  if (f.constant_value()) {
    out.value = out.low = out.high = *f.constant_value();
    return out;
  }
  check_lipschitz(f, ifs);
  out.value = ifs.exact() ? integral_impl<Rational>(ifs, p, f, depth, options)
                          : integral_impl<double>(ifs, p, f, depth, options);
  const double error = f.lipschitz() * std::pow(ifs.ratio(), depth) * ifs.bounds().diameter;
  out.low = out.value - error;
  out.high = out.value + error;
  return out;
}

VariationalGap variational_gap(const AffineIFS& ifs, const BernoulliMeasure& p, const Potential& f, unsigned depth,
                               const EnumerationOptions& options) {
  VariationalGap g;
  g.upper = pressure_bracket(ifs, f, depth, options).high;
  g.entropy = projection_entropy_estimate(ifs, p, depth, options).value;
  g.integral_low = integral_estimate(ifs, p, f, depth, options).low;
  g.gap = g.upper - (g.entropy + g.integral_low);
  return g;
}

namespace {

template <class T>
struct CandidateAcc {
  const Matrix<T>* to_grid;   // A⁻ⁿ
  const Matrix<T>* to_point;  // g ↦ A⁻ⁿ(fixed point)
  const KeyRange* range;
  const Box<T>* box;
  detail::CellTable cells;
  detail::CellBest overall{};
  Vector<T> g{}, x{};
  std::vector<std::int64_t> key{};

  void leaf(const detail::WordPath<T>& path) {
    const double high = path.high[path.depth];
    const double low = path.floor[path.depth];
    overall.offer(high, path.index, low);
    multiply_into(*to_grid, path.t[path.depth], g);
    multiply_into(*to_point, g, x);
    detail::point_key(x, *range, key);
    for (std::size_t j = 0; j < g.size(); ++j) {
      const T lo = g[j] + box->lo[j];
      const T hi = g[j] + box->hi[j];
      if (lo < T(key[j] - 1) || hi > T(key[j] + 2)) return;
    }
    cells.upsert(key, detail::CellBest{high, path.index, low}, detail::CellBest::merge);
  }
};

struct Candidate {
  std::vector<std::int64_t> key;
  detail::CellBest best;
};

template <class T>
bool disjoint(const Box<T>& a, const Box<T>& b) {
  for (std::size_t j = 0; j < a.lo.size(); ++j)
    if (a.hi[j] < b.lo[j] || b.hi[j] < a.lo[j]) return true;
  return false;
}

template <class T>
SeparatedFamily family_impl(const AffineIFS& ifs, const Potential& f, unsigned n, const EnumerationOptions& options) {
  const std::size_t d = ifs.dimension();
  const std::size_t l = ifs.symbol_count();
  GridFrame<T> frame(ifs, n);
  const KeyRange range = frame.key_range(n);
  const Matrix<T> inv_n = power(frame.inverse(), n);
  const Matrix<T> to_point = frame.fixed_point_matrix(n, n);
  const Box<T>& box = frame.box();

  detail::WordEngine<T> engine(ifs, n, &f);
  auto accs = engine.template run<CandidateAcc<T>>(
      options, [&] { return CandidateAcc<T>{&inv_n, &to_point, &range, &box, detail::CellTable(d)}; });
  detail::CellTable cells(d);
  detail::CellBest overall;
  for (const auto& a : accs) {
    cells.merge_from(a.cells, detail::CellBest::merge);
    detail::CellBest::merge(overall, a.overall);
  }

  std::vector<Candidate> candidates;
  for (auto& e : cells.sorted_entries()) candidates.push_back({std::move(e.key), e.value});
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.best.value > b.best.value; });

  SeparatedFamily fam;
  fam.depth = n;
  fam.candidates = candidates.size();

  std::vector<Candidate> chosen;
  if (candidates.empty()) {
    Vector<T> g = inv_n * compose_word<T>(ifs, Word::from_index(overall.word, l, n)).offset;
    Vector<T> x = to_point * g;
    std::vector<std::int64_t> key;
    detail::point_key(x, range, key);
    chosen.push_back({key, overall});
  } else {
    LatticeKeySet blocked(d);
    std::vector<std::int64_t> near(d);
    for (const auto& c : candidates) {
      if (blocked.contains(c.key)) continue;
      chosen.push_back(c);
      // Block the Chebyshev-radius-1 neighborhood.
      std::size_t total = 1;
      for (std::size_t j = 0; j < d; ++j) total *= 3;
      for (std::size_t code = 0; code < total; ++code) {
        std::size_t rest = code;
        for (std::size_t j = 0; j < d; ++j) {
          near[j] = c.key[j] + static_cast<std::int64_t>(rest % 3) - 1;
          rest /= 3;
        }
        blocked.insert(near);
      }
    }
  }

  // Closed enclosures of kept words must be pairwise disjoint. Boxes that
  // meet share a unit cell of the grid frame, so only bucket-mates are
  // compared.
  std::map<std::vector<std::int64_t>, std::vector<std::size_t>> buckets;
  std::vector<Box<T>> kept_boxes;
  std::vector<double> highs;
  for (const auto& c : chosen) {
    const Word u = Word::from_index(c.best.word, l, n);
    const Vector<T> g = inv_n * compose_word<T>(ifs, u).offset;
    Box<T> b{Vector<T>(d), Vector<T>(d)};
    std::vector<std::int64_t> lo(d), hi(d);
    for (std::size_t j = 0; j < d; ++j) {
      b.lo[j] = g[j] + box.lo[j];
      b.hi[j] = g[j] + box.hi[j];
      lo[j] = floor_key(b.lo[j]);
      hi[j] = floor_key(b.hi[j]);
    }
    std::vector<std::vector<std::int64_t>> touched;
    std::vector<std::int64_t> cell = lo;
    bool clash = false;
    while (true) {
      for (std::size_t other : buckets[cell])
        if (!disjoint(b, kept_boxes[other])) clash = true;
      touched.push_back(cell);
      std::size_t j = 0;
      while (j < d && cell[j] == hi[j]) {
        cell[j] = lo[j];
        ++j;
      }
      if (j == d) break;
      ++cell[j];
    }
    if (clash) {
      ++fam.dropped;
      continue;
    }
    for (const auto& t : touched) buckets[t].push_back(kept_boxes.size());
    kept_boxes.push_back(std::move(b));
    fam.words.push_back(u);
    fam.cells.push_back(GridKey{n, c.key});
    fam.high.push_back(c.best.value);
    fam.low.push_back(c.best.extra);
    highs.push_back(c.best.value);
  }

  fam.weights = gibbs_weights(highs);
  double h = 0.0, integral = 0.0;
  for (std::size_t i = 0; i < fam.weights.size(); ++i) {
    const double w = fam.weights[i];
    if (w > 0.0) h -= w * std::log(w);
    integral += w * fam.low[i];
  }
  fam.certified_lower = (h + integral) / n;

  const detail::CellTable outer = detail::upper_cells(ifs, f, n, options);
  std::vector<double> all, selected;
  for (const auto& e : outer.sorted_entries()) all.push_back(e.value.value);
  for (const auto& key : fam.cells) {
    const detail::CellBest* v = outer.find(key.alpha);
    if (v == nullptr) throw Error(ErrorCode::internal, "selected cell missing from the outer cover");
    selected.push_back(v->value);
  }
  fam.packing_efficiency = std::exp(log_sum_exp(selected) - log_sum_exp(all));
  return fam;
}

}  // namespace

SeparatedFamily separated_family(const AffineIFS& ifs, const Potential& f, unsigned depth,
                                 const EnumerationOptions& options) {
  if (depth == 0) throw Error(ErrorCode::invalid_argument, "depth must be at least 1");
  require_within_cap(ifs.symbol_count(), depth, options.word_cap);
  check_lipschitz(f, ifs);
  if (ifs.exact()) return family_impl<Rational>(ifs, f, depth, options);
  return family_impl<double>(ifs, f, depth, options);
}

double packing_efficiency(const AffineIFS& ifs, const Potential& f, unsigned depth, const EnumerationOptions& options) {
  return separated_family(ifs, f, depth, options).packing_efficiency;
}

std::string entropy_estimate_json(const EntropyEstimate& e) {
  nlohmann::ordered_json j;
  j["depth"] = e.depth;
  j["value"] = e.value;
  j["h_classical"] = e.h_classical;
  j["cells"] = e.cells;
  j["boundary_mass"] = e.boundary_mass;
  j["boundary_warning"] = e.boundary_warning;
  return j.dump();
}

std::string separated_family_json(const SeparatedFamily& fam) {
  nlohmann::ordered_json j;
  j["depth"] = fam.depth;
  j["size"] = fam.words.size();
  j["candidates"] = fam.candidates;
  j["dropped"] = fam.dropped;
  j["certified_lower"] = fam.certified_lower;
  j["packing_efficiency"] = fam.packing_efficiency;
  nlohmann::ordered_json words = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < fam.words.size(); ++i) {
    nlohmann::ordered_json w;
    w["word"] = fam.words[i].to_string();
    w["cell"] = fam.cells[i].alpha;
    w["weight"] = fam.weights[i];
    w["high"] = fam.high[i];
    w["low"] = fam.low[i];
    words.push_back(std::move(w));
  }
  j["words"] = std::move(words);
  return j.dump();
}

}  // namespace fp
