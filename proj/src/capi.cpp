#include "fractal_pressure/fp.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "fractal_pressure/ifs_io.hpp"
#include "fractal_pressure/measures.hpp"

struct fp_ifs {
  fp::AffineIFS ifs;
};

struct fp_potential {
  fp::Potential f;
};

namespace {

thread_local std::string last_error;
thread_local unsigned last_max_depth = 0;

template <class Body>
fp_status guarded(Body&& body) {
  last_error.clear();
  last_max_depth = 0;
  try {
    body();
    return FP_OK;
  } catch (const fp::CapExceeded& e) {
    last_error = e.what();
    last_max_depth = e.max_feasible_depth();
    return FP_CAP_EXCEEDED;
  } catch (const fp::Error& e) {
    last_error = e.what();
    return static_cast<fp_status>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return FP_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return FP_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw fp::Error(fp::ErrorCode::invalid_argument, std::string(name) + " must not be null");
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void maybe_emit(char** json, const std::string& text) {
  if (json != nullptr) *json = duplicate(text);
}

fp::EnumerationOptions convert(const fp_options* options) {
  fp::EnumerationOptions o;
  if (options == nullptr) return o;
  if (options->word_cap == 0) throw fp::Error(fp::ErrorCode::invalid_argument, "word cap must be positive");
  o.word_cap = options->word_cap;
  o.threads = options->threads;
  o.refine = options->refine;
  return o;
}

void summarize(const fp::DimensionReport& r, fp_dimension_summary* s) {
  if (s == nullptr) return;
  s->conformal = r.conformal;
  s->r = r.r;
  s->estimate = r.estimate;
  s->estimate_lo = r.estimate_lo;
  s->estimate_hi = r.estimate_hi;
  s->root_lo = r.root_lo;
  s->root_hi = r.root_hi;
  s->drift = r.drift;
  s->converged = r.converged();
}

fp::BernoulliMeasure measure(const double* weights, std::size_t count) {
  require(weights, "weights");
  return fp::BernoulliMeasure(std::vector<double>(weights, weights + count));
}

}  // namespace

extern "C" {

const char* fp_version(void) { return "1.0.0"; }
const char* fp_last_error(void) { return last_error.c_str(); }
unsigned fp_last_max_depth(void) { return last_max_depth; }
void fp_string_free(char* s) { std::free(s); }

void fp_options_default(fp_options* options) {
  if (options == nullptr) return;
  const fp::EnumerationOptions o;
  options->word_cap = o.word_cap;
  options->threads = o.threads;
  options->refine = o.refine;
}

fp_status fp_ifs_from_json(const char* json, fp_ifs** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new fp_ifs{fp::ifs_from_json(json)};
  });
}

fp_status fp_ifs_preset(const char* name, const char* const* params, size_t count, fp_ifs** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    if (count > 0) require(params, "params");
    std::vector<std::string> values;
    for (size_t i = 0; i < count; ++i) {
      require(params[i], "parameter");
      values.emplace_back(params[i]);
    }
    *out = new fp_ifs{fp::make_preset(name, values)};
  });
}

fp_status fp_ifs_to_json(const fp_ifs* ifs, char** out) {
  return guarded([&] {
    require(ifs, "ifs");
    require(out, "out");
    *out = duplicate(fp::ifs_to_json(ifs->ifs));
  });
}

void fp_ifs_free(fp_ifs* ifs) { delete ifs; }
size_t fp_ifs_dimension(const fp_ifs* ifs) { return ifs ? ifs->ifs.dimension() : 0; }
size_t fp_ifs_symbols(const fp_ifs* ifs) { return ifs ? ifs->ifs.symbol_count() : 0; }
int fp_ifs_exact(const fp_ifs* ifs) { return ifs && ifs->ifs.exact(); }
int fp_ifs_conformal(const fp_ifs* ifs) { return ifs && ifs->ifs.conformal(); }
double fp_ifs_ratio(const fp_ifs* ifs) { return ifs ? ifs->ifs.ratio() : 0.0; }

fp_status fp_potential_parse(const char* spec, fp_potential** out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    *out = new fp_potential{fp::parse_potential(spec)};
  });
}

const char* fp_potential_description(const fp_potential* f) { return f ? f->f.description().c_str() : ""; }
void fp_potential_free(fp_potential* f) { delete f; }

fp_status fp_cover_counts(const fp_ifs* ifs, unsigned depth, const fp_options* options, size_t* n_minus,
                          size_t* n_plus) {
  return guarded([&] {
    require(ifs, "ifs");
    const auto opts = convert(options);
    const auto b = fp::cover_bounds(ifs->ifs, depth, opts.refine, opts);
    if (n_minus) *n_minus = b.n_minus();
    if (n_plus) *n_plus = b.n_plus();
  });
}

fp_status fp_cover_csv(const fp_ifs* ifs, unsigned depth, const fp_options* options, char** out) {
  return guarded([&] {
    require(ifs, "ifs");
    require(out, "out");
    const auto opts = convert(options);
    *out = duplicate(fp::cover_csv(fp::cover_bounds(ifs->ifs, depth, opts.refine, opts)));
  });
}

fp_status fp_pressure(const fp_ifs* ifs, const fp_potential* f, unsigned depth, const fp_options* options,
                      double* low, double* high, char** json) {
  return guarded([&] {
    require(ifs, "ifs");
    require(f, "potential");
    const auto b = fp::pressure_bracket(ifs->ifs, f->f, depth, convert(options));
    if (low) *low = b.low;
    if (high) *high = b.high;
    maybe_emit(json, fp::pressure_bracket_json(b));
  });
}

fp_status fp_dimension(const fp_ifs* ifs, unsigned first_depth, unsigned last_depth, const fp_options* options,
                       fp_dimension_summary* summary, char** json) {
  return guarded([&] {
    require(ifs, "ifs");
    const auto r = fp::bowen_root(ifs->ifs, first_depth, last_depth, convert(options));
    summarize(r, summary);
    maybe_emit(json, fp::dimension_report_json(r));
  });
}

fp_status fp_box_exponent(const fp_ifs* ifs, unsigned first_depth, unsigned last_depth, const fp_options* options,
                          fp_dimension_summary* summary, char** json) {
  return guarded([&] {
    require(ifs, "ifs");
    const auto r = fp::box_exponent(ifs->ifs, first_depth, last_depth, convert(options));
    summarize(r, summary);
    maybe_emit(json, fp::dimension_report_json(r));
  });
}

fp_status fp_entropy(const fp_ifs* ifs, const double* weights, size_t count, unsigned depth,
                     const fp_options* options, double* value, char** json) {
  return guarded([&] {
    require(ifs, "ifs");
    const auto e = fp::projection_entropy_estimate(ifs->ifs, measure(weights, count), depth, convert(options));
    if (value) *value = e.value;
    maybe_emit(json, fp::entropy_estimate_json(e));
  });
}

fp_status fp_varcheck(const fp_ifs* ifs, const double* weights, size_t count, const fp_potential* f, unsigned depth,
                      const fp_options* options, fp_varcheck_result* result, char** json) {
  return guarded([&] {
    require(ifs, "ifs");
    require(f, "potential");
    const auto opts = convert(options);
    const auto gap = fp::variational_gap(ifs->ifs, measure(weights, count), f->f, depth, opts);
    const auto fam = fp::separated_family(ifs->ifs, f->f, depth, opts);
    fp_varcheck_result r{gap.upper, gap.entropy + gap.integral_low, fam.certified_lower, gap.gap};
    if (result) *result = r;
    nlohmann::ordered_json j;
    j["depth"] = depth;
    j["upper"] = r.upper;
    j["bernoulli_value"] = r.bernoulli_value;
    j["certified_lower"] = r.certified_lower;
    j["gap"] = r.gap;
    maybe_emit(json, j.dump());
  });
}

fp_status fp_separated_family(const fp_ifs* ifs, const fp_potential* f, unsigned depth, const fp_options* options,
                              double* certified_lower, char** json) {
  return guarded([&] {
    require(ifs, "ifs");
    require(f, "potential");
    const auto fam = fp::separated_family(ifs->ifs, f->f, depth, convert(options));
    if (certified_lower) *certified_lower = fam.certified_lower;
    maybe_emit(json, fp::separated_family_json(fam));
  });
}

fp_status fp_log_sum_check(const double* p, const double* a, size_t count, double* lhs, double* rhs) {
  return guarded([&] {
    require(p, "p");
    require(a, "a");
    const auto c = fp::log_sum_check(std::span<const double>(p, count), std::span<const double>(a, count));
    if (lhs) *lhs = c.lhs;
    if (rhs) *rhs = c.rhs;
  });
}

}  // extern "C"
