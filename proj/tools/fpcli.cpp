#include "fpcli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "fractal_pressure/fp.h"

namespace fpcli {

namespace {

using nlohmann::ordered_json;

const std::vector<std::string> kCommands{"dim", "pressure", "entropy", "varcheck", "sweep"};
const char* const kCsvHeader = "# fractal-pressure v1\n";

struct PresetSpec {
  std::string name;
  std::vector<std::string> params;
  unsigned first, last;
  // Sweep grid used when --values is absent.
  std::string default_values;
};

const std::vector<PresetSpec>& preset_specs() {
  static const std::vector<PresetSpec> specs{
      {"lambda-cantor", {"lambda"}, 6, 12, "0:1:9"},
      {"overlap-sierpinski", {"a1", "a2"}, 4, 10, "0:1/2:9"},
  };
  return specs;
}

const PresetSpec* find_preset(const std::string& name) {
  for (const auto& p : preset_specs())
    if (p.name == name) return &p;
  return nullptr;
}

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Interval ends printed with outward rounding.
std::string fmt_down(double v) { return fmt(std::floor(v * 1e6) / 1e6); }
std::string fmt_up(double v) { return fmt(std::ceil(v * 1e6) / 1e6); }

// Small exact fractions for sweep grids.
struct Fraction {
  long long num = 0;
  long long den = 1;

  static Fraction parse(const std::string& text) {
    Fraction f;
    try {
      std::size_t used = 0;
      if (auto slash = text.find('/'); slash != std::string::npos) {
        f.num = std::stoll(text.substr(0, slash), &used);
        if (used != slash) throw std::invalid_argument(text);
        const std::string den = text.substr(slash + 1);
        f.den = std::stoll(den, &used);
        if (used != den.size() || f.den <= 0) throw std::invalid_argument(text);
      } else if (auto dot = text.find('.'); dot != std::string::npos) {
        const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        f.num = std::stoll(digits, &used);
        if (used != digits.size() || text.size() - dot - 1 > 15) throw std::invalid_argument(text);
        f.den = 1;
        for (std::size_t i = dot + 1; i < text.size(); ++i) f.den *= 10;
      } else {
        f.num = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
      }
    } catch (const std::logic_error&) {
      throw CliError(config_error, "malformed rational '" + text + "'");
    }
    return f.reduced();
  }

  Fraction reduced() const {
    const long long g = std::gcd(num, den);
    return g == 0 ? *this : Fraction{num / g, den / g};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }
};

std::vector<std::string> expand_values(const std::string& text) {
  std::vector<std::string> parts;
  std::string part;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (sep == ',') {
    std::vector<std::string> out;
    for (const auto& p : parts) out.push_back(Fraction::parse(p).str());
    return out;
  }
  if (parts.size() != 3) throw CliError(config_error, "sweep values must be start:stop:count or a comma list");
  const Fraction a = Fraction::parse(parts[0]);
  const Fraction b = Fraction::parse(parts[1]);
  long long count = 0;
  try {
    count = std::stoll(parts[2]);
  } catch (const std::logic_error&) {
    throw CliError(config_error, "malformed count '" + parts[2] + "'");
  }
  if (count < 2 || count > 1000) throw CliError(config_error, "sweep count must be between 2 and 1000");
  std::vector<std::string> out;
  for (long long i = 0; i < count; ++i) {
    // a + i (b − a) / (count − 1)
    const long long den = a.den * b.den * (count - 1);
    const long long num = a.num * b.den * (count - 1) + i * (b.num * a.den - a.num * b.den);
    out.push_back(Fraction{num, den}.reduced().str());
  }
  return out;
}

std::pair<unsigned, unsigned> parse_depths(const std::string& text) {
  auto number = [&](const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }) || s.size() > 4)
      throw CliError(config_error, "malformed depth range '" + text + "'");
    return static_cast<unsigned>(std::stoul(s));
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const unsigned n = number(text);
    return {n, n};
  }
  const unsigned a = number(text.substr(0, dots));
  const unsigned b = number(text.substr(dots + 2));
  if (a > b) throw CliError(config_error, "depth range '" + text + "' is empty");
  return {a, b};
}

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) out.push_back(Fraction::parse(part).value());
  if (out.empty()) throw CliError(config_error, "weights must be a comma list");
  return out;
}

int exit_for(fp_status s) {
  switch (s) {
    case FP_OK: return ok;
    case FP_CAP_EXCEEDED: return cap_exceeded;
    case FP_NON_CONFORMAL: return conformal_refusal;
    case FP_OUT_OF_RANGE: return out_of_range;
    case FP_NUMERIC: return not_converged;
    case FP_IO:
    case FP_INTERNAL: return io_error;
    default: return config_error;
  }
}

void check(fp_status s) {
  if (s == FP_OK) return;
  std::string message = fp_last_error();
  if (s == FP_CAP_EXCEEDED && fp_last_max_depth() > 0)
    message += " (largest feasible depth: " + std::to_string(fp_last_max_depth()) + ")";
  throw CliError(exit_for(s), message);
}

struct IfsDeleter {
  void operator()(fp_ifs* p) const { fp_ifs_free(p); }
};
struct PotentialDeleter {
  void operator()(fp_potential* p) const { fp_potential_free(p); }
};
struct StringDeleter {
  void operator()(char* p) const { fp_string_free(p); }
};
using IfsHandle = std::unique_ptr<fp_ifs, IfsDeleter>;
using PotentialHandle = std::unique_ptr<fp_potential, PotentialDeleter>;
using OwnedString = std::unique_ptr<char, StringDeleter>;

IfsHandle preset_ifs(const std::string& name, const std::map<std::string, std::string>& params) {
  const PresetSpec* spec = find_preset(name);
  if (spec == nullptr) throw CliError(config_error, "unknown preset '" + name + "'");
  std::vector<const char*> values;
  for (const auto& p : spec->params) {
    auto it = params.find(p);
    if (it == params.end()) throw CliError(config_error, "preset " + name + " needs --" + p);
    values.push_back(it->second.c_str());
  }
  fp_ifs* raw = nullptr;
  check(fp_ifs_preset(name.c_str(), values.data(), values.size(), &raw));
  return IfsHandle(raw);
}

IfsHandle load_ifs(const RunConfig& c) {
  if (!c.preset.empty()) return preset_ifs(c.preset, c.params);
  std::ifstream in(c.ifs_path, std::ios::binary);
  if (!in) throw CliError(io_error, "cannot read IFS file '" + c.ifs_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  fp_ifs* raw = nullptr;
  check(fp_ifs_from_json(buf.str().c_str(), &raw));
  return IfsHandle(raw);
}

PotentialHandle load_potential(const std::string& spec) {
  fp_potential* raw = nullptr;
  check(fp_potential_parse(spec.c_str(), &raw));
  return PotentialHandle(raw);
}

std::string take(char* s) { return OwnedString(s).get(); }

std::string json_value(const ordered_json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Projection pressure and dimension estimates for affine IFS attractors", "fpress"};
  app.set_help_flag();
  std::string command, config_path, preset, ifs, lambda, a1, a2, depth, potential, weights, format, out, svg, param,
      values;
  std::uint64_t cap = 0;
  unsigned threads = 0, refine = 0;
  app.add_option("command", command, "dim | pressure | entropy | varcheck | sweep");
  app.add_option("--config", config_path, "JSON file of option values; flags override it");
  auto* preset_opt = app.add_option("--preset", preset, "lambda-cantor | overlap-sierpinski");
  auto* ifs_opt = app.add_option("--ifs", ifs, "IFS JSON file");
  preset_opt->excludes(ifs_opt);
  app.add_option("--lambda", lambda);
  app.add_option("--a1", a1);
  app.add_option("--a2", a2);
  app.add_option("--depth", depth, "n or a..b");
  app.add_option("--potential", potential, "zero | const:c | linear:a1,..:b:L");
  app.add_option("--weights", weights, "p1,p2,...");
  app.add_option("--format", format, "json | csv");
  app.add_option("--out", out, "output path, or json/csv for standard output");
  app.add_option("--svg", svg, "sweep chart path");
  app.add_option("--param", param, "swept preset parameter");
  app.add_option("--values", values, "start:stop:count or v1,v2,...");
  app.add_option("--cap", cap, "largest number of words per depth");
  app.add_option("--threads", threads);
  app.add_option("--refine", refine);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ExcludesError& e) {
    throw CliError(conflicting_flags, e.what());
  } catch (const CLI::ParseError& e) {
    throw CliError(config_error, e.what());
  }

  ordered_json file = ordered_json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw CliError(io_error, "cannot read config file '" + config_path + "'");
    try {
      file = ordered_json::parse(in);
    } catch (const ordered_json::parse_error& e) {
      throw CliError(config_error, std::string("config file is not valid JSON: ") + e.what());
    }
    if (!file.is_object()) throw CliError(config_error, "config file must hold a JSON object");
    static const std::vector<std::string> known{"command", "preset", "lambda", "a1", "a2", "ifs", "depth",
                                                "potential", "weights", "format", "out", "svg", "param", "values",
                                                "cap", "threads", "refine"};
    for (const auto& [key, value] : file.items())
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw CliError(config_error, "unknown config key '" + key + "'");
  }
  auto given = [&](const std::string& name) { return app.count(name == "command" ? "command" : "--" + name) > 0; };
  auto pick = [&](const std::string& name, const std::string& flag_value) -> std::string {
    if (given(name)) return flag_value;
    if (file.contains(name)) return json_value(file[name]);
    return {};
  };
  auto pick_number = [&](const std::string& name, std::uint64_t flag_value, std::uint64_t fallback) {
    if (given(name)) return flag_value;
    if (file.contains(name)) {
      const auto& v = file[name];
      if (!v.is_number_unsigned()) throw CliError(config_error, "config key '" + name + "' must be a non-negative integer");
      return v.get<std::uint64_t>();
    }
    return fallback;
  };

  RunConfig c;
  c.command = pick("command", command);
  if (c.command.empty()) throw CliError(config_error, "missing command (dim, pressure, entropy, varcheck, sweep)");
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end())
    throw CliError(config_error, "unknown command '" + c.command + "'");

  // A source given on the command line replaces the file's source.
  if (given("preset")) c.preset = preset;
  else if (given("ifs")) c.ifs_path = ifs;
  else {
    c.preset = pick("preset", "");
    c.ifs_path = pick("ifs", "");
  }
  if (!c.preset.empty() && !c.ifs_path.empty())
    throw CliError(conflicting_flags, "--preset and --ifs are mutually exclusive");
  if (c.preset.empty() && c.ifs_path.empty()) throw CliError(config_error, "give --preset or --ifs");
  if (!c.ifs_path.empty() && find_preset(c.ifs_path) != nullptr && !std::filesystem::exists(c.ifs_path))
    c.preset = std::exchange(c.ifs_path, std::string());

  const PresetSpec* spec = nullptr;
  if (!c.preset.empty()) {
    spec = find_preset(c.preset);
    if (spec == nullptr) throw CliError(config_error, "unknown preset '" + c.preset + "'");
  }
  const std::map<std::string, std::string> raw_params{{"lambda", lambda}, {"a1", a1}, {"a2", a2}};
  const bool source_from_flags = given("preset") || given("ifs");
  for (const auto& [name, flag_value] : raw_params) {
    const std::string value = source_from_flags ? (given(name) ? flag_value : "") : pick(name, flag_value);
    if (value.empty()) continue;
    const bool belongs = spec != nullptr && std::find(spec->params.begin(), spec->params.end(), name) != spec->params.end();
    if (!belongs)
      throw CliError(conflicting_flags, "--" + name + " does not apply to " + (spec ? c.preset : std::string("--ifs")));
    c.params[name] = Fraction::parse(value).str();
  }

  const std::string depth_text = pick("depth", depth);
  if (!depth_text.empty()) {
    std::tie(c.depth_first, c.depth_last) = parse_depths(depth_text);
  } else if (spec != nullptr) {
    c.depth_first = spec->first;
    c.depth_last = spec->last;
  } else {
    throw CliError(config_error, "--depth is required with --ifs");
  }

  if (const auto p = pick("potential", potential); !p.empty()) c.potential = p;
  c.weights = pick("weights", weights);
  c.format = pick("format", format);
  c.out = pick("out", out);
  c.svg = pick("svg", svg);
  c.sweep_param = pick("param", param);
  const std::string values_text = pick("values", values);
  c.cap = pick_number("cap", cap, c.cap);
  if (c.cap == 0) throw CliError(config_error, "--cap must be positive");
  c.refine = static_cast<unsigned>(pick_number("refine", refine, c.refine));
  if (given("threads")) {
    c.threads = threads;
  } else if (const char* env = std::getenv("FP_THREADS"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(env, &used);
      if (used != std::string(env).size() || v > 4096) throw std::invalid_argument(env);
      c.threads = static_cast<unsigned>(v);
    } catch (const std::logic_error&) {
      throw CliError(config_error, std::string("FP_THREADS must be a small non-negative integer, got '") + env + "'");
    }
  } else {
    c.threads = static_cast<unsigned>(pick_number("threads", threads, 0));
  }

  if (c.out == "json" || c.out == "csv") {
    if (!c.format.empty() && c.format != c.out)
      throw CliError(conflicting_flags, "--out " + c.out + " conflicts with --format " + c.format);
    c.format = c.out;
    c.out.clear();
  }
  const bool csv_ok = c.command == "pressure" || c.command == "entropy" || c.command == "sweep";
  if (c.format.empty()) c.format = c.command == "sweep" ? "csv" : "json";
  if (c.format != "json" && c.format != "csv") throw CliError(config_error, "unknown format '" + c.format + "'");
  if (c.format == "csv" && !csv_ok) throw CliError(conflicting_flags, c.command + " writes JSON only");
  if (c.format == "json" && c.command == "sweep") throw CliError(conflicting_flags, "sweep writes CSV only");

  const bool uses_weights = c.command == "entropy" || c.command == "varcheck";
  if (uses_weights && c.weights.empty()) throw CliError(config_error, c.command + " needs --weights");
  if (!uses_weights && !c.weights.empty()) throw CliError(conflicting_flags, "--weights does not apply to " + c.command);
  if (!c.weights.empty()) parse_weights(c.weights);
  if (c.command == "dim" || c.command == "sweep") {
    if (given("potential") || file.contains("potential"))
      throw CliError(conflicting_flags, "--potential does not apply to " + c.command);
  }

  if (c.command == "sweep") {
    if (spec == nullptr) throw CliError(config_error, "sweep needs a preset");
    if (c.sweep_param.empty()) c.sweep_param = spec->params.front();
    if (std::find(spec->params.begin(), spec->params.end(), c.sweep_param) == spec->params.end())
      throw CliError(config_error, "preset " + c.preset + " has no parameter '" + c.sweep_param + "'");
    if (c.params.count(c.sweep_param))
      throw CliError(conflicting_flags, "--" + c.sweep_param + " is swept and cannot also be fixed");
    c.sweep_values = expand_values(values_text.empty() ? spec->default_values : values_text);
    for (const auto& v : c.sweep_values) {
      auto params = c.params;
      params[c.sweep_param] = v;
      preset_ifs(c.preset, params);
    }
  } else {
    if (!c.svg.empty() || !c.sweep_param.empty() || !values_text.empty())
      throw CliError(conflicting_flags, "--svg, --param and --values apply to sweep only");
    if (spec != nullptr) preset_ifs(c.preset, c.params);
  }
  if (c.potential != "zero" || uses_weights) PotentialHandle checked = load_potential(c.potential);
  return c;
}

std::vector<std::string> explain(const RunConfig& c) {
  std::vector<std::string> args{c.command};
  auto add = [&](const std::string& flag, const std::string& value) {
    args.push_back("--" + flag);
    args.push_back(value);
  };
  if (!c.preset.empty()) add("preset", c.preset);
  else add("ifs", c.ifs_path);
  for (const auto& [name, value] : c.params) add(name, value);
  add("depth", std::to_string(c.depth_first) + ".." + std::to_string(c.depth_last));
  if (c.command != "dim" && c.command != "sweep") add("potential", c.potential);
  if (!c.weights.empty()) add("weights", c.weights);
  add("format", c.format);
  if (!c.out.empty()) add("out", c.out);
  if (!c.svg.empty()) add("svg", c.svg);
  if (c.command == "sweep") {
    add("param", c.sweep_param);
    std::string joined;
    for (const auto& v : c.sweep_values) joined += (joined.empty() ? "" : ",") + v;
    add("values", joined);
  }
  add("cap", std::to_string(c.cap));
  add("threads", std::to_string(c.threads));
  add("refine", std::to_string(c.refine));
  return args;
}

void write_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path temp = target;
  temp += ".tmp-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError(io_error, "cannot write '" + temp.string() + "'");
    out << contents;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(temp, ec);
      throw CliError(io_error, "write to '" + temp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw CliError(io_error, "cannot move output into place at '" + path + "'");
  }
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string csv = kCsvHeader;
  csv += sweep.parameter + ",value,dimension,lo,hi,converged\n";
  for (const auto& p : sweep.points)
    csv += p.value + "," + fmt(p.x, 12) + "," + fmt(p.estimate, 12) + "," + fmt(p.lo, 12) + "," + fmt(p.hi, 12) + "," +
           (p.converged ? "1" : "0") + "\n";
  return csv;
}

std::string svg_chart(const SweepResult& sweep) {
  if (sweep.points.size() < 2) throw CliError(config_error, "a chart needs at least two sweep points");
  const double width = 640, height = 400, left = 60, right = 20, top = 20, bottom = 50;
  double x0 = sweep.points.front().x, x1 = x0, lo = sweep.points.front().lo, hi = sweep.points.front().hi;
  for (const auto& p : sweep.points) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    lo = std::min({lo, p.lo, p.estimate});
    hi = std::max({hi, p.hi, p.estimate});
  }
  if (x1 == x0) x1 = x0 + 1;
  const double y0 = std::floor(lo * 20 - 1e-9) / 20 - 0.05;
  const double y1 = std::ceil(hi * 20 - 1e-9) / 20;
  auto px = [&](double x) { return fmt(left + (x - x0) / (x1 - x0) * (width - left - right), 2); };
  auto py = [&](double y) { return fmt(top + (y1 - y) / (y1 - y0) * (height - top - bottom), 2); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\""
    << " data-y-min=\"" << fmt(y0, 4) << "\" data-y-max=\"" << fmt(y1, 4) << "\">\n";
  s << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s << "<path d=\"M" << left << " " << top << " V" << height - bottom << " H" << width - right
    << "\" stroke=\"black\" fill=\"none\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = y0 + (y1 - y0) * i / 4;
    s << "<text x=\"" << left - 6 << "\" y=\"" << py(y) << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(y, 3)
      << "</text>\n";
    const double x = x0 + (x1 - x0) * i / 4;
    s << "<text x=\"" << px(x) << "\" y=\"" << height - bottom + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
      << fmt(x, 3) << "</text>\n";
  }
  s << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 10
    << "\" font-size=\"12\" text-anchor=\"middle\">" << sweep.parameter << "</text>\n";

  s << "<polygon class=\"band\" fill=\"#9ecae1\" fill-opacity=\"0.6\" points=\"";
  for (const auto& p : sweep.points) s << px(p.x) << "," << py(p.hi) << " ";
  for (auto it = sweep.points.rbegin(); it != sweep.points.rend(); ++it) s << px(it->x) << "," << py(it->lo) << " ";
  s << "\"/>\n";
  s << "<polyline class=\"estimate\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < sweep.points.size(); ++i)
    s << (i ? " " : "") << px(sweep.points[i].x) << "," << py(sweep.points[i].estimate);
  s << "\"/>\n</svg>\n";
  return s.str();
}

void emit_svg(const SweepResult& sweep, const std::string& path) { write_atomic(path, svg_chart(sweep)); }

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  fp_options opts;
  fp_options_default(&opts);
  opts.word_cap = c.cap;
  opts.threads = c.threads;
  opts.refine = c.refine;

  std::string artifact;
  std::string summary;
  int code = ok;

  if (c.command == "dim") {
    IfsHandle ifs = load_ifs(c);
    fp_dimension_summary s{};
    char* json = nullptr;
    const fp_status st = fp_dimension(ifs.get(), c.depth_first, c.depth_last, &opts, &s, &json);
    if (st == FP_NON_CONFORMAL) {
      err << "refusing: " << fp_last_error() << "\n";
      return conformal_refusal;
    }
    check(st);
    artifact = take(json);
    summary = "dim ∈ [" + fmt_down(s.root_lo) + ", " + fmt_up(s.root_hi) + "] estimate " + fmt(s.estimate);
    if (!s.converged) {
      err << "warning: depth estimates did not converge" << (s.drift ? " (slope drift)" : "") << "\n";
      code = not_converged;
    }
  } else if (c.command == "pressure") {
    IfsHandle ifs = load_ifs(c);
    PotentialHandle f = load_potential(c.potential);
    ordered_json doc;
    doc["potential"] = fp_potential_description(f.get());
    doc["brackets"] = ordered_json::array();
    std::string csv = std::string(kCsvHeader) + "depth,low,high\n";
    double low = 0, high = 0;
    for (unsigned n = c.depth_first; n <= c.depth_last; ++n) {
      char* json = nullptr;
      check(fp_pressure(ifs.get(), f.get(), n, &opts, &low, &high, &json));
      doc["brackets"].push_back(ordered_json::parse(take(json)));
      csv += std::to_string(n) + "," + fmt(low, 12) + "," + fmt(high, 12) + "\n";
    }
    artifact = c.format == "csv" ? csv : doc.dump();
    summary = "P ∈ [" + fmt_down(low) + ", " + fmt_up(high) + "] at depth " + std::to_string(c.depth_last);
  } else if (c.command == "entropy") {
    IfsHandle ifs = load_ifs(c);
    const auto w = parse_weights(c.weights);
    ordered_json doc;
    doc["weights"] = w;
    doc["estimates"] = ordered_json::array();
    std::string csv = std::string(kCsvHeader) + "depth,value,h_classical,cells,boundary_mass\n";
    double value = 0;
    ordered_json last;
    for (unsigned n = c.depth_first; n <= c.depth_last; ++n) {
      char* json = nullptr;
      check(fp_entropy(ifs.get(), w.data(), w.size(), n, &opts, &value, &json));
      last = ordered_json::parse(take(json));
      csv += std::to_string(n) + "," + fmt(value, 12) + "," + fmt(last["h_classical"].get<double>(), 12) + "," +
             std::to_string(last["cells"].get<std::size_t>()) + "," + fmt(last["boundary_mass"].get<double>(), 12) + "\n";
      if (last["boundary_warning"].get<bool>())
        err << "warning: depth " << n << " puts " << fmt(100 * last["boundary_mass"].get<double>(), 2)
            << "% of mass on cell boundaries\n";
      doc["estimates"].push_back(last);
    }
    artifact = c.format == "csv" ? csv : doc.dump();
    summary = "h ≈ " + fmt(value) + " at depth " + std::to_string(c.depth_last) + " (classical " +
              fmt(last["h_classical"].get<double>()) + ")";
  } else if (c.command == "varcheck") {
    IfsHandle ifs = load_ifs(c);
    PotentialHandle f = load_potential(c.potential);
    const auto w = parse_weights(c.weights);
    fp_varcheck_result r{};
    char* json = nullptr;
    check(fp_varcheck(ifs.get(), w.data(), w.size(), f.get(), c.depth_last, &opts, &r, &json));
    artifact = take(json);
    summary = "gap " + fmt(r.gap) + " (upper " + fmt(r.upper) + ", bernoulli " + fmt(r.bernoulli_value) +
              ", certified lower " + fmt(r.certified_lower) + ")";
  } else {
    SweepResult sweep;
    sweep.parameter = c.sweep_param;
    // A single depth n sweeps over depths n-2..n.
    const unsigned last = c.depth_last;
    const unsigned first = c.depth_first < c.depth_last ? c.depth_first : std::max(1u, last >= 2 ? last - 2 : 1u);
    for (const auto& v : c.sweep_values) {
      auto params = c.params;
      params[c.sweep_param] = v;
      IfsHandle ifs = preset_ifs(c.preset, params);
      fp_dimension_summary s{};
      const auto start = std::chrono::steady_clock::now();
      check(fp_dimension(ifs.get(), first, last, &opts, &s, nullptr));
      SweepPoint p;
      p.value = v;
      p.x = Fraction::parse(v).value();
      p.estimate = s.estimate;
      p.lo = s.root_lo;
      p.hi = s.root_hi;
      p.converged = s.converged;
      p.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      err << c.sweep_param << "=" << v << ": " << fmt(p.seconds, 3) << " s\n";
      if (!p.converged) code = not_converged;
      sweep.points.push_back(p);
    }
    artifact = sweep_csv(sweep);
    if (!c.svg.empty()) emit_svg(sweep, c.svg);
    summary = "sweep " + c.sweep_param + ": " + std::to_string(sweep.points.size()) + " points, dimension " +
              fmt(sweep.points.front().estimate) + " .. " + fmt(sweep.points.back().estimate);
    if (code == not_converged) err << "warning: some sweep points did not converge\n";
  }

  if (c.out.empty()) {
    out << artifact;
    if (!artifact.empty() && artifact.back() != '\n') out << "\n";
  } else {
    write_atomic(c.out, artifact.back() == '\n' ? artifact : artifact + "\n");
  }
  out << summary << "\n";
  return code;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const bool help = std::find(args.begin(), args.end(), "--help") != args.end() ||
                    std::find(args.begin(), args.end(), "-h") != args.end();
  if (help || args.empty()) {
    out << "usage: fpress <dim|pressure|entropy|varcheck|sweep> (--preset NAME | --ifs FILE) [options]\n"
           "  --lambda, --a1, --a2   preset parameters (lambda-cantor: lambda; overlap-sierpinski: a1 a2)\n"
           "  --depth a..b           depth range (preset defaults: 6..12 and 4..10)\n"
           "  --potential SPEC       zero | const:c | linear:a1,..:b:L\n"
           "  --weights p1,p2,..     Bernoulli weights for entropy and varcheck\n"
           "  --format json|csv      artifact format; --out PATH writes it atomically\n"
           "  --param, --values, --svg   sweep options (values: start:stop:count or a list)\n"
           "  --cap N, --threads N, --refine K, --config FILE, --explain\n"
           "exit codes: 0 ok, 1 I/O, 2 config, 3 cap exceeded, 4 not conformal, 5 not converged,\n"
           "            6 parameter out of range, 7 conflicting flags\n";
    return args.empty() ? config_error : ok;
  }
  std::vector<std::string> rest;
  bool explain_only = false;
  for (const auto& a : args) {
    if (a == "--explain") explain_only = true;
    else rest.push_back(a);
  }
  try {
    const RunConfig config = parse_config(rest);
    if (explain_only) {
      const auto flags = explain(config);
      for (std::size_t i = 0; i < flags.size(); ++i) out << (i ? " " : "") << flags[i];
      out << "\n";
      return ok;
    }
    return run(config, out, err);
  } catch (const CliError& e) {
    err << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return io_error;
  }
}

}  // namespace fpcli
