#include "fractal_pressure/ifs_io.hpp"

#include <cmath>

#include <json.hpp>

namespace fp {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::config, what); }

Rational exact_entry(const json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  config_error("exact entries must be rational strings or integers, got " + v.dump());
}

double float_entry(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_rational(v.get<std::string>()).get_d();
  config_error("float entries must be numbers or rational strings, got " + v.dump());
}

template <class T, class Entry>
Matrix<T> read_matrix(const json& rows, Entry entry) {
  if (!rows.is_array() || rows.empty()) config_error("\"linear\" must be a non-empty array of rows");
  const std::size_t d = rows.size();
  Matrix<T> m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!rows[i].is_array() || rows[i].size() != d) config_error("\"linear\" must be square");
    for (std::size_t j = 0; j < d; ++j) m(i, j) = entry(rows[i][j]);
  }
  return m;
}

template <class T, class Entry>
std::vector<Vector<T>> read_translations(const json& list, std::size_t d, Entry entry) {
  if (!list.is_array() || list.empty()) config_error("\"translations\" must be a non-empty array");
  std::vector<Vector<T>> out;
  for (const auto& t : list) {
    if (!t.is_array() || t.size() != d) config_error("each translation needs " + std::to_string(d) + " entries");
    Vector<T> v(d);
    for (std::size_t j = 0; j < d; ++j) v[j] = entry(t[j]);
    out.push_back(std::move(v));
  }
  return out;
}

Rational preset_rational(const std::string& name, const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const Error&) {
    config_error("malformed value for " + name + ": '" + text + "'");
  }
}

void require_count(std::string_view preset, const std::vector<std::string>& parameters, std::size_t count) {
  if (parameters.size() != count)
    config_error(std::string(preset) + " takes " + std::to_string(count) + " parameter(s), got " +
                 std::to_string(parameters.size()));
}

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    out.push_back(parse_rational(text.substr(start, comma - start)).get_d());
    start = comma + 1;
  }
  return out;
}

}  // namespace

AffineIFS ifs_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("IFS file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) config_error("IFS description must be a JSON object");
  for (const char* key : {"linear", "translations"})
    if (!doc.contains(key)) config_error(std::string("IFS description lacks \"") + key + "\"");
  const std::string mode = doc.value("mode", std::string("exact"));
  if (mode == "exact") {
    Matrix<Rational> a = read_matrix<Rational>(doc["linear"], exact_entry);
    auto t = read_translations<Rational>(doc["translations"], a.rows(), exact_entry);
    return AffineIFS::make_exact(std::move(a), std::move(t));
  }
  if (mode == "float") {
    Matrix<double> a = read_matrix<double>(doc["linear"], float_entry);
    auto t = read_translations<double>(doc["translations"], a.rows(), float_entry);
    return AffineIFS::make_floating(std::move(a), std::move(t));
  }
  config_error("unknown mode '" + mode + "', expected exact or float");
}

std::string ifs_to_json(const AffineIFS& ifs) {
  nlohmann::ordered_json doc;
  const std::size_t d = ifs.dimension();
  doc["mode"] = ifs.exact() ? "exact" : "float";
  auto linear = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < d; ++i) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < d; ++j) {
      if (ifs.exact()) row.push_back(format_rational(ifs.exact_linear()(i, j)));
      else row.push_back(ifs.linear()(i, j));
    }
    linear.push_back(std::move(row));
  }
  auto translations = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < ifs.symbol_count(); ++s) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < d; ++j) {
      if (ifs.exact()) row.push_back(format_rational(ifs.exact_translations()[s][j]));
      else row.push_back(ifs.translations()[s][j]);
    }
    translations.push_back(std::move(row));
  }
  doc["linear"] = std::move(linear);
  doc["translations"] = std::move(translations);
  return doc.dump();
}

const std::vector<PresetInfo>& presets() {
  static const std::vector<PresetInfo> list{
      {"lambda-cantor", {"lambda"}, "6..12"},
      {"overlap-sierpinski", {"a1", "a2"}, "4..10"},
  };
  return list;
}

AffineIFS make_preset(std::string_view name, const std::vector<std::string>& parameters) {
  if (name == "lambda-cantor") {
    require_count(name, parameters, 1);
    const Rational lambda = preset_rational("lambda", parameters[0]);
    if (lambda < 0 || lambda > 1)
      throw Error(ErrorCode::out_of_range, "lambda must lie in [0, 1], got " + parameters[0]);
    Matrix<Rational> a(1, 1);
    a(0, 0) = Rational(1, 3);
    return AffineIFS::make_exact(a, {{Rational(0)}, {Rational(lambda / 3)}, {Rational(2, 3)}});
  }
  if (name == "overlap-sierpinski") {
    require_count(name, parameters, 2);
    const Rational a1 = preset_rational("a1", parameters[0]);
    const Rational a2 = preset_rational("a2", parameters[1]);
    if (a1 < 0 || a1 > Rational(1, 2))
      throw Error(ErrorCode::out_of_range, "a1 must lie in [0, 1/2], got " + parameters[0]);
    // a2 <= √3/4 exactly iff a2 < 0 or 16·a2² <= 3.
    if (a2 < 0 || 16 * a2 * a2 > 3 * (1 + Rational(1, 1000000000)))
      throw Error(ErrorCode::out_of_range, "a2 must lie in [0, sqrt(3)/4], got " + parameters[1]);
    Matrix<double> a(2, 2);
    a(0, 0) = a(1, 1) = 0.5;
    return AffineIFS::make_floating(a, {{0.0, 0.0}, {a1.get_d(), a2.get_d()}, {0.25, std::sqrt(3.0) / 4.0}});
  }
  config_error("unknown preset '" + std::string(name) + "'");
}

Potential parse_potential(std::string_view spec) {
  try {
    if (spec == "zero") return Potential::constant(0.0);
    if (spec.starts_with("const:")) return Potential::constant(parse_rational(spec.substr(6)).get_d());
    if (spec.starts_with("linear:")) {
      std::string_view rest = spec.substr(7);
      const auto first = rest.find(':');
      const auto second = first == std::string_view::npos ? first : rest.find(':', first + 1);
      if (second == std::string_view::npos) config_error("linear potential needs coeffs:intercept:lipschitz");
      const auto coeffs = parse_numbers(rest.substr(0, first));
      const double intercept = parse_rational(rest.substr(first + 1, second - first - 1)).get_d();
      const double lipschitz = parse_rational(rest.substr(second + 1)).get_d();
      return Potential::linear(coeffs, intercept, lipschitz);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::potential_rejected) throw;
    config_error("malformed potential '" + std::string(spec) + "': " + e.what());
  }
  config_error("unknown potential '" + std::string(spec) + "', expected zero, const:c or linear:a,..:b:L");
}

}  // namespace fp
