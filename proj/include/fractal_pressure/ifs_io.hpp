#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fractal_pressure/ifs.hpp"
#include "fractal_pressure/pressure.hpp"

namespace fp {

// {"mode": "exact" | "float", "linear": [[..],..], "translations": [[..],..]}
// Exact entries are strings like "1/3" or integers; float entries are numbers
// or rational strings.
AffineIFS ifs_from_json(std::string_view text);
std::string ifs_to_json(const AffineIFS& ifs);

struct PresetInfo {
  std::string name;
  std::vector<std::string> parameters;
  std::string default_depths;
};

const std::vector<PresetInfo>& presets();

// lambda-cantor(λ) with 0 <= λ <= 1, exact.
// overlap-sierpinski(a1, a2) with 0 <= a1 <= 1/2 and 0 <= a2 <= √3/4, float.
// Parameters out of range raise ErrorCode::out_of_range.
AffineIFS make_preset(std::string_view name, const std::vector<std::string>& parameters);

// "const:c", "zero", or "linear:a1,a2,..:intercept:lipschitz".
Potential parse_potential(std::string_view spec);

}  // namespace fp
