#pragma once

#include "fractal_pressure/lattice.hpp"
#include "fractal_pressure/pressure.hpp"
#include "word_engine.hpp"

namespace fp::detail {

using CellTable = LatticeTable<CellBest>;

// For every outer cell at `depth`: the largest Birkhoff upper bound over
// words whose closed enclosure meets it, with that word's index and lower
// bound.
CellTable upper_cells(const AffineIFS& ifs, const Potential& f, unsigned depth, const EnumerationOptions& options);

PressureBracket constant_bracket(std::size_t n_minus, std::size_t n_plus, unsigned depth, unsigned refine, double c);

}  // namespace fp::detail
