#pragma once

#include <cmath>

#include "fractal_pressure/ifs.hpp"

namespace fixtures {

using fp::Matrix;
using fp::Rational;
using fp::Vector;

inline fp::AffineIFS cantor_exact(const Rational& lambda) {
  Matrix<Rational> a(1, 1);
  a(0, 0) = Rational(1, 3);
  return fp::AffineIFS::make_exact(a, {{Rational(0)}, {Rational(lambda / 3)}, {Rational(2, 3)}});
}

inline fp::AffineIFS cantor_float(double lambda) {
  Matrix<double> a(1, 1);
  a(0, 0) = 1.0 / 3.0;
  return fp::AffineIFS::make_floating(a, {{0.0}, {lambda / 3.0}, {2.0 / 3.0}});
}

inline fp::AffineIFS single_map_exact(const Rational& ratio, const Rational& offset) {
  Matrix<Rational> a(1, 1);
  a(0, 0) = ratio;
  return fp::AffineIFS::make_exact(a, {{offset}});
}

inline fp::AffineIFS two_map_cantor() {
  Matrix<Rational> a(1, 1);
  a(0, 0) = Rational(1, 3);
  return fp::AffineIFS::make_exact(a, {{Rational(0)}, {Rational(2, 3)}});
}

inline fp::AffineIFS sierpinski(double a1, double a2) {
  Matrix<double> a(2, 2);
  a(0, 0) = a(1, 1) = 0.5;
  return fp::AffineIFS::make_floating(a, {{0.0, 0.0}, {a1, a2}, {0.25, std::sqrt(3.0) / 4.0}});
}

}  // namespace fixtures
