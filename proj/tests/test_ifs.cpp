#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "fractal_pressure/ifs.hpp"

using namespace fp;
using fixtures::cantor_exact;

TEST_CASE("compose_word on the lambda-Cantor system") {
  const auto ifs = cantor_exact(Rational(1, 2));

  auto id = compose_word<Rational>(ifs, Word{});
  CHECK(id.linear(0, 0) == 1);
  CHECK(id.offset[0] == 0);

  auto s1 = compose_word<Rational>(ifs, Word::parse("1"));
  CHECK(s1.linear(0, 0) == Rational(1, 3));
  CHECK(s1.offset[0] == 0);

  auto s13 = compose_word<Rational>(ifs, Word::parse("1,3"));
  CHECK(s13.linear(0, 0) == Rational(1, 9));
  CHECK(s13.offset[0] == Rational(2, 9));

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> num(-50, 50);
  for (int i = 0; i < 5; ++i) {
    const Rational x(num(rng), 7);
    const Rational direct = (x / 3 + Rational(2, 3)) / 3;
    CHECK(s13({x})[0] == direct);
  }

  CHECK_THROWS_AS(compose_word<Rational>(ifs, Word(std::vector<std::uint32_t>{3})), Error);
}

TEST_CASE("word text form is one-based") {
  const Word w = Word::parse("1,3");
  CHECK(w.depth() == 2);
  CHECK(w[0] == 0);
  CHECK(w[1] == 2);
  CHECK(w.to_string() == "1,3");
  CHECK(Word::from_index(2, 3, 2) == w);
  CHECK(Word::from_index(5, 3, 2).to_string() == "2,3");
}

TEST_CASE("fixed points of cylinder maps") {
  const auto ifs = cantor_exact(Rational(1, 2));
  CHECK(fixed_point(compose_word<Rational>(ifs, Word::parse("1")))[0] == 0);
  CHECK(fixed_point(compose_word<Rational>(ifs, Word::parse("3")))[0] == 1);
  const auto map = compose_word<Rational>(ifs, Word::parse("1,3"));
  CHECK(fixed_point(map)[0] == Rational(1, 4));

  double x = 0.0;
  for (int i = 0; i < 100; ++i) x = x / 9.0 + 2.0 / 9.0;
  CHECK(x == doctest::Approx(0.25).epsilon(1e-15));

  BasicAffineMap<double> expanding{Matrix<double>::identity(1), {1.0}};
  expanding.linear(0, 0) = 2.0;
  CHECK_THROWS_AS(fixed_point(expanding), Error);
}

TEST_CASE("attractor bounds are invariant boxes") {
  for (const Rational& lambda : {Rational(0), Rational(1, 2), Rational(1)}) {
    const auto ifs = cantor_exact(lambda);
    const auto& box = *ifs.bounds().exact_box;
    CHECK(box.lo[0] == 0);
    CHECK(box.hi[0] == 1);
    for (const auto& c : ifs.exact_translations()) {
      CHECK(box.lo[0] / 3 + c[0] >= box.lo[0]);
      CHECK(box.hi[0] / 3 + c[0] <= box.hi[0]);
    }
  }

  const auto point = fixtures::single_map_exact(Rational(1, 2), 0);
  CHECK(point.bounds().exact_box->lo[0] == 0);
  CHECK(point.bounds().exact_box->hi[0] == 0);
  CHECK(point.bounds().diameter == 0.0);

  const auto tri = fixtures::sierpinski(0.5, 0.0);
  const auto& b = tri.bounds().box;
  CHECK(b.lo[0] == doctest::Approx(0.0));
  CHECK(b.hi[0] == doctest::Approx(1.0));
  CHECK(b.lo[1] == doctest::Approx(0.0));
  CHECK(b.hi[1] == doctest::Approx(std::sqrt(3.0) / 2.0));
  CHECK(b.lo[0] <= 0.0);
  CHECK(b.hi[1] >= std::sqrt(3.0) / 2.0);
  for (const auto& c : tri.translations())
    for (int j = 0; j < 2; ++j) {
      CHECK(0.5 * b.lo[j] + c[j] >= b.lo[j]);
      CHECK(0.5 * b.hi[j] + c[j] <= b.hi[j]);
    }
}

TEST_CASE("power systems") {
  const auto base = cantor_exact(Rational(0));
  const auto same = power_ifs(base, 1);
  CHECK(same.exact_translations() == base.exact_translations());

  const auto sq = power_ifs(base, 2);
  CHECK(sq.symbol_count() == 9);
  CHECK(sq.exact_linear()(0, 0) == Rational(1, 9));
  const std::vector<Rational> expected{0, 0, Rational(2, 9), 0, 0, Rational(2, 9), Rational(2, 3), Rational(2, 3),
                                       Rational(8, 9)};
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(sq.exact_translations()[i][0] == expected[i]);
    CHECK(sq.exact_translations()[i] == compose_word<Rational>(base, Word::from_index(i, 3, 2)).offset);
  }

  const auto single = fixtures::single_map_exact(Rational(1, 2), 1);
  const auto cube = power_ifs(single, 3);
  CHECK(cube.exact_linear()(0, 0) == Rational(1, 8));
  CHECK(cube.exact_translations()[0][0] == Rational(7, 4));

  CHECK_THROWS_AS(power_ifs(base, 20, 1000), CapExceeded);
}

TEST_CASE("composition is a homomorphism on words up to depth 6") {
  const auto ifs = cantor_exact(Rational(2, 5));
  for (unsigned total = 0; total <= 6; ++total) {
    const std::uint64_t count = word_count(3, total);
    for (std::uint64_t idx = 0; idx < count; ++idx) {
      const Word w = Word::from_index(idx, 3, total);
      const auto whole = compose_word<Rational>(ifs, w);
      for (unsigned split = 0; split <= total; ++split) {
        Word u(std::vector<std::uint32_t>(w.symbols().begin(), w.symbols().begin() + split));
        Word v(std::vector<std::uint32_t>(w.symbols().begin() + split, w.symbols().end()));
        const auto joined = compose_word<Rational>(ifs, u).after(compose_word<Rational>(ifs, v));
        REQUIRE(joined.linear == whole.linear);
        REQUIRE(joined.offset == whole.offset);
      }
    }
  }
}

TEST_CASE("fixed points of random words stay in the attractor box") {
  std::mt19937_64 rng(11);
  const auto exact = cantor_exact(Rational(1, 2));
  const auto tri = fixtures::sierpinski(0.3, 0.2);
  const auto& box = tri.bounds().box;
  for (int trial = 0; trial < 1000; ++trial) {
    const unsigned depth = 1 + rng() % 20;
    std::vector<std::uint32_t> symbols(depth);
    for (auto& s : symbols) s = rng() % 3;
    const Word w(symbols);
    const auto p = fixed_point(compose_word<Rational>(exact, w));
    CHECK(p[0] >= 0);
    CHECK(p[0] <= 1);
    const auto q = fixed_point(compose_word<double>(tri, w));
    for (int j = 0; j < 2; ++j) {
      CHECK(q[j] >= box.lo[j] - 1e-12);
      CHECK(q[j] <= box.hi[j] + 1e-12);
    }
  }
}

TEST_CASE("cylinder linear parts scale by the ratio") {
  const auto tri = fixtures::sierpinski(0.5, 0.0);
  for (unsigned n = 0; n <= 12; ++n) {
    const auto map = compose_word<double>(tri, Word(std::vector<std::uint32_t>(n, 1)));
    CHECK(spectral_norm(map.linear) == doctest::Approx(std::pow(0.5, n)).epsilon(1e-10));
  }
  const auto exact = cantor_exact(Rational(1, 4));
  const auto map = compose_word<Rational>(exact, Word(std::vector<std::uint32_t>(7, 2)));
  Rational expected = 1;
  for (int i = 0; i < 7; ++i) expected /= 3;
  CHECK(map.linear(0, 0) == expected);
}

TEST_CASE("power system cylinders flatten to base cylinders") {
  const auto base = cantor_exact(Rational(1, 3));
  const auto sq = power_ifs(base, 2);
  for (std::uint64_t idx = 0; idx < word_count(9, 3); ++idx) {
    const Word w = Word::from_index(idx, 9, 3);
    std::vector<std::uint32_t> flat;
    for (auto s : w.symbols()) {
      flat.push_back(s / 3);
      flat.push_back(s % 3);
    }
    const auto a = compose_word<Rational>(sq, w);
    const auto b = compose_word<Rational>(base, Word(flat));
    REQUIRE(a.linear == b.linear);
    REQUIRE(a.offset == b.offset);
  }
}

TEST_CASE("construction rejects invalid systems") {
  Matrix<Rational> a(1, 1);
  a(0, 0) = 1;
  CHECK_THROWS_AS(AffineIFS::make_exact(a, {{Rational(0)}}), Error);
  a(0, 0) = 0;
  CHECK_THROWS_AS(AffineIFS::make_exact(a, {{Rational(0)}}), Error);
  Matrix<double> shear(2, 2);
  shear(0, 0) = 0.5;
  shear(0, 1) = 0.1;
  shear(1, 1) = 0.3;
  const auto ifs = AffineIFS::make_floating(shear, {{0.0, 0.0}, {1.0, 0.0}});
  CHECK_FALSE(ifs.conformal());
  CHECK(fixtures::sierpinski(0.5, 0.0).conformal());
}
