#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "fixtures.hpp"
#include "fractal_pressure/measures.hpp"
#include "oracle.hpp"

using namespace fp;
using fixtures::cantor_exact;

namespace {

const Potential zero = Potential::constant(0.0);

// H of the fixed-point pushforward divided by n, one rational word at a time.
double brute_entropy(const AffineIFS& ifs, const std::vector<double>& p, unsigned n) {
  const std::size_t l = ifs.symbol_count();
  Rational cells = 1;
  for (unsigned i = 0; i < n; ++i) cells /= ifs.linear_as<Rational>()(0, 0);
  const long last = cells.get_num().get_si() - 1;
  std::map<long, double> mass;
  for (std::uint64_t i = 0; i < word_count(l, n); ++i) {
    const Word u = Word::from_index(i, l, n);
    double w = 1.0;
    for (auto s : u.symbols()) w *= p[s];
    const Rational x = fixed_point(compose_word<Rational>(ifs, u))[0];
    mass[std::min(last, oracle::floor_div(x * cells))] += w;
  }
  double h = 0.0;
  for (auto& [k, w] : mass)
    if (w > 0.0) h -= w * std::log(w);
  return h / n;
}

std::vector<double> random_probability(std::mt19937_64& rng, std::size_t k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& v : p) total += v = e(rng);
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace

TEST_CASE("bernoulli measure validation and cylinders") {
  CHECK_THROWS_AS(BernoulliMeasure({0.5, 0.6}), Error);
  CHECK_THROWS_AS(BernoulliMeasure({1.5, -0.5}), Error);
  CHECK_THROWS_AS(BernoulliMeasure({}), Error);
  BernoulliMeasure p({0.5, 0.25, 0.25});
  CHECK(p.cylinder_weight(Word::parse("1,2,2")) == doctest::Approx(1.0 / 32));
  const auto p2 = p.power(2);
  REQUIRE(p2.size() == 9);
  CHECK(p2.weights()[1] == doctest::Approx(0.125));
  CHECK(classical_entropy(p2) == doctest::Approx(2 * classical_entropy(p)));
}

TEST_CASE("classical entropy examples") {
  CHECK(classical_entropy(BernoulliMeasure({0.5, 0.5})) == doctest::Approx(std::log(2.0)));
  CHECK(classical_entropy(BernoulliMeasure({1.0, 0.0, 0.0})) == 0.0);
  CHECK(classical_entropy(BernoulliMeasure({0.5, 0.25, 0.25})) == doctest::Approx(1.5 * std::log(2.0)));
}

TEST_CASE("log-sum inequality") {
  std::vector<double> u(4, 0.25), z(4, 0.0);
  auto c = log_sum_check(u, z);
  CHECK(c.lhs == doctest::Approx(std::log(4.0)));
  CHECK(c.rhs == doctest::Approx(std::log(4.0)));

  std::vector<double> p{1.0, 0.0}, a{0.0, 1.0};
  c = log_sum_check(p, a);
  CHECK(c.lhs == 0.0);
  CHECK(c.rhs == doctest::Approx(std::log(1.0 + std::exp(1.0))));

  CHECK_THROWS_AS(log_sum_check(p, std::vector<double>{1.0}), Error);

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> k_dist(1, 16);
  std::normal_distribution<double> n_dist(0.0, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = k_dist(rng);
    std::vector<double> aa(k);
    for (auto& v : aa) v = n_dist(rng);
    const auto pp = random_probability(rng, k);
    const auto r = log_sum_check(pp, aa);
    CHECK(r.lhs <= r.rhs + 1e-12);
    const auto eq = log_sum_check(r.gibbs, aa);
    CHECK(std::fabs(eq.lhs - eq.rhs) <= 1e-12);
  }
}

TEST_CASE("projection entropy examples") {
  const auto two = fixtures::two_map_cantor();
  const auto half = BernoulliMeasure::uniform(2);
  for (unsigned n = 1; n <= 8; ++n) CHECK(projection_entropy_estimate(two, half, n).value == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  const double p = 0.5, q = 0.3, s = 0.2;
  const auto e = projection_entropy_estimate(cantor_exact(0), BernoulliMeasure({p, q, s}), 8);
  CHECK(std::fabs(e.value - (-(p + q) * std::log(p + q) - s * std::log(s))) <= 0.05);
  CHECK(e.value <= e.h_classical + 1e-9);

  const auto one = fixtures::single_map_exact(Rational(1, 2), Rational(1, 4));
  const auto single = projection_entropy_estimate(one, BernoulliMeasure({1.0}), 5);
  CHECK(single.value == 0.0);
  CHECK(single.cells == 1);

  CHECK_THROWS_AS(projection_entropy_estimate(two, BernoulliMeasure::uniform(3), 2), Error);
  EnumerationOptions small;
  small.word_cap = 100;
  CHECK_THROWS_AS(projection_entropy_estimate(two, half, 8, small), CapExceeded);
}

TEST_CASE("projection entropy matches rational enumeration") {
  std::mt19937_64 rng(5);
  for (const Rational lambda : {Rational(0), Rational(1, 3), Rational(1, 2), Rational(1)}) {
    const auto ifs = cantor_exact(lambda);
    const auto p = random_probability(rng, 3);
    for (unsigned n = 1; n <= 6; ++n) {
      const auto e = projection_entropy_estimate(ifs, BernoulliMeasure(p), n);
      CHECK(e.value == doctest::Approx(brute_entropy(ifs, p, n)).epsilon(1e-12));
      CHECK(e.value <= e.h_classical + 1e-9);
    }
  }
}

TEST_CASE("projection entropy power consistency") {
  const BernoulliMeasure p({0.5, 0.3, 0.2});
  for (const Rational lambda : {Rational(0), Rational(1, 2), Rational(1)}) {
    const auto ifs = cantor_exact(lambda);
    const double base = projection_entropy_estimate(ifs, p, 8).value;
    const double pow = projection_entropy_estimate(power_ifs(ifs, 2), p.power(2), 4).value;
    CHECK(std::fabs(base - pow / 2) <= 0.05);
  }
}

TEST_CASE("projection entropy is independent of threads and float mode agrees") {
  const BernoulliMeasure p({0.6, 0.3, 0.1});
  EnumerationOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const auto ifs = cantor_exact(Rational(1, 3));
  CHECK(projection_entropy_estimate(ifs, p, 7, one).value == projection_entropy_estimate(ifs, p, 7, many).value);
  EnumerationOptions narrow;
  narrow.frontier_limit = 8;
  CHECK(projection_entropy_estimate(ifs, p, 7, narrow).value ==
        doctest::Approx(projection_entropy_estimate(ifs, p, 7).value).epsilon(1e-13));
  const auto f = projection_entropy_estimate(fixtures::cantor_float(1.0 / 3.0), p, 7);
  CHECK(f.value == doctest::Approx(projection_entropy_estimate(ifs, p, 7).value).epsilon(1e-12));
}

TEST_CASE("boundary mass warning") {
  // Every word over the first two symbols has fixed point 0.
  const auto e = projection_entropy_estimate(cantor_exact(0), BernoulliMeasure::uniform(3), 6);
  CHECK(e.boundary_mass >= std::pow(2.0 / 3.0, 6) - 1e-12);
  CHECK(e.boundary_warning);
  const auto two = projection_entropy_estimate(fixtures::two_map_cantor(), BernoulliMeasure::uniform(2), 12);
  // Only the words fixing 0 and 1 sit on cell corners.
  CHECK(two.boundary_mass == doctest::Approx(2 * std::pow(0.5, 12)));
  CHECK_FALSE(two.boundary_warning);
}

TEST_CASE("integral estimate examples") {
  const auto ifs = cantor_exact(Rational(1, 2));
  const auto c = integral_estimate(ifs, BernoulliMeasure::uniform(3), Potential::constant(2.5), 4);
  CHECK(c.low == 2.5);
  CHECK(c.high == 2.5);

  const Potential x = Potential::linear({1.0}, 0.0, 1.0);
  const auto single = integral_estimate(fixtures::single_map_exact(Rational(1, 2), Rational(0)), BernoulliMeasure({1.0}), x, 6);
  CHECK(single.value == 0.0);
  CHECK(single.low <= 0.0);
  CHECK(single.high >= 0.0);

  Matrix<Rational> a(1, 1);
  a(0, 0) = Rational(1, 2);
  const auto halves = AffineIFS::make_exact(a, {{Rational(0)}, {Rational(1, 2)}});
  const auto m = integral_estimate(halves, BernoulliMeasure::uniform(2), x, 12);
  CHECK(m.low <= 0.5);
  CHECK(m.high >= 0.5);
  CHECK(m.high - m.low <= 1e-3);

  // Skewed weights move the mean: E = p2 / (p1 + p2) * 1 with fixed point
  // mean solving E = E/2 + p2/2.
  const auto skew = integral_estimate(halves, BernoulliMeasure({0.75, 0.25}), x, 14);
  CHECK(skew.low <= 0.25);
  CHECK(skew.high >= 0.25);
}

TEST_CASE("variational gap examples") {
  const auto one = fixtures::single_map_exact(Rational(1, 3), Rational(1, 3));
  CHECK(variational_gap(one, BernoulliMeasure({1.0}), zero, 4).gap == doctest::Approx(0.0));

  const auto full = variational_gap(cantor_exact(1), BernoulliMeasure::uniform(3), zero, 6);
  CHECK(std::fabs(full.gap) <= 0.05);
  CHECK(full.entropy == doctest::Approx(std::log(3.0)));

  const auto half = variational_gap(cantor_exact(Rational(1, 2)), BernoulliMeasure({0.6, 0.2, 0.2}), zero, 8);
  CHECK(half.gap >= -0.02);
}

TEST_CASE("separated family examples") {
  const auto mid = separated_family(cantor_exact(0), zero, 1);
  REQUIRE(mid.words.size() == 2);
  CHECK(mid.words[0].to_string() == "1");
  CHECK(mid.words[1].to_string() == "3");
  CHECK(mid.weights[0] == doctest::Approx(0.5));
  CHECK(mid.certified_lower == doctest::Approx(std::log(2.0)));

  const auto full = separated_family(cantor_exact(1), zero, 1);
  CHECK(full.words.size() <= 2);
  CHECK(full.certified_lower == doctest::Approx(std::log(2.0)));
  CHECK(full.certified_lower < std::log(3.0));

  const auto one = fixtures::single_map_exact(Rational(1, 2), Rational(1, 4));
  const Potential x = Potential::linear({1.0}, 0.3, 1.0);
  const auto single = separated_family(one, x, 3);
  REQUIRE(single.words.size() == 1);
  CHECK(single.weights[0] == 1.0);
  CHECK(single.certified_lower == doctest::Approx(single.low[0] / 3));
  CHECK(single.certified_lower <= pressure_bracket(one, x, 3).high + 1e-9);
  CHECK(single.packing_efficiency == doctest::Approx(1.0));
}

TEST_CASE("separated family enclosures are disjoint and weights are Gibbs") {
  const Potential f = Potential::linear({0.7}, -0.2, 0.7);
  for (const Rational lambda : {Rational(0), Rational(1, 2), Rational(1)}) {
    const auto ifs = cantor_exact(lambda);
    for (unsigned n = 2; n <= 6; ++n) {
      const auto fam = separated_family(ifs, f, n);
      double total = 0.0;
      for (double w : fam.weights) total += w;
      CHECK(total == doctest::Approx(1.0));
      std::vector<std::pair<Rational, Rational>> boxes;
      const auto bounds = ifs.bounds();
      for (const auto& u : fam.words) {
        const auto map = compose_word<Rational>(ifs, u);
        boxes.emplace_back(map.offset[0] + map.linear(0, 0) * bounds.exact_box->lo[0],
                           map.offset[0] + map.linear(0, 0) * bounds.exact_box->hi[0]);
      }
      for (std::size_t i = 0; i < boxes.size(); ++i)
        for (std::size_t j = i + 1; j < boxes.size(); ++j)
          CHECK((boxes[i].second < boxes[j].first || boxes[j].second < boxes[i].first));
      for (std::size_t i = 0; i + 1 < fam.words.size(); ++i)
        CHECK(fam.weights[i] / fam.weights[i + 1] == doctest::Approx(std::exp(fam.high[i] - fam.high[i + 1])));
      CHECK(fam.certified_lower <= pressure_bracket(ifs, f, n).high + 1e-9);
    }
  }
}

TEST_CASE("packing efficiency floors") {
  CHECK(packing_efficiency(cantor_exact(1), zero, 3) >= 1.0 / 7);
  CHECK(packing_efficiency(fixtures::sierpinski(0.5, 0.0), zero, 4) >= 1.0 / 49);
}

TEST_CASE("certified lower bounds grow with depth") {
  const double scale = std::log(3.0);
  for (const Rational lambda : {Rational(0), Rational(1, 2), Rational(1)}) {
    const auto ifs = cantor_exact(lambda);
    double previous = -INFINITY;
    for (unsigned n = 4; n <= 8; ++n) {
      const double value = separated_family(ifs, zero, n).certified_lower / scale;
      CHECK(value >= previous - 1e-6);
      CHECK(value * scale <= pressure_bracket(ifs, zero, n).high + 1e-9);
      previous = value;
    }
    if (lambda == 0) CHECK(previous >= 0.60);
  }
}

TEST_CASE("measure json") {
  const auto e = projection_entropy_estimate(fixtures::two_map_cantor(), BernoulliMeasure::uniform(2), 3);
  const std::string j = entropy_estimate_json(e);
  CHECK(j.find("\"depth\":3") != std::string::npos);
  CHECK(j.find("\"boundary_warning\":true") != std::string::npos);
  const auto fam = separated_family(cantor_exact(0), zero, 1);
  const std::string s = separated_family_json(fam);
  CHECK(s.find("\"word\":\"1\"") != std::string::npos);
  CHECK(s.find("\"size\":2") != std::string::npos);
}
