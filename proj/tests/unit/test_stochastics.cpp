#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "iesim/distribution.hpp"
#include "iesim/error.hpp"
#include "iesim/fitting.hpp"
#include "iesim/rng.hpp"

using namespace iesim;

namespace {

std::vector<double> draw(const Distribution& d, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = d.sample(rng);
  return out;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

TEST_SUITE("stochastics") {

TEST_CASE("sampling") {
  Rng rng = make_rng(1);
  const auto dirac = Distribution::dirac(0.25);
  for (int i = 0; i < 100; ++i) CHECK(dirac.sample(rng) == 0.25);

  const double eps = 1e-6;
  const auto u = Distribution::uniform(1.0, 1.0 + eps);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.sample(rng);
    CHECK(x >= 1.0);
    CHECK(x < 1.0 + eps);
  }

  const auto xs = draw(Distribution::normal(5, 1), 100000, 42);
  CHECK(std::abs(mean(xs) - 5.0) < 0.02);

  // clamped at zero
  for (double x : draw(Distribution::normal(0.1, 1.0), 1000, 3)) CHECK(x >= 0.0);

  const auto p = draw(Distribution::poisson(4.0, 0.001), 1000, 5);
  for (double x : p) CHECK(std::abs(x / 0.001 - std::round(x / 0.001)) < 1e-9);

  CHECK(std::abs(mean(draw(Distribution::exponential(2.0), 100000, 9)) - 0.5) < 0.01);
}

TEST_CASE("invalid parameters are rejected at construction") {
  CHECK_THROWS_AS(Distribution::normal(1, -1), ValidationError);
  CHECK_THROWS_AS(Distribution::uniform(2, 1), ValidationError);
  CHECK_THROWS_AS(Distribution::poisson(0), ValidationError);
  CHECK_THROWS_AS(Distribution::exponential(0), ValidationError);
}

TEST_CASE("seeded reproducibility") {
  for (const auto& d : {Distribution::normal(3, 1), Distribution::poisson(5, 0.01), Distribution::uniform(0, 2),
                        Distribution::exponential(1.5)}) {
    CHECK(draw(d, 500, 77) == draw(d, 500, 77));
    CHECK(draw(d, 500, 77) != draw(d, 500, 78));
  }
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("fit_poisson") {
  const std::vector<double> a{3, 3, 3}, b{2, 3, 4}, c{0, 0, 0, 4};
  CHECK(fit_poisson(a).fitted == Distribution::poisson(3));
  CHECK(fit_poisson(b).fitted == Distribution::poisson(3));
  CHECK(fit_poisson(c).fitted == Distribution::poisson(1));
  CHECK(fit_poisson(c).samples == 4);
  const std::vector<double> frac{1.5, 2}, neg{-1, 2}, one{2};
  CHECK_THROWS_AS(fit_poisson(frac), FitError);
  CHECK_THROWS_AS(fit_poisson(neg), FitError);
  CHECK_THROWS_AS(fit_poisson(one), FitError);
}

TEST_CASE("fit_poisson equals the sample mean exactly") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> n(2, 300), v(0, 40);
  for (int i = 0; i < 300; ++i) {
    std::vector<double> s(static_cast<std::size_t>(n(rng)));
    for (auto& x : s) x = v(rng);
    if (std::all_of(s.begin(), s.end(), [](double x) { return x == 0; })) s[0] = 1;
    const double expect = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    CHECK(std::get<Poisson>(fit_poisson(s).fitted.params()).lambda == expect);
  }
}

TEST_CASE("fit_normal") {
  const std::vector<double> a{1, 3};
  const auto r = fit_normal(a);
  const auto& n = std::get<Normal>(r.fitted.params());
  CHECK(n.mean == 2.0);
  CHECK(n.stddev == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const std::vector<double> flat{5, 5, 5};
  CHECK_THROWS_WITH_AS(fit_normal(flat), doctest::Contains("Dirac"), FitError);

  const auto xs = draw(Distribution::normal(10, 2), 10000, 123);
  const auto f = std::get<Normal>(fit_normal(xs).fitted.params());
  CHECK(std::abs(f.mean - 10) < 0.1);
  CHECK(std::abs(f.stddev - 2) < 0.1);
}

TEST_CASE("fit_exponential") {
  const auto xs = draw(Distribution::exponential(4.0), 10000, 8);
  CHECK(std::get<Exponential>(fit_exponential(xs).fitted.params()).rate == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("select_fit") {
  const std::vector<DistributionKind> both{DistributionKind::Poisson, DistributionKind::Normal};

  const auto counts = draw(Distribution::poisson(4.0), 2000, 31);
  const auto rp = select_fit(counts, both);
  CHECK(rp.kind == DistributionKind::Poisson);
  CHECK(std::abs(std::get<Poisson>(rp.fitted.params()).lambda - 4.0) < 0.2);
  CHECK(rp.dof > 0);

  const auto durations = draw(Distribution::normal(8.0, 1.0), 2000, 32);
  CHECK(select_fit(durations, both).kind == DistributionKind::Normal);

  const std::vector<double> ten(10, 1.0);
  CHECK_THROWS_AS(select_fit(ten, both), FitError);
}

TEST_CASE("chi-square bins") {
  // ceil(sqrt(n)) bins; dof = used bins - 1 - fitted parameters
  const auto xs = draw(Distribution::normal(0.5, 0.1), 100, 4);
  const auto cs = chi_square_statistic(xs, Distribution::normal(0.5, 0.1), 2);
  CHECK(cs.dof <= 10 - 1 - 2);
  CHECK(cs.statistic >= 0);
}

TEST_CASE("fit round-trip within 5% for each kind") {
  const std::size_t n = 10000;
  const auto p = std::get<Poisson>(fit_poisson(draw(Distribution::poisson(4), n, 1)).fitted.params());
  CHECK(std::abs(p.lambda / 4.0 - 1) < 0.05);
  const auto g = std::get<Normal>(fit_normal(draw(Distribution::normal(10, 2), n, 2)).fitted.params());
  CHECK(std::abs(g.mean / 10.0 - 1) < 0.05);
  CHECK(std::abs(g.stddev / 2.0 - 1) < 0.05);
  const auto e = std::get<Exponential>(fit_exponential(draw(Distribution::exponential(0.5), n, 3)).fitted.params());
  CHECK(std::abs(e.rate / 0.5 - 1) < 0.05);
}

TEST_CASE("describe and parse kinds") {
  CHECK(parse_distribution_kind("normal") == DistributionKind::Normal);
  CHECK(to_string(DistributionKind::Poisson) == "poisson");
  CHECK_THROWS_AS(parse_distribution_kind("weibull"), ValidationError);
  CHECK(Distribution::poisson(2, 0.5).mean() == 1.0);
}

TEST_CASE("poisson counts match the moments across rates") {
  // 0.3 and 2e5 cover the smallest table and the library fallback
  for (double lambda : {0.3, 4.0, 40.0, 700.0, 2e5}) {
    const auto d = Distribution::poisson(lambda, 0.5);
    Rng rng = make_rng(static_cast<std::uint64_t>(lambda * 10));
    const int n = 40000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = d.sample(rng) / 0.5;
      REQUIRE(k == std::floor(k));
      REQUIRE(k >= 0.0);
      sum += k;
      sq += k * k;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    INFO("lambda = " << lambda);
    CHECK(std::abs(mean - lambda) < 5.0 * std::sqrt(lambda / n));
    CHECK(var == doctest::Approx(lambda).epsilon(0.05));
  }
}

}  // TEST_SUITE
