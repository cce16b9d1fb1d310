#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mixmode/gmm.hpp"
#include "mixmode/oracle.hpp"

using namespace mixmode;

namespace {

GaussianComponent g1(double mean, double std) {
  Eigen::VectorXd m(1), s(1);
  m << mean;
  s << std;
  return GaussianComponent(m, s);
}

}  // namespace

TEST_CASE("kl_quadrature_1d") {
  CHECK_THAT(oracle::kl_quadrature_1d(g1(1.0, 0.5), g1(1.0, 0.5)),
             Catch::Matchers::WithinAbs(0.0, 1e-10));
  CHECK_THAT(oracle::kl_quadrature_1d(g1(0.0, 1.0), g1(2.0, 1.0)),
             Catch::Matchers::WithinAbs(2.0, 1e-6));
  CHECK_THAT(oracle::kl_quadrature_1d(g1(0.0, 1.0), g1(0.0, 2.0)),
             Catch::Matchers::WithinAbs(std::log(2.0) + 0.125 - 0.5, 1e-6));

  SECTION("agrees with the closed form on random parameters") {
    RandomSource rng(21);
    for (int i = 0; i < 100; ++i) {
      auto a = g1(rng.uniform(-5, 5), rng.uniform(0.1, 5.0));
      auto b = g1(rng.uniform(-5, 5), rng.uniform(0.1, 5.0));
      CHECK_THAT(oracle::kl_quadrature_1d(a, b),
                 Catch::Matchers::WithinAbs(kl_gaussian(a, b), 1e-6));
    }
  }
  SECTION("grid convergence") {
    auto a = g1(-1.3, 0.4);
    auto b = g1(2.2, 1.7);
    const double coarse = oracle::kl_quadrature_1d(a, b, oracle::default_grid(a, b, 20001));
    const double fine = oracle::kl_quadrature_1d(a, b, oracle::default_grid(a, b, 40001));
    CHECK(std::abs(coarse - fine) < 1e-7);
  }
  SECTION("rejects multivariate input") {
    Eigen::VectorXd m(2), s(2);
    m << 0, 0;
    s << 1, 1;
    GaussianComponent c(m, s);
    CHECK_THROWS_AS(oracle::kl_quadrature_1d(c, c, oracle::GridSpec(-1, 1, 101)),
                    std::invalid_argument);
  }
}

TEST_CASE("wasserstein_1d quantile coupling") {
  SECTION("identical components") {
    auto [w1, w2] = oracle::wasserstein_1d(g1(2.0, 1.5), g1(2.0, 1.5));
    CHECK(w1 == 0.0);
    CHECK(w2 == 0.0);
  }
  SECTION("pure translation") {
    for (double sigma : {0.2, 1.0, 4.0}) {
      auto [w1, w2] = oracle::wasserstein_1d(g1(0.0, sigma), g1(5.0, sigma));
      CHECK_THAT(w1, Catch::Matchers::WithinAbs(5.0, 1e-3));
      CHECK_THAT(w2, Catch::Matchers::WithinAbs(5.0, 1e-3));
    }
  }
  SECTION("matches the closed-form W2") {
    auto [w1, w2] = oracle::wasserstein_1d(g1(0.0, 1.0), g1(3.0, 2.0));
    CHECK_THAT(w2, Catch::Matchers::WithinAbs(std::sqrt(10.0), 1e-3));
    CHECK_THAT(w2, Catch::Matchers::WithinAbs(w2_gaussian(g1(0.0, 1.0), g1(3.0, 2.0)), 1e-3));
  }
  SECTION("random draws stay within tolerance of the closed form") {
    RandomSource rng(22);
    for (int i = 0; i < 100; ++i) {
      auto a = g1(rng.uniform(-5, 5), rng.uniform(0.1, 5.0));
      auto b = g1(rng.uniform(-5, 5), rng.uniform(0.1, 5.0));
      auto [w1, w2] = oracle::wasserstein_1d(a, b);
      CHECK_THAT(w2, Catch::Matchers::WithinAbs(w2_gaussian(a, b), 1e-3));
    }
  }
}

TEST_CASE("entropy_quadrature_1d") {
  Eigen::VectorXd w1v(1);
  w1v << 1.0;
  std::vector<GaussianComponent> single;
  single.push_back(g1(0.0, 1.0));
  Mixture m_single(w1v, std::move(single));
  CHECK_THAT(oracle::entropy_quadrature_1d(m_single),
             Catch::Matchers::WithinAbs(1.4189385332046727, 1e-6));

  Eigen::VectorXd w2v(2);
  w2v << 0.5, 0.5;
  std::vector<GaussianComponent> dup;
  dup.push_back(g1(0.0, 1.0));
  dup.push_back(g1(0.0, 1.0));
  Mixture m_dup(w2v, std::move(dup));
  CHECK_THAT(oracle::entropy_quadrature_1d(m_dup),
             Catch::Matchers::WithinAbs(1.4189385332046727, 1e-6));

  std::vector<GaussianComponent> far;
  far.push_back(g1(-30.0, 1.0));
  far.push_back(g1(30.0, 1.0));
  Mixture m_far(w2v, std::move(far));
  CHECK_THAT(oracle::entropy_quadrature_1d(m_far),
             Catch::Matchers::WithinAbs(1.4189385332046727 + std::log(2.0), 1e-4));

  SECTION("agrees with mixture_entropy quadrature") {
    RandomSource rng(23);
    for (int i = 0; i < 20; ++i) {
      Eigen::VectorXd w(2);
      const double a = rng.uniform(0.1, 0.9);
      w << a, 1.0 - a;
      std::vector<GaussianComponent> cs;
      cs.push_back(g1(rng.uniform(-5, 5), rng.uniform(0.1, 5.0)));
      cs.push_back(g1(rng.uniform(-5, 5), rng.uniform(0.1, 5.0)));
      Mixture m(w, std::move(cs));
      CHECK_THAT(oracle::entropy_quadrature_1d(m),
                 Catch::Matchers::WithinAbs(
                     mixture_entropy(m, EntropyEstimatorConfig::quadrature()), 1e-9));
    }
  }
}

TEST_CASE("GridSpec validation") {
  CHECK_THROWS_AS(oracle::GridSpec(1.0, 1.0, 101), std::invalid_argument);
  CHECK_THROWS_AS(oracle::GridSpec(0.0, 1.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(oracle::GridSpec(0.0, 1.0, 1), std::invalid_argument);
  CHECK_NOTHROW(oracle::GridSpec(0.0, 1.0, 3));
}
