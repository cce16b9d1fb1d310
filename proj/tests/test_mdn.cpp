#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mixmode/datasets.hpp"
#include "mixmode/mdn.hpp"

using namespace mixmode;

namespace {

MdnConfig small_config(RandomSource& rng) {
  MdnConfig cfg;
  cfg.input_dim = 1 + static_cast<int>(rng.below(3));
  cfg.output_dim = 1 + static_cast<int>(rng.below(2));
  cfg.n_components = 1 + static_cast<int>(rng.below(4));
  cfg.hidden_widths = {static_cast<int>(2 + rng.below(7)),
                       static_cast<int>(2 + rng.below(7))};
  cfg.seed = rng.next_u64();
  return cfg;
}

// Finite differences are only a valid oracle away from the ReLU kinks;
// draws whose hidden pre-activations sit inside the step size get redrawn.
bool near_relu_kink(const MdnModel& model, const Eigen::MatrixXd& x, double margin) {
  Eigen::MatrixXd h = x;
  for (const auto& layer : model.hidden) {
    const Eigen::MatrixXd z = (h * layer.W.transpose()).rowwise() + layer.b.transpose();
    if (z.array().abs().minCoeff() < margin) return true;
    h = z.cwiseMax(0.0);
  }
  return false;
}

// Central finite differences on the mean batch NLL, the reference the
// analytic gradients are checked against.
double fd_relative_error(MdnModel& model, const Eigen::MatrixXd& x,
                         const Eigen::MatrixXd& y) {
  const auto [grads, nll0] = grad(model, x, y);
  Eigen::VectorXd analytic(static_cast<Eigen::Index>(param_count(model)));
  Eigen::Index pos = 0;
  for_each_param(grads, [&](const auto& t) {
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      for (Eigen::Index c = 0; c < t.cols(); ++c) analytic[pos++] = t(r, c);
  });

  Eigen::VectorXd flat = to_flat(model);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(flat[i]));
    const double saved = flat[i];
    flat[i] = saved + h;
    from_flat(model, flat);
    const double up = grad(model, x, y).second;
    flat[i] = saved - h;
    from_flat(model, flat);
    const double down = grad(model, x, y).second;
    flat[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
    worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
  }
  from_flat(model, flat);
  return worst;
}

}  // namespace

TEST_CASE("sigma transform") {
  CHECK(sigma_transform(0.0) == 1.0 + kSigmaFloor);
  CHECK(sigma_transform(2.5) == 3.5 + kSigmaFloor);
  const double floor_region = sigma_transform(-40.0);
  CHECK(floor_region > 0.0);
  CHECK(std::isfinite(floor_region));
  CHECK_THAT(floor_region, Catch::Matchers::WithinAbs(kSigmaFloor, 1e-12));
}

TEST_CASE("forward yields a valid mixture") {
  MdnConfig cfg;
  cfg.input_dim = 2;
  cfg.output_dim = 3;
  cfg.n_components = 4;
  cfg.hidden_widths = {16, 16};
  cfg.seed = 5;
  MdnModel model = init_mdn(cfg);

  Eigen::VectorXd x(2);
  x << 0.3, -1.2;
  const Mixture m = forward(model, x);
  CHECK(m.k() == 4);
  CHECK(m.dim() == 3);
  CHECK_THAT(m.weights().sum(), Catch::Matchers::WithinAbs(1.0, 1e-9));
  for (const auto& c : m.components()) CHECK(c.std.minCoeff() >= kSigmaFloor);

  SECTION("non-finite input rejected") {
    Eigen::VectorXd bad(2);
    bad << std::nan(""), 0.0;
    CHECK_THROWS_AS(forward(model, bad), std::invalid_argument);
  }
  SECTION("dimension mismatch rejected") {
    Eigen::VectorXd bad(3);
    bad << 1, 2, 3;
    CHECK_THROWS_AS(forward(model, bad), std::invalid_argument);
  }
  SECTION("valid even under extreme sigma pre-activations") {
    model.sigma_head.W.setZero();
    for (Eigen::Index i = 0; i < model.sigma_head.b.size(); ++i)
      model.sigma_head.b[i] = (i % 2 == 0) ? 50.0 : -50.0;
    const Mixture extreme = forward(model, x);
    for (const auto& c : extreme.components()) {
      CHECK(c.std.allFinite());
      CHECK(c.std.minCoeff() >= kSigmaFloor);
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(3);
    CHECK(std::isfinite(log_pdf(extreme, y)));
  }
}

TEST_CASE("nll") {
  Eigen::VectorXd w(1);
  w << 1.0;
  std::vector<GaussianComponent> cs;
  cs.emplace_back(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  const Mixture m(w, std::move(cs));
  Eigen::VectorXd y(1);
  y << 0.0;
  CHECK_THAT(nll(m, y), Catch::Matchers::WithinAbs(0.91893853320467274, 1e-12));
  CHECK(nll(m, y) == -log_pdf(m, y));

  Eigen::VectorXd w2(2);
  w2 << 0.5, 0.5;
  std::vector<GaussianComponent> dup;
  dup.emplace_back(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  dup.emplace_back(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  const Mixture md(w2, std::move(dup));
  y << 1.3;
  CHECK_THAT(nll(md, y), Catch::Matchers::WithinAbs(0.91893853320467274 + 0.5 * 1.3 * 1.3, 1e-12));
}

TEST_CASE("gradients") {
  SECTION("identical components give equal pi-logit gradients") {
    MdnConfig cfg;
    cfg.input_dim = 1;
    cfg.output_dim = 1;
    cfg.n_components = 3;
    cfg.hidden_widths = {8};
    cfg.seed = 11;
    MdnModel model = init_mdn(cfg);
    // Make the three components indistinguishable.
    for (int i = 1; i < 3; ++i) {
      model.pi_head.W.row(i) = model.pi_head.W.row(0);
      model.mu_head.W.row(i) = model.mu_head.W.row(0);
      model.sigma_head.W.row(i) = model.sigma_head.W.row(0);
      model.pi_head.b[i] = model.pi_head.b[0];
      model.mu_head.b[i] = model.mu_head.b[0];
      model.sigma_head.b[i] = model.sigma_head.b[0];
    }
    Eigen::MatrixXd x(2, 1), y(2, 1);
    x << 0.5, -0.5;
    y << 1.0, -1.0;
    const auto [grads, nll_value] = grad(model, x, y);
    CHECK(grads.pi_head.b[0] == grads.pi_head.b[1]);
    CHECK(grads.pi_head.b[1] == grads.pi_head.b[2]);
    CHECK(grads.pi_head.W.row(0) == grads.pi_head.W.row(1));
  }

  SECTION("analytic matches central finite differences on random small nets") {
    RandomSource rng(41);
    int checked = 0;
    while (checked < 25) {
      MdnConfig cfg = small_config(rng);
      MdnModel model = init_mdn(cfg);
      const int batch = 1 + static_cast<int>(rng.below(5));
      Eigen::MatrixXd x(batch, cfg.input_dim), y(batch, cfg.output_dim);
      fill_normal(rng, x);
      fill_normal(rng, y);
      if (near_relu_kink(model, x, 1e-3)) continue;
      CHECK(fd_relative_error(model, x, y) <= 1e-4);
      ++checked;
    }
  }

  SECTION("duplicating a batch sample leaves the mean gradient unchanged") {
    MdnConfig cfg;
    cfg.input_dim = 2;
    cfg.output_dim = 1;
    cfg.n_components = 2;
    cfg.hidden_widths = {6};
    cfg.seed = 13;
    MdnModel model = init_mdn(cfg);
    Eigen::MatrixXd x1(1, 2), y1(1, 1), x2(2, 2), y2(2, 1);
    x1 << 0.4, -0.7;
    y1 << 0.9;
    x2 << 0.4, -0.7, 0.4, -0.7;
    y2 << 0.9, 0.9;
    const auto [g_once, nll_once] = grad(model, x1, y1);
    const auto [g_twice, nll_twice] = grad(model, x2, y2);
    CHECK(nll_once == nll_twice);
    CHECK(g_once.pi_head.W == g_twice.pi_head.W);
    CHECK(g_once.mu_head.W == g_twice.mu_head.W);
    CHECK(g_once.hidden[0].W == g_twice.hidden[0].W);
  }

  SECTION("empty batch rejected") {
    MdnConfig cfg;
    cfg.hidden_widths = {4};
    MdnModel model = init_mdn(cfg);
    Eigen::MatrixXd x(0, 1), y(0, 1);
    CHECK_THROWS_AS(grad(model, x, y), std::invalid_argument);
  }
}

TEST_CASE("adam_step") {
  AdamParams params;
  params.learning_rate = 0.05;

  SECTION("zero gradient leaves parameters unchanged") {
    Eigen::MatrixXd p(2, 2);
    p << 1.0, -2.0, 3.0, 0.5;
    const Eigen::MatrixXd before = p;
    AdamTensorState st{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)};
    adam_step(p, Eigen::MatrixXd::Zero(2, 2), st, 1, params);
    CHECK(p == before);
  }

  SECTION("constant gradient drives the step size to the learning rate") {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(1, 1);
    AdamTensorState st{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
    Eigen::MatrixXd g(1, 1);
    g << 0.3;
    double prev = p(0, 0);
    double step_size = 0.0;
    for (long t = 1; t <= 5000; ++t) {
      adam_step(p, g, st, t, params);
      step_size = std::abs(p(0, 0) - prev);
      prev = p(0, 0);
    }
    CHECK_THAT(step_size, Catch::Matchers::WithinAbs(params.learning_rate, 1e-6));
  }

  SECTION("first step from zeroed state matches the hand computation") {
    Eigen::MatrixXd p(1, 1);
    p << 1.5;
    AdamTensorState st{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
    Eigen::MatrixXd g(1, 1);
    g << 2.0;
    adam_step(p, g, st, 1, params);
    // m-hat = g, v-hat = g^2, so the update is lr * g / (|g| + eps).
    const double expected = 1.5 - 0.05 * 2.0 / (2.0 + 1e-8);
    CHECK_THAT(p(0, 0), Catch::Matchers::WithinAbs(expected, 1e-15));
  }
}

TEST_CASE("training") {
  SECTION("k = 1 recovers a unimodal target") {
    RandomSource rng(55);
    const int n = 2000;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 1);
    Eigen::MatrixXd y(n, 1);
    for (int i = 0; i < n; ++i) y(i, 0) = 3.0 + 2.0 * rng.normal();
    MdnConfig cfg;
    cfg.input_dim = 1;
    cfg.output_dim = 1;
    cfg.n_components = 1;
    cfg.hidden_widths = {16};
    cfg.seed = 4;
    cfg.learning_rate = 3e-3;
    cfg.batch_size = 100;
    cfg.epochs = 300;
    auto [model, history] = train(cfg, x, y);
    Eigen::VectorXd probe = Eigen::VectorXd::Zero(1);
    const Mixture m = forward(model, probe);
    CHECK_THAT(m.component(0).mean[0], Catch::Matchers::WithinAbs(3.0, 0.1));
    CHECK_THAT(m.component(0).std[0], Catch::Matchers::WithinAbs(2.0, 0.1));
    CHECK(history.epoch_nll.size() == 300);
    for (double v : history.epoch_nll) CHECK(std::isfinite(v));
  }

  SECTION("same seed twice is bitwise identical") {
    const Dataset ds = gen_inverse_sine(300, 17);
    MdnConfig cfg;
    cfg.n_components = 3;
    cfg.hidden_widths = {12, 12};
    cfg.seed = 21;
    cfg.epochs = 12;
    cfg.batch_size = 50;
    auto [model_a, hist_a] = train(cfg, ds.inputs, ds.targets);
    auto [model_b, hist_b] = train(cfg, ds.inputs, ds.targets);
    REQUIRE(hist_a.epoch_nll.size() == hist_b.epoch_nll.size());
    for (std::size_t e = 0; e < hist_a.epoch_nll.size(); ++e)
      CHECK(hist_a.epoch_nll[e] == hist_b.epoch_nll[e]);
    CHECK(to_flat(model_a) == to_flat(model_b));
  }

  SECTION("training NLL stays finite on the inverse sine dataset across seeds") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
      const Dataset ds = gen_inverse_sine(400, derive_seed(seed, "data"));
      MdnConfig cfg;
      cfg.n_components = 5;
      cfg.hidden_widths = {32, 32, 32};
      cfg.seed = seed;
      cfg.epochs = 25;
      auto [model, history] = train(cfg, ds.inputs, ds.targets);
      for (double v : history.epoch_nll) REQUIRE(std::isfinite(v));
    }
  }

  SECTION("empty dataset rejected") {
    MdnConfig cfg;
    Eigen::MatrixXd empty(0, 1);
    CHECK_THROWS_AS(train(cfg, empty, empty), std::invalid_argument);
  }

  SECTION("forward stays valid for randomly perturbed parameters") {
    RandomSource rng(66);
    for (int trial = 0; trial < 20; ++trial) {
      MdnConfig cfg = small_config(rng);
      MdnModel model = init_mdn(cfg);
      Eigen::VectorXd flat = to_flat(model);
      for (Eigen::Index i = 0; i < flat.size(); ++i)
        flat[i] += rng.uniform(-50.0, 50.0);
      from_flat(model, flat);
      Eigen::VectorXd x(cfg.input_dim);
      for (int j = 0; j < cfg.input_dim; ++j) x[j] = rng.uniform(-3.0, 3.0);
      const Mixture m = forward(model, x);
      CHECK_THAT(m.weights().sum(), Catch::Matchers::WithinAbs(1.0, 1e-9));
      for (const auto& c : m.components()) {
        CHECK(c.std.minCoeff() >= kSigmaFloor);
        CHECK(c.mean.allFinite());
      }
    }
  }
}
