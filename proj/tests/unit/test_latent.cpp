#include <cmath>

#include "dlvgen/errors.hpp"
#include "dlvgen/latent.hpp"
#include "dlvgen/ops.hpp"
#include "dlvgen/optim.hpp"
#include "test_support.hpp"

using namespace dlvgen;
using namespace dlvgen::latent;
using dlvgen::testing::expect_tensor_near;

namespace {

// Monte-Carlo estimate of E_q[log q(z) - log p(z)], computed independently of
// the closed form.
double kl_monte_carlo(const GaussianParams& q, const GaussianParams& p, std::size_t samples, Rng& rng) {
  double total = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double log_ratio = 0.0;
    for (std::size_t i = 0; i < q.dim(); ++i) {
      const double sq = std::exp(0.5 * q.log_var[i]);
      const double z = q.mu[i] + sq * rng.normal();
      const double dq = (z - q.mu[i]) * (z - q.mu[i]) / std::exp(q.log_var[i]);
      const double dp = (z - p.mu[i]) * (z - p.mu[i]) / std::exp(p.log_var[i]);
      log_ratio += -0.5 * (q.log_var[i] + dq) + 0.5 * (p.log_var[i] + dp);
    }
    total += log_ratio;
  }
  return total / static_cast<double>(samples);
}

Gaussian make(Graph& g, std::vector<double> mu, std::vector<double> lv) {
  return Gaussian::constant(g, {std::move(mu), std::move(lv)});
}

}  // namespace

TEST(GaussianFromNet, ZeroWeightsGiveStandardNormal) {
  ParameterStore store;
  Rng init(1);
  LatentNetwork net(store, "prior", NetworkKind::response_prior, 3, 2, init);
  net.weight().value.fill(0.0);
  net.bias().value.fill(0.0);
  Graph g;
  const auto gs = gaussian_from_net(net, g.constant(Tensor::vector({1, 2, 3})));
  expect_tensor_near(gs.mu.value(), {0, 0}, 0);
  expect_tensor_near(gs.log_var.value(), {0, 0}, 0);
}

TEST(GaussianFromNet, HandAffineAndShapes) {
  ParameterStore store;
  Rng init(1);
  LatentNetwork net(store, "prior", NetworkKind::persona_prior, 2, 1, init);
  EXPECT_EQ(net.weight().value.rows(), 2u);
  EXPECT_EQ(net.weight().value.cols(), 2u);
  net.weight().value = Tensor::matrix({{1, 0}, {0, 1}});
  net.bias().value.fill(0.0);
  Graph g;
  const auto gs = gaussian_from_net(net, g.constant(Tensor::vector({2, 3})));
  expect_tensor_near(gs.mu.value(), {2}, 0);
  expect_tensor_near(gs.log_var.value(), {3}, 0);
  EXPECT_THROW(gaussian_from_net(net, g.constant(Tensor::vector({1, 2, 3}))), ContractError);
}

TEST(GaussianFromNet, RecognitionTakesConcatenatedInputsInOrder) {
  ParameterStore store;
  Rng init(1);
  LatentNetwork net(store, "recog", NetworkKind::response_recognition, 2, 1, init);
  EXPECT_EQ(net.input_dim(), 4u);
  net.weight().value = Tensor::matrix({{1, 0, 0, 0}, {0, 0, 1, 0}});
  net.bias().value.fill(0.0);
  Graph g;
  const auto gs = gaussian_from_net(net, g.constant(Tensor::vector({7, 8})), g.constant(Tensor::vector({9, 10})));
  expect_tensor_near(gs.mu.value(), {7}, 0);
  expect_tensor_near(gs.log_var.value(), {9}, 0);
}

TEST(GaussianFromNet, LogVarianceIsClamped) {
  ParameterStore store;
  Rng init(1);
  LatentNetwork net(store, "prior", NetworkKind::response_prior, 1, 2, init);
  net.weight().value.fill(0.0);
  net.bias().value = Tensor::vector({0, 0, 50, -50});
  Graph g;
  const auto gs = gaussian_from_net(net, g.constant(Tensor::vector({1})));
  expect_tensor_near(gs.log_var.value(), {20, -20}, 0);
}

TEST(Reparameterize, Examples) {
  Graph g;
  const auto gs = make(g, {1.5, -2}, {0.3, 1.1});
  const double zero[] = {0, 0};
  expect_tensor_near(reparameterize(gs, zero).value(), {1.5, -2}, 0);
  const auto unit = make(g, {0, 0}, {0, 0});
  const double eps[] = {1, -1};
  expect_tensor_near(reparameterize(unit, eps).value(), {1, -1}, 0);
  const double short_eps[] = {1};
  EXPECT_THROW(reparameterize(unit, short_eps), ContractError);
}

TEST(Reparameterize, EmpiricalMomentsWithinThreeStandardErrors) {
  Graph g;
  const auto gs = make(g, {2.0}, {std::log(4.0)});
  Rng rng(17);
  const std::size_t n = 100000;
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = reparameterize(gs, rng).item();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  const double sigma = 2.0;
  EXPECT_LT(std::abs(mean - 2.0), 3.0 * sigma / std::sqrt(double(n)));
  // Standard error of the sample standard deviation ~ sigma / sqrt(2n).
  EXPECT_LT(std::abs(std::sqrt(var) - sigma), 3.0 * sigma / std::sqrt(2.0 * n));
}

TEST(Kl, ClosedFormExamples) {
  Graph g;
  const auto p = make(g, {0.3, -1}, {0.5, -0.2});
  EXPECT_NEAR(kl_diag_gaussian(p, p).item(), 0.0, 1e-12);
  EXPECT_NEAR(kl_diag_gaussian(make(g, {1}, {0}), make(g, {0}, {0})).item(), 0.5, 1e-15);
  EXPECT_NEAR(kl_diag_gaussian(make(g, {0, 0}, {1, 1}), make(g, {0, 0}, {0, 0})).item(), std::exp(1.0) - 2.0, 1e-12);
  EXPECT_NEAR(std::exp(1.0) - 2.0, 0.71828, 1e-5);
  EXPECT_THROW(kl_diag_gaussian(make(g, {0}, {0}), make(g, {0, 0}, {0, 0})), ContractError);
}

TEST(Kl, MatchesMonteCarloOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 4; ++trial) {
    GaussianParams q, p;
    const std::size_t d = 1 + rng.below(8);
    for (std::size_t i = 0; i < d; ++i) {
      q.mu.push_back(rng.uniform() * 2 - 1);
      p.mu.push_back(rng.uniform() * 2 - 1);
      q.log_var.push_back(rng.uniform() * 4 - 2);
      p.log_var.push_back(rng.uniform() * 4 - 2);
    }
    const double closed = kl_diag_gaussian(q, p);
    const double mc = kl_monte_carlo(q, p, 200000, rng);
    EXPECT_NEAR(mc, closed, 0.03 * closed + 0.01) << "trial " << trial;
  }
  // The q = N(1,1), p = N(0,1) example through the oracle.
  EXPECT_NEAR(kl_monte_carlo({{1}, {0}}, {{0}, {0}}, 200000, rng), 0.5, 0.02);
}

TEST(Kl, NonNegativeAndGraphMatchesScalarForm) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    GaussianParams q, p;
    for (int i = 0; i < 5; ++i) {
      q.mu.push_back(rng.normal());
      p.mu.push_back(rng.normal());
      q.log_var.push_back(rng.normal());
      p.log_var.push_back(rng.normal());
    }
    Graph g;
    const double a = kl_diag_gaussian(Gaussian::constant(g, q), Gaussian::constant(g, p)).item();
    EXPECT_GE(a, 0.0);
    EXPECT_NEAR(a, kl_diag_gaussian(q, p), 1e-12);
  }
}

TEST(VarianceReg, ResponseRegExamples) {
  Graph g;
  EXPECT_EQ(variance_reg_r(g.constant(Tensor::vector({0, 0})), 0.5).item(), 0.0);
  EXPECT_NEAR(variance_reg_r(g.constant(Tensor::vector({3, 4})), 0.5).item(), 2.5, 1e-15);
}

TEST(VarianceReg, ResponseRegIsMonotoneInMagnitudes) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> lv(6), smaller(6);
    for (std::size_t i = 0; i < lv.size(); ++i) {
      lv[i] = 4 * rng.uniform() - 2;
      if (lv[i] == 0) lv[i] = 0.5;
      smaller[i] = lv[i] * (0.2 + 0.7 * rng.uniform());
    }
    Graph g;
    EXPECT_LT(variance_reg_r(g.constant(Tensor::vector(smaller)), 0.5).item(),
              variance_reg_r(g.constant(Tensor::vector(lv)), 0.5).item());
  }
}

TEST(VarianceReg, PersonaRegExamples) {
  Graph g;
  EXPECT_NEAR(variance_reg_p(g.constant(Tensor::vector({0.5, 0.5})), 1.0).item(), std::sqrt(8.0), 1e-12);
  EXPECT_NEAR(std::sqrt(8.0), 2.8284, 1e-4);
  // A zero entry saturates at 1 / floor.
  EXPECT_NEAR(variance_reg_p(g.constant(Tensor::vector({0.0})), 1.0).item(), 1000.0, 1e-9);
  EXPECT_NEAR(variance_reg_p(g.constant(Tensor::vector({-1e-6})), 1.0).item(), 1000.0, 1e-9);
  // Norm-of-reciprocal vs reciprocal-of-norm.
  EXPECT_NEAR(variance_reg_p(g.constant(Tensor::vector({3, 4})), 2.0, PrecisionForm::norm_reciprocal).item(),
              0.4, 1e-15);
  EXPECT_NEAR(variance_reg_p(g.constant(Tensor::vector({3, 4})), 2.0).item(),
              2.0 * std::sqrt(1.0 / 9 + 1.0 / 16), 1e-15);
}

TEST(VarianceReg, PrecisionFormNames) {
  EXPECT_EQ(parse_precision_form("elementwise"), PrecisionForm::elementwise);
  EXPECT_EQ(parse_precision_form("norm_reciprocal"), PrecisionForm::norm_reciprocal);
  EXPECT_EQ(precision_form_name(PrecisionForm::norm_reciprocal), "norm_reciprocal");
  EXPECT_THROW(parse_precision_form("other"), ParseError);
}

TEST(LatentGradients, ReparameterizeKlAndRegularizersPassGradCheck) {
  Rng rng(12);
  ParameterStore store;
  auto& mq = store.add("mq", dlvgen::testing::random_tensor({5}, rng));
  auto& lq = store.add("lq", dlvgen::testing::random_tensor({5}, rng));
  auto& mp = store.add("mp", dlvgen::testing::random_tensor({5}, rng));
  auto& lp = store.add("lp", dlvgen::testing::random_tensor({5}, rng));
  const std::vector<double> eps = rng.normal_vector(5);
  auto params = store.all();
  auto check = [&](const LossBuilder& f) { return grad_check(f, params, 1e-5).max_relative_error; };
  auto q = [&](Graph& g) { return Gaussian{g.parameter(mq), g.parameter(lq)}; };
  auto p = [&](Graph& g) { return Gaussian{g.parameter(mp), g.parameter(lp)}; };
  EXPECT_LT(check([&](Graph& g) { return sum(square(reparameterize(q(g), eps))); }), 1e-5);
  EXPECT_LT(check([&](Graph& g) { return kl_diag_gaussian(q(g), p(g)); }), 1e-5);
  EXPECT_LT(check([&](Graph& g) { return variance_reg_r(g.parameter(lq), 0.5); }), 1e-5);
  EXPECT_LT(check([&](Graph& g) { return variance_reg_p(g.parameter(lp), 1.0); }), 1e-5);
  EXPECT_LT(check([&](Graph& g) { return variance_reg_p(g.parameter(lp), 1.0, PrecisionForm::norm_reciprocal); }),
            1e-5);
}

TEST(LatentGradients, NetworkOutputPassesGradCheck) {
  ParameterStore store;
  Rng init(5);
  LatentNetwork net(store, "recog", NetworkKind::persona_recognition, 3, 2, init, 0.5);
  auto params = store.all();
  const auto r = grad_check(
      [&](Graph& g) {
        const auto gs = gaussian_from_net(net, g.constant(Tensor::vector({0.2, -1, 0.7})),
                                          g.constant(Tensor::vector({1, 0.1, -0.3})));
        return add(sum(square(gs.mu)), sum(exp(gs.log_var)));
      },
      params, 1e-5);
  EXPECT_LT(r.max_relative_error, 1e-5);
}
