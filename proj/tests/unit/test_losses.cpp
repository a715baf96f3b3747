#include <doctest.h>

#include <cmath>
#include <vector>

#include "ptgnn/ad/tape.hpp"
#include "ptgnn/common/errors.hpp"
#include "ptgnn/loss/losses.hpp"
#include "test_support.hpp"

using namespace ptgnn;
using namespace ptgnn::loss;

namespace {

// Central-difference derivative of a loss wrt each prediction.
template <typename F>
std::vector<double> numeric_grad(F f, std::vector<double> pred, double h = 1e-6) {
  std::vector<double> g(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double keep = pred[i];
    pred[i] = keep + h;
    const double up = f(pred);
    pred[i] = keep - h;
    const double dn = f(pred);
    pred[i] = keep;
    g[i] = (up - dn) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("mse_loss") {
  const std::vector<double> t{1.0, -2.0, 3.5};
  CHECK(mse_loss(t, t) == 0.0);
  CHECK(mse_loss(std::vector<double>{2.0}, std::vector<double>{0.0}) == 4.0);
  const std::vector<double> pred{0.5, -1.0, 4.0};
  std::vector<double> g(3);
  mse_loss(pred, t, g);
  const auto num = numeric_grad([&](const std::vector<double>& p) { return mse_loss(p, t); }, pred);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(g[i] == doctest::Approx(2.0 / 3.0 * (pred[i] - t[i])).epsilon(1e-15));
    CHECK(std::abs(g[i] - num[i]) < 1e-8);
  }
  CHECK_THROWS(mse_loss(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}));
  CHECK_THROWS(mse_loss(std::vector<double>{}, std::vector<double>{}));
}

TEST_CASE("pt_weight branches") {
  CHECK(pt_weight(50) == 50.0);
  CHECK(pt_weight(79.9) == 79.9);
  CHECK(pt_weight(80) == 2.4);
  CHECK(pt_weight(159.99) == 2.4);
  CHECK(pt_weight(160) == 12.4);
  CHECK(pt_weight(1000) == 12.4);
  CHECK_THROWS(pt_weight(0.0));
  CHECK_THROWS(pt_weight(-1.0));
}

TEST_CASE("pt_informed_loss") {
  LossConfig cfg;
  cfg.kind = LossKind::PtInformed;
  CHECK(pt_informed_loss(std::vector<double>{90.0}, std::vector<double>{100.0}, cfg) ==
        doctest::Approx(0.96).epsilon(1e-15));
  const std::vector<double> t{10.0, 90.0, 200.0};
  CHECK(pt_informed_loss(t, t, cfg) == 0.0);

  // Gradient ratio for equal residuals follows the weight ratio.
  auto grad_at = [&](double truth) {
    std::vector<double> g(1);
    pt_informed_loss(std::vector<double>{truth - 1.5}, std::vector<double>{truth}, cfg, g);
    return std::abs(g[0]);
  };
  CHECK(std::abs(grad_at(160) / grad_at(80) - 12.4 / 2.4) < 1e-12);
  CHECK(std::abs(grad_at(50) / grad_at(100) - 50.0 / 2.4) < 1e-12);

  // Finite differences away from the breakpoints.
  const std::vector<double> pred{12.0, 85.0, 180.0};
  std::vector<double> g(3);
  pt_informed_loss(pred, t, cfg, g);
  const auto num = numeric_grad([&](const std::vector<double>& p) { return pt_informed_loss(p, t, cfg); }, pred);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(g[i] - num[i]) < 1e-8);

  // A constant weight equal to C reduces to MSE.
  const double C = 250.0;
  const std::vector<double> p2{1.0, 2.0, 5.0}, t2{1.5, 0.5, 4.0};
  CHECK(pt_informed_loss(p2, t2, C, [&](double) { return C; }) == doctest::Approx(mse_loss(p2, t2)).epsilon(1e-15));
  CHECK_THROWS(pt_informed_loss(p2, std::vector<double>{1.0, -1.0, 2.0}, cfg));
}

TEST_CASE("custom_pt_penalty") {
  const double lpl = 2.0;
  CHECK(custom_pt_penalty(lpl, lpl) == 0.5);
  CHECK(custom_pt_penalty(lpl - 1.0, lpl) == 0.5);
  CHECK(std::abs(custom_pt_penalty(lpl + 1e-9, lpl) + 0.5) < 1e-8);
  CHECK(custom_pt_penalty(lpl + 10, lpl) == doctest::Approx(-std::exp(-30.0) / (1.0 + std::exp(-30.0))).epsilon(1e-6));
  CHECK(custom_pt_penalty(lpl + 10, lpl) == doctest::Approx(-9.357622968839299e-14).epsilon(1e-6));
  // Jump across the limit: exact where the first representable step above lpl
  // is below round-off of exp, and within an ulp of 1 elsewhere.
  CHECK(custom_pt_penalty(0.0, 0.0) - custom_pt_penalty(std::nextafter(0.0, 1.0), 0.0) == 1.0);
  CHECK(std::abs(custom_pt_penalty(lpl, lpl) - custom_pt_penalty(std::nextafter(lpl, 10.0), lpl) - 1.0) < 1e-15);
  double prev = custom_pt_penalty(lpl + 1e-6, lpl);
  for (int i = 1; i <= 1000; ++i) {
    const double v = custom_pt_penalty(lpl + 1e-6 + 0.01 * i, lpl);
    CHECK(v >= prev);
    CHECK(v < 0.0);
    CHECK(v >= -0.5);
    prev = v;
  }
}

TEST_CASE("custom_pt_loss") {
  LossConfig cfg;
  cfg.kind = LossKind::CustomPt;
  cfg.lpl = 2.0;
  const double at_truth = custom_pt_loss(std::vector<double>{10.0}, std::vector<double>{10.0}, cfg);
  CHECK(at_truth == doctest::Approx(-std::exp(-24.0) / (1.0 + std::exp(-24.0))).epsilon(1e-9));
  CHECK(at_truth == doctest::Approx(-3.775e-11).epsilon(1e-3));

  std::vector<double> g(1);
  const double below = custom_pt_loss(std::vector<double>{0.0}, std::vector<double>{7.0}, cfg, g);
  CHECK(below == 25.0 + 0.5);
  CHECK(g[0] == 0.0);

  const std::vector<double> pred{3.0, 8.0, 15.0}, t{5.0, 7.5, 20.0};
  std::vector<double> g3(3);
  custom_pt_loss(pred, t, cfg, g3);
  const auto num = numeric_grad([&](const std::vector<double>& p) { return custom_pt_loss(p, t, cfg); }, pred);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(g3[i] - num[i]) < 1e-7);
}

TEST_CASE("loss dispatch and tape form agree") {
  const std::vector<double> pred{3.0, 85.0, 170.0}, t{5.0, 90.0, 165.0};
  for (auto kind : {LossKind::MSE, LossKind::PtInformed, LossKind::CustomPt}) {
    CAPTURE(to_string(kind));
    LossConfig cfg;
    cfg.kind = kind;
    std::vector<double> g(3);
    const double v = compute_loss(cfg, pred, t, g);
    ad::Tape tape;
    const auto p = tape.input(ad::Tensor({3, 1}, pred));
    const auto l = loss_on_tape(tape, p, t, cfg);
    tape.backward(l);
    CHECK(tape.value(l).item() == doctest::Approx(v).epsilon(1e-14));
    for (std::size_t i = 0; i < 3; ++i) CHECK(tape.grad(p)[i] == doctest::Approx(g[i]).epsilon(1e-14));
  }
  CHECK(parse_loss_kind("custom") == LossKind::CustomPt);

  LossConfig custom;
  custom.kind = LossKind::CustomPt;
  CHECK(reported_prediction(custom, -5.0) == custom.lpl);
  CHECK(reported_prediction(custom, 7.0) == 7.0);
  CHECK(reported_prediction(LossConfig{}, -5.0) == -5.0);
  CHECK_THROWS_AS(parse_loss_kind("l1"), UsageError);
}
