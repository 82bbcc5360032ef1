#include <gtest/gtest.h>

#include <cmath>

#include "ocdc/losses.hpp"
#include "ocdc/rng.hpp"

namespace ocdc {
namespace {

struct MapPair {
  PredictedDomainMap pred;
  DomainLabelMap labels;
};

MapPair make_maps(int rows, int cols, const std::vector<int>& labels, const std::vector<double>& probs) {
  const ImageSize size{cols * 16, rows * 16};
  DomainLabelMap map(size, 16, Domain::Source);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      map.set(r, c, labels[r * cols + c] ? Domain::Target : Domain::Source);
    }
  }
  return {{rows, cols, probs, size, 16}, map};
}

MapPair random_maps(Rng& rng, int rows, int cols, double lo, double hi) {
  std::vector<int> labels(rows * cols);
  std::vector<double> probs(rows * cols);
  for (int i = 0; i < rows * cols; ++i) {
    labels[i] = static_cast<int>(rng.uniform_int(0, 1));
    probs[i] = rng.uniform_real(lo, hi);
  }
  return make_maps(rows, cols, labels, probs);
}

// Per-cell binary cross-entropy, summed term by term.
double scalar_sum(const std::vector<int>& labels, const std::vector<double>& probs) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = probs[i];
    total += labels[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return total;
}

TEST(AdversarialLoss, SymmetricPoint) {
  const auto m = make_maps(1, 1, {0}, {0.5});
  const auto out = adversarial_loss(m.pred, m.labels);
  EXPECT_NEAR(out.loss, std::log(2.0), 1e-12);
  EXPECT_NEAR(out.grad[0], 2.0, 1e-12);
}

TEST(AdversarialLoss, PerfectPredictionLimit) {
  const auto m = make_maps(1, 1, {1}, {1.0 - kProbEpsilon});
  const auto out = adversarial_loss(m.pred, m.labels);
  EXPECT_NEAR(out.loss, kProbEpsilon, 1e-13);
  EXPECT_NEAR(out.grad[0], -1.0, 1e-6);
}

TEST(AdversarialLoss, SaturatedPredictionsAreClamped) {
  const auto m = make_maps(1, 2, {1, 0}, {0.0, 1.0});
  const auto out = adversarial_loss(m.pred, m.labels);
  EXPECT_TRUE(std::isfinite(out.loss));
  EXPECT_NEAR(out.loss, -2.0 * std::log(kProbEpsilon), 1e-9);
  EXPECT_TRUE(std::isfinite(out.grad[0]));
}

TEST(AdversarialLoss, TwoByTwoScalarSum) {
  const std::vector<int> labels{0, 1, 1, 0};
  const std::vector<double> probs{0.2, 0.8, 0.4, 0.9};
  const auto m = make_maps(2, 2, labels, probs);
  const double expected = -std::log(0.8) - std::log(0.8) - std::log(0.4) - std::log(0.1);
  EXPECT_NEAR(scalar_sum(labels, probs), expected, 1e-12);
  EXPECT_NEAR(adversarial_loss(m.pred, m.labels).loss, expected, 1e-12);
}

TEST(AdversarialLoss, GradientMatchesCentralDifferences) {
  Rng rng(12);
  const double h = 1e-6;
  for (int trial = 0; trial < 40; ++trial) {
    const int rows = static_cast<int>(rng.uniform_int(1, 8));
    const int cols = static_cast<int>(rng.uniform_int(1, 8));
    auto m = random_maps(rng, rows, cols, 0.02, 0.98);
    const auto analytic = adversarial_loss(m.pred, m.labels).grad;
    for (std::size_t i = 0; i < m.pred.values.size(); ++i) {
      auto plus = m.pred;
      auto minus = m.pred;
      plus.values[i] += h;
      minus.values[i] -= h;
      const double numeric =
          (adversarial_loss(plus, m.labels).loss - adversarial_loss(minus, m.labels).loss) / (2 * h);
      ASSERT_LE(std::abs(numeric - analytic[i]), 1e-4 * std::abs(analytic[i])) << "cell " << i;
    }
  }
}

TEST(AdversarialLoss, NonNegativeAndLabelSwapInvariant) {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = random_maps(rng, 5, 6, 0.0, 1.0);
    const double loss = adversarial_loss(m.pred, m.labels).loss;
    ASSERT_GE(loss, 0.0);
    auto swapped = m;
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 6; ++c) swapped.labels.set(r, c, m.labels.at(r, c) ? Domain::Source : Domain::Target);
    }
    for (auto& p : swapped.pred.values) p = 1.0 - p;
    ASSERT_NEAR(adversarial_loss(swapped.pred, swapped.labels).loss, loss, 1e-9 * std::max(1.0, loss));
  }
}

TEST(AdversarialLoss, MeanReduction) {
  const auto m = make_maps(1, 2, {0, 1}, {0.5, 0.5});
  const auto mean = adversarial_loss(m.pred, m.labels, Reduction::Mean);
  EXPECT_NEAR(mean.loss, std::log(2.0), 1e-12);
  EXPECT_NEAR(mean.grad[0], 1.0, 1e-12);
  EXPECT_NEAR(mean.grad[1], -1.0, 1e-12);
}

TEST(AdversarialLoss, ShapeMismatch) {
  auto m = make_maps(2, 2, {0, 0, 0, 0}, {0.5, 0.5, 0.5, 0.5});
  m.pred.cols = 1;
  m.pred.values.resize(2);
  EXPECT_THROW(adversarial_loss(m.pred, m.labels), std::invalid_argument);
}

TEST(TotalLoss, Arithmetic) {
  const auto b = total_loss(1.0, 2.0, 3.0, 4.0, 0.1);
  EXPECT_EQ(b.total, 3.7);
  EXPECT_EQ(b.lambda_adv, 0.1);
  EXPECT_EQ(total_loss(0.0, 0.0, 123.0, 456.0, 0.0).total, 0.0);
  EXPECT_EQ(total_loss(1.25, 2.5, 0.0, 0.0, 0.7).total, 3.75);
  EXPECT_EQ(total_loss(1.0, 1.0, 1.0, 1.0).lambda_adv, 0.1);
  EXPECT_THROW(total_loss(1.0, 1.0, 1.0, 1.0, -0.1), std::invalid_argument);
}

}  // namespace
}  // namespace ocdc
