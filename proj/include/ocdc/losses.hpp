#pragma once

#include <vector>

#include "ocdc/domain_labels.hpp"
#include "ocdc/geometry.hpp"

namespace ocdc {

/// Predictions are clamped to [kProbEpsilon, 1 - kProbEpsilon] before use.
inline constexpr double kProbEpsilon = 1e-7;

/// Discriminator sigmoid outputs, one per feature cell, row-major.
struct PredictedDomainMap {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
  ImageSize image_size;
  int stride = 16;

  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

enum class Reduction { Sum, Mean };

struct AdversarialLoss {
  double loss = 0.0;
  /// d loss / d p per cell (row-major), evaluated at the clamped p. This is
  /// the gradient the discriminator descends; a feature extractor trained
  /// adversarially receives it with the sign flipped.
  std::vector<double> grad;
};

/// Per-cell binary cross-entropy against the label map, natural log:
///   loss = -sum [d ln p + (1 - d) ln(1 - p)]
///   grad = -d / p + (1 - d) / (1 - p)
/// Mean divides both by the cell count. Throws std::invalid_argument on a
/// shape mismatch.
AdversarialLoss adversarial_loss(const PredictedDomainMap& pred, const DomainLabelMap& labels,
                                 Reduction reduction = Reduction::Sum);

struct LossBreakdown {
  double det_source = 0.0;
  double det_target = 0.0;
  double adv_source = 0.0;
  double adv_target = 0.0;
  double lambda_adv = 0.1;
  double total = 0.0;
};

/// total = det_source + det_target + lambda_adv * (adv_source + adv_target)
LossBreakdown total_loss(double det_source, double det_target, double adv_source,
                         double adv_target, double lambda_adv = 0.1);

}  // namespace ocdc
