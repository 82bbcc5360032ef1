#include "ocdc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ocdc {

AdversarialLoss adversarial_loss(const PredictedDomainMap& pred, const DomainLabelMap& labels,
                                 Reduction reduction) {
  if (pred.rows != labels.rows() || pred.cols != labels.cols() ||
      pred.values.size() != static_cast<std::size_t>(pred.rows) * pred.cols) {
    throw std::invalid_argument("adversarial_loss: prediction map " + std::to_string(pred.rows) +
                                "x" + std::to_string(pred.cols) + " does not match label map " +
                                std::to_string(labels.rows()) + "x" +
                                std::to_string(labels.cols()));
  }
  AdversarialLoss out;
  out.grad.resize(pred.values.size());
  const auto cells = labels.cells();
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double p = std::clamp(pred.values[i], kProbEpsilon, 1.0 - kProbEpsilon);
    if (cells[i]) {
      sum -= std::log(p);
      out.grad[i] = -1.0 / p;
    } else {
      sum -= std::log(1.0 - p);
      out.grad[i] = 1.0 / (1.0 - p);
    }
  }
  out.loss = sum;
  if (reduction == Reduction::Mean && !pred.values.empty()) {
    const auto n = static_cast<double>(pred.values.size());
    out.loss /= n;
    for (double& g : out.grad) g /= n;
  }
  return out;
}

LossBreakdown total_loss(double det_source, double det_target, double adv_source,
                         double adv_target, double lambda_adv) {
  if (lambda_adv < 0.0) {
    throw std::invalid_argument("total_loss: lambda_adv must be >= 0");
  }
  LossBreakdown b{det_source, det_target, adv_source, adv_target, lambda_adv, 0.0};
  b.total = det_source + det_target + lambda_adv * (adv_source + adv_target);
  return b;
}

}  // namespace ocdc
