#pragma once

#include <string>
#include <vector>

#include "spnet/model.hpp"

namespace spnet {

struct GradCheckReport {
  struct Entry {
    std::string param;
    int checked{0};
    double max_rel_err{0};
  };
  std::vector<Entry> entries;
  double max_rel_err{0};

  bool passed(double tol) const { return max_rel_err < tol; }
};

/// Central finite differences against the analytic backward pass on a random
/// subsample of each parameter tensor (whole tensor when smaller). Dropout is
/// excluded; the loss is softmax cross-entropy on the raw scores.
///
/// Perturbations that flip a max-pool argmax straddle a kink where the
/// secant is meaningless; those draws are skipped and replaced. Relative
/// error uses max(|analytic|, |numeric|, 1e-6) as the denominator so
/// vanishing gradients compare absolutely.
GradCheckReport grad_check(const SpnetModel& model, const Tensor& image, int label,
                           double step = 1e-4, int samples_per_layer = 200, uint64_t seed = 1);

}  // namespace spnet
