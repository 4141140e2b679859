#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lmrank {

struct GemConfig {
    double p = 3.0;
};

struct ArcfaceConfig {
    double scale = 30.0;
    double margin = 0.3;  // radians, in [0, pi/2)
};

// Generalized mean over M feature vectors, per dimension:
//   out[d] = ((1/M) * sum_i features[i][d]^p)^(1/p)
// p=1 is the arithmetic mean, p -> inf approaches the elementwise max.
// Entries must be non-negative (fractional powers of negatives are
// undefined); each dimension is factored by its max so large p neither
// overflows nor underflows.
std::vector<double> gem_pool(const std::vector<std::vector<double>>& features,
                             const GemConfig& cfg);

// Scaled cosine logits with an additive angular margin on the target class:
//   logit[j]      = s * cos(theta_j)          for j != target
//   logit[target] = s * cos(theta_t + m)
// cos(theta_j) = <x, W_j> clamped to [-1, 1]; cos(theta+m) is expanded as
// cos*cos(m) - sin*sin(m) with sin = sqrt(max(0, 1 - cos^2)), so no acos is
// evaluated near +-1. x and the rows of W must be unit-norm within 1e-5.
// No easy-margin fallback: theta + m > pi stays the plain formula.
std::vector<double> arcface_logits(std::span<const double> x,
                                   const std::vector<std::vector<double>>& weights,
                                   std::size_t target, const ArcfaceConfig& cfg);

struct ArcfaceLossGrad {
    double loss = 0.0;             // softmax cross-entropy over the margin logits
    std::vector<double> grad_x;    // d loss / d x, x treated as a free vector
};

ArcfaceLossGrad arcface_loss_grad(std::span<const double> x,
                                  const std::vector<std::vector<double>>& weights,
                                  std::size_t target, const ArcfaceConfig& cfg);

}  // namespace lmrank
