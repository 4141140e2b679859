#include "lmrank/feature_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lmrank {

namespace {

constexpr double kUnitNormTol = 1e-5;

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

void check_unit(std::span<const double> v, const std::string& name) {
    const double norm = std::sqrt(dot(v, v));
    if (std::abs(norm - 1.0) > kUnitNormTol) {
        throw std::invalid_argument(name + " must be unit-norm, got norm " +
                                    std::to_string(norm));
    }
}

void check_arcface_inputs(std::span<const double> x,
                          const std::vector<std::vector<double>>& weights, std::size_t target,
                          const ArcfaceConfig& cfg) {
    if (cfg.scale <= 0.0) {
        throw std::invalid_argument("arcface scale must be positive");
    }
    if (cfg.margin < 0.0 || cfg.margin >= 1.5707963267948966) {
        throw std::invalid_argument("arcface margin must be in [0, pi/2)");
    }
    if (weights.empty()) {
        throw std::invalid_argument("arcface needs at least one class");
    }
    if (target >= weights.size()) {
        throw std::invalid_argument("arcface target " + std::to_string(target) +
                                    " out of range for " + std::to_string(weights.size()) +
                                    " classes");
    }
    check_unit(x, "x");
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (weights[j].size() != x.size()) {
            throw std::invalid_argument("weight row " + std::to_string(j) +
                                        " has wrong dimension");
        }
        check_unit(weights[j], "W[" + std::to_string(j) + "]");
    }
}

}  // namespace

std::vector<double> gem_pool(const std::vector<std::vector<double>>& features,
                             const GemConfig& cfg) {
    if (cfg.p <= 0.0) {
        throw std::invalid_argument("gem exponent p must be positive");
    }
    if (features.empty()) {
        throw std::invalid_argument("gem_pool needs at least one feature vector");
    }
    const std::size_t dim = features[0].size();
    for (const auto& f : features) {
        if (f.size() != dim) {
            throw std::invalid_argument("gem_pool feature vectors must share one dimension");
        }
        for (double v : f) {
            if (v < 0.0) {
                throw std::invalid_argument(
                    "gem_pool is undefined for negative activations (got " + std::to_string(v) +
                    ")");
            }
        }
    }

    const double m = static_cast<double>(features.size());
    std::vector<double> out(dim, 0.0);
    for (std::size_t d = 0; d < dim; ++d) {
        double max_v = 0.0;
        for (const auto& f : features) {
            max_v = std::max(max_v, f[d]);
        }
        if (max_v == 0.0) {
            continue;
        }
        double acc = 0.0;
        for (const auto& f : features) {
            acc += std::pow(f[d] / max_v, cfg.p);
        }
        out[d] = max_v * std::pow(acc / m, 1.0 / cfg.p);
    }
    return out;
}

std::vector<double> arcface_logits(std::span<const double> x,
                                   const std::vector<std::vector<double>>& weights,
                                   std::size_t target, const ArcfaceConfig& cfg) {
    check_arcface_inputs(x, weights, target, cfg);
    const double cos_m = std::cos(cfg.margin);
    const double sin_m = std::sin(cfg.margin);
    std::vector<double> logits(weights.size());
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double c = std::clamp(dot(x, weights[j]), -1.0, 1.0);
        if (j == target) {
            const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
            logits[j] = cfg.scale * (c * cos_m - s * sin_m);
        } else {
            logits[j] = cfg.scale * c;
        }
    }
    return logits;
}

ArcfaceLossGrad arcface_loss_grad(std::span<const double> x,
                                  const std::vector<std::vector<double>>& weights,
                                  std::size_t target, const ArcfaceConfig& cfg) {
    const std::vector<double> logits = arcface_logits(x, weights, target, cfg);
    const std::size_t n_classes = logits.size();

    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    std::vector<double> probs(n_classes);
    for (std::size_t j = 0; j < n_classes; ++j) {
        probs[j] = std::exp(logits[j] - max_logit);
        denom += probs[j];
    }
    for (double& p : probs) {
        p /= denom;
    }

    ArcfaceLossGrad out;
    out.loss = -(logits[target] - max_logit - std::log(denom));

    // d logit_j / dx = s * W_j for non-targets; for the target the margin
    // expansion contributes d cos(theta+m)/d cos = cos(m) + cos*sin(m)/sin.
    // At the clamp boundary (|<x,W>| >= 1) the derivative is taken as 0.
    out.grad_x.assign(x.size(), 0.0);
    for (std::size_t j = 0; j < n_classes; ++j) {
        const double err = probs[j] - (j == target ? 1.0 : 0.0);
        const double raw = dot(x, weights[j]);
        double coeff;
        if (raw > 1.0 || raw < -1.0) {
            coeff = 0.0;
        } else if (j == target) {
            const double sin_m = std::sin(cfg.margin);
            if (sin_m == 0.0) {
                coeff = cfg.scale * std::cos(cfg.margin);
            } else {
                const double s = std::sqrt(std::max(0.0, 1.0 - raw * raw));
                if (s == 0.0) {
                    throw std::runtime_error(
                        "arcface gradient is singular when x is exactly (anti)parallel to "
                        "the target weight");
                }
                coeff = cfg.scale * (std::cos(cfg.margin) + raw * sin_m / s);
            }
        } else {
            coeff = cfg.scale;
        }
        for (std::size_t d = 0; d < x.size(); ++d) {
            out.grad_x[d] += err * coeff * weights[j][d];
        }
    }
    return out;
}

}  // namespace lmrank
