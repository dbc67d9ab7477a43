#include "alnf/optim.hpp"

#include <cmath>
#include <numbers>

#include "alnf/errors.hpp"

namespace alnf {

double warmup_cosine_lr(double max_lr, long step, long warmup_steps, long total_steps) {
    if (step < warmup_steps) {
        return max_lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
    }
    const long decay_span = total_steps - warmup_steps;
    if (decay_span <= 0) return max_lr;
    double progress = static_cast<double>(step - warmup_steps) / static_cast<double>(decay_span);
    progress = std::min(1.0, std::max(0.0, progress));
    return 0.5 * max_lr * (1.0 + std::cos(std::numbers::pi * progress));
}

Adam::Adam(std::size_t n, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad,
                std::span<const ParamGroup> groups) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw ShapeMismatch("optimizer state does not match parameter count");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (const ParamGroup& g : groups) {
        for (std::size_t i = g.begin; i < g.end; ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
            const double m_hat = m_[i] / bc1;
            const double v_hat = v_[i] / bc2;
            params[i] -= g.lr * m_hat / (std::sqrt(v_hat) + eps_);
        }
    }
}

}  // namespace alnf
