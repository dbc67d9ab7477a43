#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace alnf {

/// Linear warmup to max_lr, then cosine decay to zero. step is 0-based.
double warmup_cosine_lr(double max_lr, long step, long warmup_steps, long total_steps);

/// Contiguous parameter range sharing one learning rate.
struct ParamGroup {
    std::size_t begin = 0;
    std::size_t end = 0;
    double lr = 0.0;
};

/// Adam with bias correction, weight decay 0.
class Adam {
public:
    Adam(std::size_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step(std::span<double> params, std::span<const double> grad,
              std::span<const ParamGroup> groups);

    long steps_taken() const { return t_; }

private:
    double beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<double> m_, v_;
};

}  // namespace alnf
