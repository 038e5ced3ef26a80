#pragma once

#include <unordered_map>

#include "sib/params.hpp"

namespace sib {

// Plain gradient step: descent (sign = -1) or ascent (sign = +1).
// The inner loop of the bi-level scheme ascends the MI estimate.
void sgd_update(Param& p, const Matrix& grad, double lr, double sign = -1.0);

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with per-parameter moment state, keyed by parameter identity.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(Param& p, const Matrix& grad);
    void reset() { slots_.clear(); }
    const AdamConfig& config() const { return cfg_; }

private:
    struct Slot {
        Matrix m, v;
        long t = 0;
    };
    AdamConfig cfg_;
    std::unordered_map<const Param*, Slot> slots_;
};

}  // namespace sib
