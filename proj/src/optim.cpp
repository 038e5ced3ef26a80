#include "sib/optim.hpp"

#include <cmath>

#include "sib/kernels.hpp"

namespace sib {

void sgd_update(Param& p, const Matrix& grad, double lr, double sign) {
    require_same_shape(p.value, grad, "sgd_update");
    kern::kernels().axpy(sign * lr, grad.data.data(), p.value.data.data(), grad.size());
}

void Adam::step(Param& p, const Matrix& grad) {
    require_same_shape(p.value, grad, "adam_update");
    Slot& s = slots_[&p];
    if (s.t == 0) {
        s.m = Matrix::zeros(grad.rows, grad.cols);
        s.v = Matrix::zeros(grad.rows, grad.cols);
    }
    ++s.t;
    double b1t = 1.0 - std::pow(cfg_.beta1, static_cast<double>(s.t));
    double b2t = 1.0 - std::pow(cfg_.beta2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < grad.size(); ++i) {
        double g = grad.data[i];
        s.m.data[i] = cfg_.beta1 * s.m.data[i] + (1.0 - cfg_.beta1) * g;
        s.v.data[i] = cfg_.beta2 * s.v.data[i] + (1.0 - cfg_.beta2) * g * g;
        double mhat = s.m.data[i] / b1t;
        double vhat = s.v.data[i] / b2t;
        p.value.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
}

}  // namespace sib
