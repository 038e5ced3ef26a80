#include "sib/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace sib {

GradCheckReport grad_check(const std::function<Var(Tape&, Bindings&)>& f,
                           const std::vector<Param*>& params, double h, double tol) {
    if (h <= 0.0) throw DomainError("grad_check: step h must be positive");

    // Analytic pass.
    std::vector<Matrix> analytic;
    {
        Tape t;
        Bindings b;
        Var loss = f(t, b);
        t.backward(loss);
        analytic.reserve(params.size());
        for (Param* p : params) {
            bool found = false;
            for (const auto& e : b.entries())
                if (e.param == p) {
                    analytic.push_back(t.grad(e.var));
                    found = true;
                    break;
                }
            if (!found) analytic.push_back(Matrix::zeros(p->value.rows, p->value.cols));
        }
    }

    auto eval = [&]() {
        Tape t;
        Bindings b;
        return t.scalar(f(t, b));
    };

    GradCheckReport rep;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Param& p = *params[pi];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            double saved = p.value.data[i];
            p.value.data[i] = saved + h;
            double fp = eval();
            p.value.data[i] = saved - h;
            double fm = eval();
            p.value.data[i] = saved;
            double fd = (fp - fm) / (2.0 * h);
            double g = analytic[pi].data[i];
            double rel = std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1.0});
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst_param = p.name;
                rep.worst_index = static_cast<int>(i);
                rep.analytic = g;
                rep.numeric = fd;
            }
        }
    }
    rep.pass = rep.max_rel_err <= tol;
    return rep;
}

}  // namespace sib
