#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sib/params.hpp"

namespace sib {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    int worst_index = -1;
    double analytic = 0.0;
    double numeric = 0.0;
    bool pass = false;
};

// Builds the loss through `f` (which must bind every parameter it uses via
// the given Bindings), runs backward, and compares each coordinate's
// gradient against central differences (f(x+h) - f(x-h)) / 2h. Relative
// error uses max(|analytic|, |numeric|, 1) as denominator.
//
// `f` must be deterministic: any sampling inside must be re-seeded per call.
GradCheckReport grad_check(const std::function<Var(Tape&, Bindings&)>& f,
                           const std::vector<Param*>& params, double h, double tol);

}  // namespace sib
