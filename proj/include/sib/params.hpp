#pragma once

#include <string>
#include <vector>

#include "sib/matrix.hpp"
#include "sib/rng.hpp"
#include "sib/tape.hpp"

namespace sib {

// Named trainable tensor with a stable identity across forward passes.
struct Param {
    std::string name;
    Matrix value;
};

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], seeded.
inline void init_uniform(Param& p, int fan_in, Rng& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : p.value.data) v = rng_uniform(rng, -bound, bound);
}

// Records which tape leaf each parameter was bound to during one forward
// pass. After backward(), this is the gradient map: one buffer per bound
// parameter, exact zeros for parameters the loss never touched.
class Bindings {
public:
    // Idempotent per tape: binding the same parameter again returns the
    // existing leaf, so gradients from every use accumulate in one buffer.
    Var bind(Tape& t, Param& p) {
        for (const auto& e : entries_)
            if (e.param == &p) return e.var;
        Var v = t.leaf(p.value);
        entries_.push_back({&p, v});
        return v;
    }

    // Bind as a constant: the parameter participates in the forward value
    // but receives no gradient (frozen, e.g. phi2 during the outer step).
    static Var bind_frozen(Tape& t, const Param& p) { return t.constant(p.value); }

    const Matrix& grad(const Tape& t, const Param& p) const {
        for (const auto& e : entries_)
            if (e.param == &p) return t.grad(e.var);
        throw DomainError("gradient requested for unbound parameter '" + p.name + "'");
    }

    struct Entry {
        Param* param;
        Var var;
    };
    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;
};

}  // namespace sib
