#pragma once

#include <optional>

#include "sib/optim.hpp"
#include "sib/sib.hpp"

namespace sib {

struct TraceRow {
    int step = 0;
    double l_cls = 0.0;
    double l_con = 0.0;
    double l_mi = 0.0;
    double total = 0.0;
    std::optional<double> val_acc;  // validation MSE for regression tasks
};

struct InnerResult {
    // L_MI before each of the T ascent steps, plus the value after the last
    // one: T + 1 entries.
    std::vector<double> mi_trace;
};

// T ascent steps on L_MI w.r.t. phi2 over detached (graph-embedding,
// subgraph-embedding) pairs. When `reinit` is set, phi2 restarts from its
// seeded snapshot first, as the bi-level scheme prescribes.
InnerResult inner_loop(ModelState& state,
                       const std::vector<std::pair<Matrix, Matrix>>& pairs, int steps,
                       double eta1, bool reinit);

// One outer update: L = L_cls + alpha * L_con + beta * L_MI with phi2 frozen,
// Adam descent on theta1, theta2, phi1. Throws DivergenceError on a
// non-finite component.
SibLossBreakdown outer_step(const std::vector<const Graph*>& batch, ModelState& state,
                            const TrainConfig& cfg, Adam& opt, Rng& sample_rng, int step);

// Detached embedding pairs for the inner loop, computed with the current
// generator.
std::vector<std::pair<Matrix, Matrix>> detached_pairs(const ModelState& state,
                                                      const std::vector<const Graph*>& batch,
                                                      const TrainConfig& cfg,
                                                      Rng& sample_rng);

struct TrainResult {
    ModelState state;
    std::vector<TraceRow> trace;
};

// Full training per the configured mode. Dataset must carry a nonempty
// train split. Deterministic for a fixed config.
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

struct Prediction {
    int cls = 0;           // argmax class (categorical)
    double value = 0.0;    // scalar output (regression) or top logit
    Matrix output;         // 1 x out_dim
    bool has_extraction = false;
    SubgraphExtraction extraction;
    Matrix assignment;     // n x 2, Sib mode only
};

// Inference path: hard subgraph extraction for Sib, top-k selection for the
// attention baseline, plain mean readout for the GCN baseline.
Prediction predict(const ModelState& state, const Graph& g, double att_ratio = 0.5);

double evaluate_accuracy(const ModelState& state, const Dataset& ds,
                         const std::vector<int>& idx, double att_ratio = 0.5);
double evaluate_mse(const ModelState& state, const Dataset& ds, const std::vector<int>& idx,
                    double att_ratio = 0.5);

}  // namespace sib
