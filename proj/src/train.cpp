#include "sib/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sib/kernels.hpp"

namespace sib {

namespace {

Var assignment_for(Tape& t, Bindings& b, const ModelState& state, Var xl,
                   const TrainConfig& cfg, Rng& rng) {
    if (cfg.relaxation == Relaxation::Gumbel)
        return gumbel_assignment(t, b, state, xl, cfg.tau, rng);
    return generate_assignment(t, b, state, xl);
}

void check_finite(double v, int step, const char* component) {
    if (!std::isfinite(v)) throw DivergenceError(step, component);
}

}  // namespace

std::vector<std::pair<Matrix, Matrix>> detached_pairs(const ModelState& state,
                                                      const std::vector<const Graph*>& batch,
                                                      const TrainConfig& cfg,
                                                      Rng& sample_rng) {
    std::vector<std::pair<Matrix, Matrix>> pairs;
    pairs.reserve(batch.size());
    for (const Graph* g : batch) {
        Tape t;
        Bindings b;  // unused gradients: everything is evaluated frozen
        Var ahat = t.constant(normalize_adjacency(*g));
        Var x = t.constant(g->features);
        Var xl = state.encoder.encode_frozen(t, ahat, x);
        Var logits = state.assign.forward_frozen(t, xl);
        Var s;
        if (cfg.relaxation == Relaxation::Gumbel) {
            const Matrix& L = t.value(logits);
            Matrix noise(L.rows, L.cols);
            for (double& v : noise.data) v = rng_gumbel(sample_rng);
            s = t.rowwise_softmax(t.scale(t.add(logits, t.constant(noise)), 1.0 / cfg.tau));
        } else {
            s = t.rowwise_softmax(logits);
        }
        Var semb = subgraph_embedding(t, s, xl);
        Var gemb = sum_readout(t, xl);
        pairs.emplace_back(t.value(gemb), t.value(semb));
    }
    return pairs;
}

InnerResult inner_loop(ModelState& state, const std::vector<std::pair<Matrix, Matrix>>& pairs,
                       int steps, double eta1, bool reinit) {
    if (state.mode != ModelMode::Sib)
        throw DomainError("inner_loop: model has no statistics network");
    if (pairs.size() < 2) throw DomainError("inner_loop: needs at least two pairs");
    if (steps < 1) throw ConfigError("inner_loop: steps must be >= 1");
    if (reinit) state.reset_stats();

    const std::size_t n = pairs.size();
    auto build = [&](Tape& t, Bindings& b, bool trainable) {
        std::vector<Var> pos, neg;
        pos.reserve(n);
        neg.reserve(n);
        std::vector<Var> ge(n), se(n);
        for (std::size_t i = 0; i < n; ++i) {
            ge[i] = t.constant(pairs[i].first);
            se[i] = t.constant(pairs[i].second);
        }
        for (std::size_t i = 0; i < n; ++i) {
            pos.push_back(statistics_score(t, b, state, ge[i], se[i], trainable));
            neg.push_back(statistics_score(t, b, state, ge[i], se[(i + 1) % n], trainable));
        }
        return mi_lower_bound(t, pos, neg);
    };

    InnerResult res;
    std::vector<Param*> params = state.stats_params();
    // Plain ascent undertrains the witness at this scale (the DV estimate
    // stays near zero for any stable step size), so the inner loop ascends
    // with Adam. Optimizer state starts fresh with every inner phase.
    Adam opt(AdamConfig{eta1});
    for (int s = 0; s < steps; ++s) {
        Tape t;
        Bindings b;
        Var lmi = build(t, b, true);
        double v = t.scalar(lmi);
        check_finite(v, s, "l_mi (inner loop)");
        res.mi_trace.push_back(v);
        t.backward(lmi);
        for (Param* p : params) {
            Matrix g = b.grad(t, *p);
            kern::kernels().scale(g.data.data(), -1.0, g.data.data(), g.size());
            opt.step(*p, g);
        }
    }
    {
        Tape t;
        Bindings b;
        double v = t.scalar(build(t, b, false));
        check_finite(v, steps, "l_mi (inner loop)");
        res.mi_trace.push_back(v);
    }
    return res;
}

SibLossBreakdown outer_step(const std::vector<const Graph*>& batch, ModelState& state,
                            const TrainConfig& cfg, Adam& opt, Rng& sample_rng, int step) {
    if (batch.size() < 2)
        throw DomainError("outer_step: the MI estimator needs a batch of at least two graphs");
    Tape t;
    Bindings b;
    std::vector<Var> lcls, lcon, sembs, gembs;
    for (const Graph* g : batch) {
        Var ahat = t.constant(normalize_adjacency(*g));
        Var x = t.constant(g->features);
        Var xl = state.encoder.encode(t, b, ahat, x);
        Var s = assignment_for(t, b, state, xl, cfg, sample_rng);
        Var semb = subgraph_embedding(t, s, xl);
        lcls.push_back(classification_loss(t, b, state, semb, *g, state.task));
        lcon.push_back(connectivity_loss(t, s, t.constant(g->adjacency)));
        sembs.push_back(semb);
        gembs.push_back(sum_readout(t, xl));
    }
    std::vector<Var> pos, neg;
    const std::size_t n = batch.size();
    for (std::size_t i = 0; i < n; ++i) {
        pos.push_back(statistics_score(t, b, state, gembs[i], sembs[i], false));
        neg.push_back(statistics_score(t, b, state, gembs[i], sembs[(i + 1) % n], false));
    }
    Var l_cls = mean_of(t, lcls);
    Var l_con = mean_of(t, lcon);
    Var l_mi = mi_lower_bound(t, pos, neg);
    Var total = t.add(t.add(l_cls, t.scale(l_con, cfg.alpha)), t.scale(l_mi, cfg.beta));

    SibLossBreakdown bd;
    bd.l_cls = t.scalar(l_cls);
    bd.l_con = t.scalar(l_con);
    bd.l_mi = t.scalar(l_mi);
    bd.total = t.scalar(total);
    check_finite(bd.l_cls, step, "l_cls");
    check_finite(bd.l_con, step, "l_con");
    check_finite(bd.l_mi, step, "l_mi");
    check_finite(bd.total, step, "total");

    t.backward(total);
    for (Param* p : state.outer_params()) opt.step(*p, b.grad(t, *p));
    return bd;
}

namespace {

SibLossBreakdown baseline_step(const std::vector<const Graph*>& batch, ModelState& state,
                               const TrainConfig& cfg, Adam& opt, int step) {
    Tape t;
    Bindings b;
    std::vector<Var> losses;
    for (const Graph* g : batch) {
        Var ahat = t.constant(normalize_adjacency(*g));
        Var x = t.constant(g->features);
        Var xl = state.encoder.encode(t, b, ahat, x);
        Var emb = state.mode == ModelMode::Attention
                      ? state.att.forward(t, b, xl).embedding
                      : mean_readout(t, xl);
        losses.push_back(classification_loss(t, b, state, emb, *g, state.task));
    }
    Var total = mean_of(t, losses);
    SibLossBreakdown bd;
    bd.l_cls = t.scalar(total);
    bd.total = bd.l_cls;
    check_finite(bd.total, step, "l_cls");
    t.backward(total);
    for (Param* p : state.outer_params()) opt.step(*p, b.grad(t, *p));
    return bd;
}

}  // namespace

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    if (ds.train_idx.empty()) throw ConfigError("train: dataset has an empty train split");
    if (ds.task == TaskKind::Categorical && ds.num_classes < 2)
        throw ConfigError("train: categorical dataset needs at least two classes");

    int out_dim = ds.task == TaskKind::Categorical ? ds.num_classes : 1;
    ModelState state = ModelState::make(cfg.mode, ds.task, ds.feature_dim, out_dim,
                                        cfg.hidden, cfg.layers, cfg.seed);
    Adam opt(AdamConfig{cfg.eta2, 0.9, 0.999, 1e-8});
    Rng sample_rng(derive_seed(cfg.seed, 1));
    Rng batch_rng(derive_seed(cfg.seed, 2));

    std::vector<int> order = ds.train_idx;
    std::size_t cursor = 0;

    TrainResult res;
    for (int step = 0; step < cfg.outer_steps; ++step) {
        // Assemble the step's batch.
        std::vector<int> batch_idx;
        if (cfg.batch_size <= 0 ||
            cfg.batch_size >= static_cast<int>(ds.train_idx.size())) {
            batch_idx = ds.train_idx;
        } else {
            for (int k = 0; k < cfg.batch_size; ++k) {
                if (cursor == 0) rng_shuffle(batch_rng, order);
                batch_idx.push_back(order[cursor]);
                cursor = (cursor + 1) % order.size();
            }
        }

        // DropEdge resamples a fresh corrupted copy every outer step.
        std::vector<Graph> dropped;
        std::vector<const Graph*> batch;
        if (cfg.drop_edge > 0.0) {
            dropped.reserve(batch_idx.size());
            for (int gi : batch_idx)
                dropped.push_back(drop_edges(ds.graphs[gi], cfg.drop_edge, sample_rng()));
            for (const Graph& g : dropped) batch.push_back(&g);
        } else {
            for (int gi : batch_idx) batch.push_back(&ds.graphs[gi]);
        }

        SibLossBreakdown bd;
        if (cfg.mode == ModelMode::Sib) {
            auto pairs = detached_pairs(state, batch, cfg, sample_rng);
            inner_loop(state, pairs, cfg.inner_steps, cfg.eta1, cfg.reinit_inner);
            bd = outer_step(batch, state, cfg, opt, sample_rng, step);
        } else {
            bd = baseline_step(batch, state, cfg, opt, step);
        }

        TraceRow row;
        row.step = step;
        row.l_cls = bd.l_cls;
        row.l_con = bd.l_con;
        row.l_mi = bd.l_mi;
        row.total = bd.total;
        if (!ds.val_idx.empty()) {
            row.val_acc = ds.task == TaskKind::Categorical
                              ? evaluate_accuracy(state, ds, ds.val_idx, cfg.att_ratio)
                              : evaluate_mse(state, ds, ds.val_idx, cfg.att_ratio);
        }
        res.trace.push_back(row);
    }
    res.state = std::move(state);
    return res;
}

Prediction predict(const ModelState& state, const Graph& g, double att_ratio) {
    if (g.features.cols != state.feature_dim)
        throw ShapeError("predict: graph feature width " + std::to_string(g.features.cols) +
                         " does not match model input width " +
                         std::to_string(state.feature_dim));
    Tape t;
    Var ahat = t.constant(normalize_adjacency(g));
    Var x = t.constant(g.features);
    Var xl = state.encoder.encode_frozen(t, ahat, x);

    Prediction p;
    Var emb;
    switch (state.mode) {
        case ModelMode::Sib: {
            Var s = t.rowwise_softmax(state.assign.forward_frozen(t, xl));
            p.assignment = t.value(s);
            p.extraction = extract_subgraph(g, p.assignment);
            p.has_extraction = true;
            Matrix sel(1, g.n);
            for (int i : p.extraction.nodes) sel.at(0, i) = 1.0;
            emb = t.matmul(t.constant(sel), xl);
            break;
        }
        case ModelMode::GcnMean:
            emb = mean_readout(t, xl);
            break;
        case ModelMode::Attention: {
            auto r = state.att.forward_frozen(t, xl);
            emb = r.embedding;
            std::vector<int> nodes = topk_attention_subgraph(g, t.value(r.scores), att_ratio);
            Matrix hard(g.n, 2);
            for (int i = 0; i < g.n; ++i) hard.at(i, 1) = 1.0;
            for (int i : nodes) {
                hard.at(i, 0) = 1.0;
                hard.at(i, 1) = 0.0;
            }
            p.extraction = extract_subgraph(g, hard);
            p.has_extraction = true;
            break;
        }
    }
    Var out = state.classifier.forward_frozen(t, emb);
    p.output = t.value(out);
    if (state.task == TaskKind::Categorical) {
        int best = 0;
        for (int j = 1; j < p.output.cols; ++j)
            if (p.output.at(0, j) > p.output.at(0, best)) best = j;
        p.cls = best;
        p.value = p.output.at(0, best);
    } else {
        p.value = p.output.at(0, 0);
    }
    return p;
}

double evaluate_accuracy(const ModelState& state, const Dataset& ds,
                         const std::vector<int>& idx, double att_ratio) {
    if (idx.empty()) throw DomainError("evaluate_accuracy: empty index list");
    int correct = 0;
    for (int gi : idx) {
        Prediction p = predict(state, ds.graphs[gi], att_ratio);
        if (p.cls == ds.label_of(gi)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(idx.size());
}

double evaluate_mse(const ModelState& state, const Dataset& ds, const std::vector<int>& idx,
                    double att_ratio) {
    if (idx.empty()) throw DomainError("evaluate_mse: empty index list");
    double sum = 0.0;
    for (int gi : idx) {
        Prediction p = predict(state, ds.graphs[gi], att_ratio);
        double d = p.value - ds.graphs[gi].label;
        sum += d * d;
    }
    return sum / static_cast<double>(idx.size());
}

}  // namespace sib
