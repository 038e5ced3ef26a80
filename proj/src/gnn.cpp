#include "sib/gnn.hpp"

#include <algorithm>
#include <numeric>

namespace sib {

Mlp Mlp::make(const std::string& prefix, const std::vector<int>& dims, Rng& rng) {
    if (dims.size() < 2) throw ConfigError("mlp needs at least input and output dims");
    Mlp m;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Param w{prefix + ".W" + std::to_string(l), Matrix(dims[l], dims[l + 1])};
        Param b{prefix + ".b" + std::to_string(l), Matrix(1, dims[l + 1])};
        init_uniform(w, dims[l], rng);
        init_uniform(b, dims[l], rng);
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    return m;
}

Var Mlp::forward(Tape& t, Bindings& b, Var x) const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        Var w = b.bind(t, const_cast<Param&>(weights[l]));
        Var bias = b.bind(t, const_cast<Param&>(biases[l]));
        x = t.add_rowvec(t.matmul(x, w), bias);
        if (l + 1 < weights.size()) x = t.relu(x);
    }
    return x;
}

Var Mlp::forward_frozen(Tape& t, Var x) const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        Var w = Bindings::bind_frozen(t, weights[l]);
        Var bias = Bindings::bind_frozen(t, biases[l]);
        x = t.add_rowvec(t.matmul(x, w), bias);
        if (l + 1 < weights.size()) x = t.relu(x);
    }
    return x;
}

void Mlp::collect(std::vector<Param*>& out) {
    for (auto& w : weights) out.push_back(&w);
    for (auto& b : biases) out.push_back(&b);
}

void Mlp::collect_const(std::vector<const Param*>& out) const {
    for (auto& w : weights) out.push_back(&w);
    for (auto& b : biases) out.push_back(&b);
}

GcnEncoder GcnEncoder::make(const std::string& prefix, int in_dim, int hidden, int layers,
                            Rng& rng) {
    if (layers < 1) throw ConfigError("encoder needs at least one layer");
    GcnEncoder enc;
    int d = in_dim;
    for (int l = 0; l < layers; ++l) {
        Param w{prefix + ".W" + std::to_string(l), Matrix(d, hidden)};
        init_uniform(w, d, rng);
        enc.weights.push_back(std::move(w));
        d = hidden;
    }
    return enc;
}

Var GcnEncoder::encode(Tape& t, Bindings& b, Var ahat, Var features) const {
    Var x = features;
    for (const Param& wp : weights) {
        Var w = b.bind(t, const_cast<Param&>(wp));
        x = t.relu(t.matmul(ahat, t.matmul(x, w)));
    }
    return x;
}

Var GcnEncoder::encode_frozen(Tape& t, Var ahat, Var features) const {
    Var x = features;
    for (const Param& wp : weights) {
        Var w = Bindings::bind_frozen(t, wp);
        x = t.relu(t.matmul(ahat, t.matmul(x, w)));
    }
    return x;
}

void GcnEncoder::collect(std::vector<Param*>& out) {
    for (auto& w : weights) out.push_back(&w);
}

void GcnEncoder::collect_const(std::vector<const Param*>& out) const {
    for (auto& w : weights) out.push_back(&w);
}

AttentionReadout AttentionReadout::make(const std::string& prefix, int hidden, Rng& rng) {
    AttentionReadout att;
    att.phi1 = Param{prefix + ".phi1", Matrix(hidden, hidden)};
    att.phi2 = Param{prefix + ".phi2", Matrix(1, hidden)};
    init_uniform(att.phi1, hidden, rng);
    init_uniform(att.phi2, hidden, rng);
    return att;
}

AttentionReadout::Result AttentionReadout::forward(Tape& t, Bindings& b,
                                                   Var node_embeddings) const {
    Var p1 = b.bind(t, const_cast<Param&>(phi1));
    Var p2 = b.bind(t, const_cast<Param&>(phi2));
    // phi2 * tanh(phi1 * X'^T): 1 x n raw scores
    Var raw = t.matmul(p2, t.tanh_act(t.matmul(p1, t.transpose(node_embeddings))));
    Var scores = t.rowwise_softmax(raw);
    Var emb = t.matmul(scores, node_embeddings);
    return {emb, scores};
}

AttentionReadout::Result AttentionReadout::forward_frozen(Tape& t, Var node_embeddings) const {
    Var p1 = Bindings::bind_frozen(t, phi1);
    Var p2 = Bindings::bind_frozen(t, phi2);
    Var raw = t.matmul(p2, t.tanh_act(t.matmul(p1, t.transpose(node_embeddings))));
    Var scores = t.rowwise_softmax(raw);
    Var emb = t.matmul(scores, node_embeddings);
    return {emb, scores};
}

void AttentionReadout::collect(std::vector<Param*>& out) {
    out.push_back(&phi1);
    out.push_back(&phi2);
}

void AttentionReadout::collect_const(std::vector<const Param*>& out) const {
    out.push_back(&phi1);
    out.push_back(&phi2);
}

Var sum_readout(Tape& t, Var node_embeddings) {
    const Matrix& m = t.value(node_embeddings);
    Var ones = t.constant(Matrix::constant(1, m.rows, 1.0));
    return t.matmul(ones, node_embeddings);
}

Var mean_readout(Tape& t, Var node_embeddings) {
    const Matrix& m = t.value(node_embeddings);
    Var w = t.constant(Matrix::constant(1, m.rows, 1.0 / m.rows));
    return t.matmul(w, node_embeddings);
}

std::vector<int> topk_attention_subgraph(const Graph& g, const Matrix& scores, double ratio) {
    if (ratio <= 0.0 || ratio > 1.0)
        throw DomainError("topk ratio must lie in (0, 1]");
    if (scores.size() != static_cast<std::size_t>(g.n))
        throw ShapeError("scores length " + std::to_string(scores.size()) +
                         " does not match node count " + std::to_string(g.n));
    int k = static_cast<int>(std::ceil(ratio * g.n));
    std::vector<int> order(g.n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores.data[a] != scores.data[b]) return scores.data[a] > scores.data[b];
        return a < b;
    });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

Matrix encode_plain(const GcnEncoder& enc, const Graph& g) {
    Tape t;
    Var ahat = t.constant(normalize_adjacency(g));
    Var x = t.constant(g.features);
    Var out = enc.encode_frozen(t, ahat, x);
    return t.value(out);
}

}  // namespace sib
