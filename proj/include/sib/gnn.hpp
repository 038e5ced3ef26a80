#pragma once

#include <vector>

#include "sib/graph.hpp"
#include "sib/params.hpp"

namespace sib {

// Multi-layer perceptron: linear layers with bias, ReLU between layers,
// linear output. dims = {in, hidden..., out}.
struct Mlp {
    std::vector<Param> weights;
    std::vector<Param> biases;

    static Mlp make(const std::string& prefix, const std::vector<int>& dims, Rng& rng);
    // x: r x in -> r x out
    Var forward(Tape& t, Bindings& b, Var x) const;
    Var forward_frozen(Tape& t, Var x) const;
    int in_dim() const { return weights.front().value.rows; }
    int out_dim() const { return weights.back().value.cols; }
    void collect(std::vector<Param*>& out);
    void collect_const(std::vector<const Param*>& out) const;
};

// Stack of GCN layers, each ReLU(Ahat_norm * X * W). The activation is kept
// on the last layer as well.
struct GcnEncoder {
    std::vector<Param> weights;

    static GcnEncoder make(const std::string& prefix, int in_dim, int hidden, int layers,
                           Rng& rng);
    // ahat: constant normalized adjacency node; returns n x h node embeddings
    Var encode(Tape& t, Bindings& b, Var ahat, Var features) const;
    Var encode_frozen(Tape& t, Var ahat, Var features) const;
    int in_dim() const { return weights.front().value.rows; }
    int out_dim() const { return weights.back().value.cols; }
    void collect(std::vector<Param*>& out);
    void collect_const(std::vector<const Param*>& out) const;
};

// Self-attention readout: softmax(phi2 * tanh(phi1 * X'^T)) * X'.
struct AttentionReadout {
    Param phi1;  // h x h
    Param phi2;  // 1 x h

    static AttentionReadout make(const std::string& prefix, int hidden, Rng& rng);
    struct Result {
        Var embedding;  // 1 x h
        Var scores;     // 1 x n, normalized
    };
    Result forward(Tape& t, Bindings& b, Var node_embeddings) const;
    Result forward_frozen(Tape& t, Var node_embeddings) const;
    void collect(std::vector<Param*>& out);
    void collect_const(std::vector<const Param*>& out) const;
};

// Sum and mean readouts over the node axis.
Var sum_readout(Tape& t, Var node_embeddings);
Var mean_readout(Tape& t, Var node_embeddings);

// ceil(ratio * n) highest-score nodes, ties broken toward lower node index.
std::vector<int> topk_attention_subgraph(const Graph& g, const Matrix& scores, double ratio);

// Convenience wrapper for the non-tape encoder path (evaluation helpers).
Matrix encode_plain(const GcnEncoder& enc, const Graph& g);

}  // namespace sib
