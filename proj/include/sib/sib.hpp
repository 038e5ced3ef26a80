#pragma once

#include "sib/model.hpp"

namespace sib {

// Soft node assignment S = rowwise_softmax(MLP(X^l)): n x 2, column 0 is
// p(node in subgraph), column 1 the complement.
Var generate_assignment(Tape& t, Bindings& b, const ModelState& state, Var node_embeddings);

// Gumbel-Softmax relaxed assignment: softmax((logits + gumbel) / tau).
// Deterministic for a given rng state; gradients flow through the softmax.
Var gumbel_assignment(Tape& t, Bindings& b, const ModelState& state, Var node_embeddings,
                      double tau, Rng& rng);

// Row 0 of S^T X^l: the membership-weighted sum of node embeddings (1 x h).
Var subgraph_embedding(Tape& t, Var assignment, Var node_embeddings);

// || Norm(S^T A S) - I_2 ||_F. Rows of S^T A S with sum below eps are
// replaced by [0.5, 0.5] (edgeless degenerate case) with zero gradient.
Var connectivity_loss(Tape& t, Var assignment, Var adjacency, double eps = 1e-12);

// Statistics network score f_phi2(G, G_sub): concatenates the graph
// embedding (sum readout of the shared encoder) with the subgraph embedding.
// `trainable` selects whether phi2 binds with gradients (inner loop) or
// enters frozen (outer loop).
Var statistics_score(Tape& t, Bindings& b, const ModelState& state, Var graph_embedding,
                     Var subgraph_emb, bool trainable);

// DV lower-bound estimate: mean(pos) - log( mean(exp(neg)) ), where neg_i
// pairs G_i with the subgraph embedding of graph (i+1) mod N. Throws
// DomainError when fewer than two pairs exist.
Var mi_lower_bound(Tape& t, const std::vector<Var>& pos_scores,
                   const std::vector<Var>& neg_scores);

// Cross entropy (categorical) or squared error (regression) of the
// classifier on the subgraph embedding against the graph label.
Var classification_loss(Tape& t, Bindings& b, const ModelState& state, Var subgraph_emb,
                        const Graph& g, TaskKind task);

struct SibLossBreakdown {
    double l_cls = 0.0;
    double l_con = 0.0;
    double l_mi = 0.0;
    double total = 0.0;  // l_cls + alpha * l_con + beta * l_mi
};

// Hard extraction: node i is selected iff S_{i0} > S_{i1} (ties excluded).
struct SubgraphExtraction {
    std::vector<int> nodes;                       // selected, ascending
    std::vector<std::vector<int>> components;     // of the induced subgraph
    std::vector<int> largest_component;
    bool empty = false;                           // warning flag, not an error
};
SubgraphExtraction extract_subgraph(const Graph& g, const Matrix& assignment);

// Plain (no-grad) assignment for evaluation/export: the softmax path.
Matrix assignment_matrix(const ModelState& state, const Graph& g);

}  // namespace sib
