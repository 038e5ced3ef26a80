#include "sib/sib.hpp"

#include <algorithm>
#include <cmath>

namespace sib {

Var generate_assignment(Tape& t, Bindings& b, const ModelState& state, Var node_embeddings) {
    Var logits = state.assign.forward(t, b, node_embeddings);
    return t.rowwise_softmax(logits);
}

Var gumbel_assignment(Tape& t, Bindings& b, const ModelState& state, Var node_embeddings,
                      double tau, Rng& rng) {
    if (tau <= 0.0) throw DomainError("gumbel_assignment: temperature must be positive");
    Var logits = state.assign.forward(t, b, node_embeddings);
    const Matrix& L = t.value(logits);
    Matrix noise(L.rows, L.cols);
    for (double& v : noise.data) v = rng_gumbel(rng);
    Var shifted = t.add(logits, t.constant(noise));
    return t.rowwise_softmax(t.scale(shifted, 1.0 / tau));
}

Var subgraph_embedding(Tape& t, Var assignment, Var node_embeddings) {
    const Matrix& S = t.value(assignment);
    const Matrix& X = t.value(node_embeddings);
    if (S.rows != X.rows)
        throw ShapeError("subgraph_embedding: assignment rows " + std::to_string(S.rows) +
                         " vs embedding rows " + std::to_string(X.rows));
    return t.row_slice(t.matmul(t.transpose(assignment), node_embeddings), 0);
}

Var connectivity_loss(Tape& t, Var assignment, Var adjacency, double eps) {
    const Matrix& S = t.value(assignment);
    const Matrix& A = t.value(adjacency);
    if (A.rows != S.rows || A.cols != S.rows)
        throw ShapeError("connectivity_loss: adjacency " + shape_str(A.rows, A.cols) +
                         " vs assignment rows " + std::to_string(S.rows));
    Var stas = t.matmul(t.transpose(assignment), t.matmul(adjacency, assignment));
    Var norm = t.row_normalize(stas, eps);
    Var diff = t.sub(norm, t.constant(Matrix::identity(t.value(stas).rows)));
    return frobenius_norm(t, diff);
}

Var statistics_score(Tape& t, Bindings& b, const ModelState& state, Var graph_embedding,
                     Var subgraph_emb, bool trainable) {
    const Matrix& ge = t.value(graph_embedding);
    const Matrix& se = t.value(subgraph_emb);
    if (ge.cols != se.cols || ge.rows != 1 || se.rows != 1)
        throw ShapeError("statistics_score: embeddings must be 1xh each, got " +
                         shape_str(ge.rows, ge.cols) + " and " + shape_str(se.rows, se.cols));
    Var joint = t.concat_cols({graph_embedding, subgraph_emb});
    return trainable ? state.stats.forward(t, b, joint) : state.stats.forward_frozen(t, joint);
}

Var mi_lower_bound(Tape& t, const std::vector<Var>& pos_scores,
                   const std::vector<Var>& neg_scores) {
    if (pos_scores.size() < 2)
        throw DomainError("mi_lower_bound: needs at least two pairs (no negative pairing "
                          "exists for a single sample)");
    if (pos_scores.size() != neg_scores.size())
        throw ShapeError("mi_lower_bound: positive/negative count mismatch");
    Var pos_mean = mean_of(t, pos_scores);
    Var neg_row = t.concat_cols(neg_scores);
    Var lse = t.log_sum_exp_rows(neg_row);
    Var log_mean = t.sub(lse, t.constant_scalar(std::log(static_cast<double>(neg_scores.size()))));
    return t.sub(pos_mean, log_mean);
}

Var classification_loss(Tape& t, Bindings& b, const ModelState& state, Var subgraph_emb,
                        const Graph& g, TaskKind task) {
    Var out = state.classifier.forward(t, b, subgraph_emb);
    if (task == TaskKind::Categorical) {
        int label = static_cast<int>(g.label);
        return cross_entropy(t, out, label);
    }
    return mean_squared_error(t, out, g.label);
}

SubgraphExtraction extract_subgraph(const Graph& g, const Matrix& assignment) {
    if (assignment.rows != g.n || assignment.cols != 2)
        throw ShapeError("extract_subgraph: assignment " +
                         shape_str(assignment.rows, assignment.cols) + " for graph with " +
                         std::to_string(g.n) + " nodes");
    SubgraphExtraction ex;
    std::vector<char> selected(g.n, 0);
    for (int i = 0; i < g.n; ++i)
        if (assignment.at(i, 0) > assignment.at(i, 1)) {
            selected[i] = 1;
            ex.nodes.push_back(i);
        }
    ex.empty = ex.nodes.empty();

    // Connected components of the induced subgraph by breadth-first search.
    std::vector<char> seen(g.n, 0);
    for (int s : ex.nodes) {
        if (seen[s]) continue;
        std::vector<int> comp, queue{s};
        seen[s] = 1;
        while (!queue.empty()) {
            int u = queue.back();
            queue.pop_back();
            comp.push_back(u);
            for (int v = 0; v < g.n; ++v)
                if (selected[v] && !seen[v] && g.adjacency.at(u, v) != 0.0) {
                    seen[v] = 1;
                    queue.push_back(v);
                }
        }
        std::sort(comp.begin(), comp.end());
        ex.components.push_back(std::move(comp));
    }
    std::stable_sort(ex.components.begin(), ex.components.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    if (!ex.components.empty()) ex.largest_component = ex.components.front();
    return ex;
}

Matrix assignment_matrix(const ModelState& state, const Graph& g) {
    if (state.mode != ModelMode::Sib)
        throw DomainError("assignment_matrix: model is not a subgraph generator");
    Tape t;
    Var ahat = t.constant(normalize_adjacency(g));
    Var x = t.constant(g.features);
    Var xl = state.encoder.encode_frozen(t, ahat, x);
    Var logits = state.assign.forward_frozen(t, xl);
    Var s = t.rowwise_softmax(logits);
    return t.value(s);
}

}  // namespace sib
