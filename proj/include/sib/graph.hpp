#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sib/matrix.hpp"
#include "sib/rng.hpp"

namespace sib {

enum class TaskKind { Categorical, Regression };

// One labeled graph. Adjacency is dense symmetric 0/1 with zero diagonal;
// self-loops exist only inside normalize_adjacency.
struct Graph {
    int n = 0;
    Matrix adjacency;  // n x n
    Matrix features;   // n x d
    double label = 0.0;  // class index (categorical) or scalar target

    // Original integer node labels when the graph came from / goes to a TU
    // file with node labels. Features carry the one-hot encoding.
    std::optional<std::vector<int>> node_labels;

    // Ground truth for synthetic sets: per-node membership and/or per-edge
    // (canonical (min,max)-lex order) original-vs-added flags.
    std::optional<std::vector<std::uint8_t>> node_truth;
    std::optional<std::vector<std::uint8_t>> edge_truth;

    // Canonical undirected edge list: (i, j) with i < j, lexicographic.
    std::vector<std::pair<int, int>> edges() const;
    int edge_count() const;
    bool has_edge(int i, int j) const { return adjacency.at(i, j) != 0.0; }

    void validate() const;  // symmetry, zero diagonal, shape coherence
};

struct Dataset {
    std::string name;
    TaskKind task = TaskKind::Categorical;
    int num_classes = 0;  // categorical only
    int feature_dim = 0;
    bool has_node_labels = false;
    bool has_node_attributes = false;
    std::vector<Graph> graphs;
    std::vector<int> train_idx, val_idx, test_idx;

    int label_of(int g) const { return static_cast<int>(graphs[g].label); }
    const std::vector<int>& split(const std::string& which) const;
};

// D^{-1/2} (A+I) D^{-1/2} with D the degree matrix of A+I.
Matrix normalize_adjacency(const Graph& g);

// One node per undirected edge; adjacency by shared endpoint; line-node
// features concatenate the endpoint feature rows (smaller index first).
// g's edge truth mask becomes the node truth mask of the result.
// Throws DomainError on an edgeless graph.
Graph line_graph(const Graph& g);

// Adds ceil(fraction * |E|) new undirected edges uniformly among non-edges
// (capped at availability). Marks original edges true / added edges false in
// edge_truth. `added_out`, when non-null, receives the number added.
Graph add_redundant_edges(const Graph& g, double fraction, std::uint64_t seed,
                          int* added_out = nullptr);

// Removes floor(fraction * |E|) undirected edges uniformly.
Graph drop_edges(const Graph& g, double fraction, std::uint64_t seed);

struct SplitFractions {
    double train = 0.85, val = 0.05, test = 0.10;
};

// Seeded shuffle + contiguous slices, stratified by label for categorical
// tasks. Throws ConfigError when a nonzero fraction yields an empty split.
Dataset split_dataset(const Dataset& ds, SplitFractions f, std::uint64_t seed);

// Stratified k-fold: returns (train, test) index pairs covering all graphs.
std::vector<std::pair<std::vector<int>, std::vector<int>>> kfold_splits(
    const Dataset& ds, int k, std::uint64_t seed);

// Synthetic corpus with exact node-level ground truth: label-0 graphs embed
// a cycle, label-1 graphs a clique, plus `noise_size` Erdos-Renyi noise
// nodes each attached to the motif by one random edge. Node features are
// one-hot encoded degree buckets. For the regression task the motif size is
// sampled in [3, motif_size] and becomes the scalar label.
struct PlantedConfig {
    int count = 200;
    int motif_size = 6;
    int noise_size = 10;
    double edge_prob = 0.3;
    std::uint64_t seed = 0;
    TaskKind task = TaskKind::Categorical;
};
Dataset generate_planted_motif(const PlantedConfig& cfg);

// Whole-dataset transforms used by the denoising protocol.
Dataset add_redundant_edges_dataset(const Dataset& ds, double fraction, std::uint64_t seed);
Dataset line_graph_dataset(const Dataset& ds);

}  // namespace sib
