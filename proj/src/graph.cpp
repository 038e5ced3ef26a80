#include "sib/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sib {

std::vector<std::pair<int, int>> Graph::edges() const {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (adjacency.at(i, j) != 0.0) e.emplace_back(i, j);
    return e;
}

int Graph::edge_count() const {
    int c = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (adjacency.at(i, j) != 0.0) ++c;
    return c;
}

void Graph::validate() const {
    if (n < 1) throw DomainError("graph must have at least one node");
    if (adjacency.rows != n || adjacency.cols != n)
        throw ShapeError("adjacency " + shape_str(adjacency.rows, adjacency.cols) +
                         " does not match node count " + std::to_string(n));
    if (features.rows != n)
        throw ShapeError("feature rows " + std::to_string(features.rows) +
                         " do not match node count " + std::to_string(n));
    for (int i = 0; i < n; ++i) {
        if (adjacency.at(i, i) != 0.0) throw DomainError("adjacency has a self-loop");
        for (int j = i + 1; j < n; ++j)
            if (adjacency.at(i, j) != adjacency.at(j, i))
                throw DomainError("adjacency is not symmetric");
    }
}

const std::vector<int>& Dataset::split(const std::string& which) const {
    if (which == "train") return train_idx;
    if (which == "val") return val_idx;
    if (which == "test") return test_idx;
    throw ConfigError("unknown split '" + which + "' (expected train, val or test)");
}

Matrix normalize_adjacency(const Graph& g) {
    int n = g.n;
    std::vector<double> dinv(n);
    for (int i = 0; i < n; ++i) {
        double deg = 1.0;  // self-loop
        for (int j = 0; j < n; ++j) deg += g.adjacency.at(i, j);
        dinv[i] = 1.0 / std::sqrt(deg);
    }
    Matrix out(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double a = g.adjacency.at(i, j) + (i == j ? 1.0 : 0.0);
            if (a != 0.0) out.at(i, j) = dinv[i] * a * dinv[j];
        }
    }
    return out;
}

Graph line_graph(const Graph& g) {
    auto edges = g.edges();
    if (edges.empty()) throw DomainError("line_graph: input graph has no edges");
    int m = static_cast<int>(edges.size());
    Graph lg;
    lg.n = m;
    lg.adjacency = Matrix::zeros(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
            auto [i1, j1] = edges[a];
            auto [i2, j2] = edges[b];
            if (i1 == i2 || i1 == j2 || j1 == i2 || j1 == j2) {
                lg.adjacency.at(a, b) = 1.0;
                lg.adjacency.at(b, a) = 1.0;
            }
        }
    int d = g.features.cols;
    lg.features = Matrix(m, 2 * d);
    for (int a = 0; a < m; ++a) {
        auto [i, j] = edges[a];
        for (int c = 0; c < d; ++c) {
            lg.features.at(a, c) = g.features.at(i, c);
            lg.features.at(a, d + c) = g.features.at(j, c);
        }
    }
    lg.label = g.label;
    if (g.edge_truth) {
        if (static_cast<int>(g.edge_truth->size()) != m)
            throw DomainError("line_graph: edge truth mask length " +
                              std::to_string(g.edge_truth->size()) +
                              " does not match edge count " + std::to_string(m));
        lg.node_truth = g.edge_truth;
    }
    return lg;
}

Graph add_redundant_edges(const Graph& g, double fraction, std::uint64_t seed, int* added_out) {
    if (fraction < 0.0) throw DomainError("add_redundant_edges: fraction must be >= 0");
    Graph out = g;
    int e = g.edge_count();
    int want = static_cast<int>(std::ceil(fraction * e));

    std::vector<std::pair<int, int>> nonedges;
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.adjacency.at(i, j) == 0.0) nonedges.emplace_back(i, j);

    Rng rng(seed);
    rng_shuffle(rng, nonedges);
    int added = std::min<int>(want, static_cast<int>(nonedges.size()));
    for (int k = 0; k < added; ++k) {
        auto [i, j] = nonedges[k];
        out.adjacency.at(i, j) = 1.0;
        out.adjacency.at(j, i) = 1.0;
    }
    if (added_out) *added_out = added;

    // Original edges true, fresh edges false, in canonical order.
    auto newedges = out.edges();
    std::vector<std::uint8_t> mask(newedges.size());
    for (std::size_t k = 0; k < newedges.size(); ++k) {
        auto [i, j] = newedges[k];
        mask[k] = g.adjacency.at(i, j) != 0.0 ? 1 : 0;
    }
    out.edge_truth = std::move(mask);
    return out;
}

Graph drop_edges(const Graph& g, double fraction, std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0)
        throw DomainError("drop_edges: fraction must lie in [0, 1]");
    Graph out = g;
    auto edges = g.edges();
    int drop = static_cast<int>(std::floor(fraction * static_cast<double>(edges.size())));
    Rng rng(seed);
    rng_shuffle(rng, edges);
    for (int k = 0; k < drop; ++k) {
        auto [i, j] = edges[k];
        out.adjacency.at(i, j) = 0.0;
        out.adjacency.at(j, i) = 0.0;
    }
    out.edge_truth.reset();  // mask indices no longer line up after removal
    return out;
}

namespace {

// Largest-remainder apportionment of n items over fractions.
std::vector<int> apportion(int n, const std::vector<double>& fracs) {
    std::vector<int> counts(fracs.size());
    std::vector<std::pair<double, int>> rem;
    int assigned = 0;
    double fsum = 0.0;
    for (double f : fracs) fsum += f;
    for (std::size_t i = 0; i < fracs.size(); ++i) {
        double exact = fracs[i] * n;
        counts[i] = static_cast<int>(std::floor(exact + 1e-12));
        assigned += counts[i];
        rem.push_back({exact - counts[i], static_cast<int>(i)});
    }
    int leftover = static_cast<int>(std::llround(fsum * n)) - assigned;
    std::stable_sort(rem.begin(), rem.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int k = 0; k < leftover; ++k) counts[rem[static_cast<std::size_t>(k) % rem.size()].second]++;
    return counts;
}

}  // namespace

Dataset split_dataset(const Dataset& ds, SplitFractions f, std::uint64_t seed) {
    if (f.train < 0 || f.val < 0 || f.test < 0 || f.train + f.val + f.test > 1.0 + 1e-9)
        throw ConfigError("split fractions must be nonnegative and sum to at most 1");
    Dataset out = ds;
    out.train_idx.clear();
    out.val_idx.clear();
    out.test_idx.clear();

    int n = static_cast<int>(ds.graphs.size());
    std::vector<double> fracs = {f.train, f.val, f.test};
    std::vector<int> target = apportion(n, fracs);

    std::vector<std::vector<int>> groups;
    if (ds.task == TaskKind::Categorical && ds.num_classes > 1) {
        groups.resize(ds.num_classes);
        for (int i = 0; i < n; ++i) groups[ds.label_of(i)].push_back(i);
    } else {
        groups.resize(1);
        for (int i = 0; i < n; ++i) groups[0].push_back(i);
    }
    Rng rng(seed);
    for (auto& g : groups) rng_shuffle(rng, g);

    // Per-group floor counts, then fill each split to its global target by
    // descending fractional remainder (deterministic tie-break on group id).
    std::vector<std::array<int, 3>> take(groups.size(), {0, 0, 0});
    std::vector<int> used(groups.size(), 0);
    std::array<int, 3> assigned = {0, 0, 0};
    for (std::size_t gi = 0; gi < groups.size(); ++gi)
        for (int s = 0; s < 3; ++s) {
            int c = static_cast<int>(std::floor(fracs[s] * groups[gi].size() + 1e-12));
            take[gi][s] = c;
            used[gi] += c;
            assigned[s] += c;
        }
    for (int s = 0; s < 3; ++s) {
        std::vector<std::pair<double, int>> order;
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            double exact = fracs[s] * groups[gi].size();
            order.push_back({exact - std::floor(exact + 1e-12), static_cast<int>(gi)});
        }
        std::stable_sort(order.begin(), order.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        std::size_t cursor = 0;
        while (assigned[s] < target[s]) {
            int gi = order[cursor % order.size()].second;
            ++cursor;
            if (used[gi] < static_cast<int>(groups[gi].size())) {
                ++take[gi][s];
                ++used[gi];
                ++assigned[s];
            }
            if (cursor > order.size() * static_cast<std::size_t>(n + 1)) break;
        }
    }

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        int off = 0;
        for (int s = 0; s < 3; ++s) {
            auto* dst = s == 0 ? &out.train_idx : s == 1 ? &out.val_idx : &out.test_idx;
            for (int k = 0; k < take[gi][s]; ++k) dst->push_back(groups[gi][off + k]);
            off += take[gi][s];
        }
    }
    std::sort(out.train_idx.begin(), out.train_idx.end());
    std::sort(out.val_idx.begin(), out.val_idx.end());
    std::sort(out.test_idx.begin(), out.test_idx.end());

    auto check = [&](double frac, const std::vector<int>& idx, const char* name) {
        if (frac > 0.0 && idx.empty())
            throw ConfigError(std::string("requested ") + name +
                              " fraction yields an empty split for " + std::to_string(n) +
                              " graphs");
    };
    check(f.train, out.train_idx, "train");
    check(f.val, out.val_idx, "val");
    check(f.test, out.test_idx, "test");
    return out;
}

std::vector<std::pair<std::vector<int>, std::vector<int>>> kfold_splits(const Dataset& ds,
                                                                        int k,
                                                                        std::uint64_t seed) {
    if (k < 2) throw ConfigError("k-fold requires k >= 2");
    int n = static_cast<int>(ds.graphs.size());
    std::vector<std::vector<int>> groups;
    if (ds.task == TaskKind::Categorical && ds.num_classes > 1) {
        groups.resize(ds.num_classes);
        for (int i = 0; i < n; ++i) groups[ds.label_of(i)].push_back(i);
    } else {
        groups.resize(1);
        for (int i = 0; i < n; ++i) groups[0].push_back(i);
    }
    Rng rng(seed);
    std::vector<std::vector<int>> folds(k);
    for (auto& g : groups) {
        rng_shuffle(rng, g);
        for (std::size_t i = 0; i < g.size(); ++i) folds[i % k].push_back(g[i]);
    }
    std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
    for (int f = 0; f < k; ++f) {
        std::vector<int> train, test = folds[f];
        for (int o = 0; o < k; ++o)
            if (o != f) train.insert(train.end(), folds[o].begin(), folds[o].end());
        std::sort(train.begin(), train.end());
        std::sort(test.begin(), test.end());
        out.emplace_back(std::move(train), std::move(test));
    }
    return out;
}

namespace {

// One-hot encode integer node labels over the dataset-wide sorted alphabet.
void encode_node_labels(Dataset& ds) {
    std::vector<int> alphabet;
    for (const Graph& g : ds.graphs)
        if (g.node_labels)
            for (int v : *g.node_labels) alphabet.push_back(v);
    std::sort(alphabet.begin(), alphabet.end());
    alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
    int d = static_cast<int>(alphabet.size());
    for (Graph& g : ds.graphs) {
        g.features = Matrix(g.n, d);
        for (int i = 0; i < g.n; ++i) {
            int v = (*g.node_labels)[i];
            int pos = static_cast<int>(
                std::lower_bound(alphabet.begin(), alphabet.end(), v) - alphabet.begin());
            g.features.at(i, pos) = 1.0;
        }
    }
    ds.feature_dim = d;
    ds.has_node_labels = true;
}

}  // namespace

Dataset generate_planted_motif(const PlantedConfig& cfg) {
    if (cfg.motif_size < 3) throw DomainError("planted motif requires motif_size >= 3");
    if (cfg.edge_prob <= 0.0 || cfg.edge_prob >= 1.0)
        throw DomainError("edge_prob must lie in (0, 1)");

    Dataset ds;
    ds.name = "planted";
    ds.task = cfg.task;
    ds.num_classes = cfg.task == TaskKind::Categorical ? 2 : 0;
    Rng rng(cfg.seed);

    constexpr int kDegreeCap = 8;
    for (int gi = 0; gi < cfg.count; ++gi) {
        bool clique = gi % 2 == 1;
        int m = cfg.motif_size;
        if (cfg.task == TaskKind::Regression)
            m = 3 + static_cast<int>(rng_index(rng, static_cast<std::uint64_t>(cfg.motif_size - 2)));
        int n = m + cfg.noise_size;

        Graph g;
        g.n = n;
        g.adjacency = Matrix::zeros(n, n);
        auto connect = [&](int a, int b) {
            g.adjacency.at(a, b) = 1.0;
            g.adjacency.at(b, a) = 1.0;
        };
        if (clique) {
            for (int i = 0; i < m; ++i)
                for (int j = i + 1; j < m; ++j) connect(i, j);
        } else {
            for (int i = 0; i < m; ++i) connect(i, (i + 1) % m);
        }
        for (int i = m; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng_uniform(rng) < cfg.edge_prob) connect(i, j);
        for (int i = m; i < n; ++i)
            connect(i, static_cast<int>(rng_index(rng, static_cast<std::uint64_t>(m))));

        g.label = cfg.task == TaskKind::Categorical ? (clique ? 1.0 : 0.0)
                                                    : static_cast<double>(m);
        std::vector<std::uint8_t> truth(n, 0);
        for (int i = 0; i < m; ++i) truth[i] = 1;
        g.node_truth = std::move(truth);

        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i) {
            int deg = 0;
            for (int j = 0; j < n; ++j) deg += static_cast<int>(g.adjacency.at(i, j));
            labels[i] = std::min(deg, kDegreeCap);
        }
        g.node_labels = std::move(labels);
        g.features = Matrix(g.n, 1);  // replaced by encode_node_labels
        ds.graphs.push_back(std::move(g));
    }
    encode_node_labels(ds);
    return ds;
}

Dataset add_redundant_edges_dataset(const Dataset& ds, double fraction, std::uint64_t seed) {
    Dataset out = ds;
    for (std::size_t i = 0; i < out.graphs.size(); ++i)
        out.graphs[i] = add_redundant_edges(ds.graphs[i], fraction, derive_seed(seed, i));
    return out;
}

Dataset line_graph_dataset(const Dataset& ds) {
    Dataset out;
    out.name = ds.name + "_line";
    out.task = ds.task;
    out.num_classes = ds.num_classes;
    out.has_node_attributes = true;
    out.has_node_labels = false;
    for (const Graph& g : ds.graphs) out.graphs.push_back(line_graph(g));
    out.feature_dim = out.graphs.empty() ? 0 : out.graphs.front().features.cols;
    out.train_idx = ds.train_idx;
    out.val_idx = ds.val_idx;
    out.test_idx = ds.test_idx;
    return out;
}

}  // namespace sib
