#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "sib/metrics.hpp"

using namespace sib;

namespace {

Graph random_graph(int n, double p, Rng& rng) {
    Graph g;
    g.n = n;
    g.adjacency = Matrix::zeros(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng_uniform(rng) < p) {
                g.adjacency.at(i, j) = 1.0;
                g.adjacency.at(j, i) = 1.0;
            }
    g.features = Matrix::constant(n, 1, 1.0);
    return g;
}

// Union-find oracle for connected components of the induced subgraph.
std::pair<int, int> uf_components(const Graph& g, const std::vector<int>& selected) {
    std::vector<int> parent(g.n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<char> in(g.n, 0);
    for (int i : selected) in[i] = 1;
    for (int i : selected)
        for (int j : selected)
            if (i < j && g.adjacency.at(i, j) != 0.0) parent[find(i)] = find(j);
    std::vector<int> size(g.n, 0);
    int count = 0, largest = 0;
    for (int i : selected) {
        int r = find(i);
        if (size[r] == 0) ++count;
        ++size[r];
        largest = std::max(largest, size[r]);
    }
    return {count, largest};
}

}  // namespace

TEST_CASE("accuracy") {
    CHECK(accuracy({1, 0, 1}, {1, 0, 1}) == 1.0);
    CHECK(accuracy({1, 0, 1, 0}, {1, 1, 1, 1}) == 0.5);
    CHECK_THROWS_AS(accuracy({}, {}), DomainError);
}

TEST_CASE("node precision and recall") {
    std::vector<std::uint8_t> truth = {1, 1, 0, 0, 1};

    PrResult perfect = node_pr({0, 1, 4}, truth);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK_FALSE(perfect.empty_selection);

    PrResult disjoint = node_pr({2, 3}, truth);
    CHECK(disjoint.precision == 0.0);
    CHECK(disjoint.recall == 0.0);

    PrResult empty = node_pr({}, truth);
    CHECK(empty.empty_selection);
    CHECK(empty.precision == 0.0);

    CHECK_THROWS_AS(node_pr({0}, std::vector<std::uint8_t>{}), DomainError);

    // Brute-force set-intersection oracle on random fixtures.
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 4 + static_cast<int>(rng_index(rng, 9));
        std::vector<std::uint8_t> mask(n);
        std::vector<int> sel;
        for (int i = 0; i < n; ++i) {
            mask[i] = rng_uniform(rng) < 0.5 ? 1 : 0;
            if (rng_uniform(rng) < 0.5) sel.push_back(i);
        }
        int inter = 0, truth_n = 0;
        for (int i = 0; i < n; ++i) {
            truth_n += mask[i];
            if (mask[i] && std::find(sel.begin(), sel.end(), i) != sel.end()) ++inter;
        }
        PrResult pr = node_pr(sel, mask);
        if (!sel.empty())
            CHECK(pr.precision == doctest::Approx(double(inter) / sel.size()));
        if (truth_n > 0) CHECK(pr.recall == doctest::Approx(double(inter) / truth_n));
    }
}

TEST_CASE("component stats vs union-find oracle") {
    Rng rng(5);

    // Connected selection.
    Graph path;
    path.n = 4;
    path.adjacency = Matrix::zeros(4, 4);
    for (int i = 0; i < 3; ++i) {
        path.adjacency.at(i, i + 1) = 1.0;
        path.adjacency.at(i + 1, i) = 1.0;
    }
    path.features = Matrix::constant(4, 1, 1.0);
    ComponentStats cs = component_stats(path, {0, 1, 2, 3});
    CHECK(cs.component_count == 1);
    CHECK(cs.largest_fraction == 1.0);

    // Two separate triangles selected.
    Graph two;
    two.n = 7;
    two.adjacency = Matrix::zeros(7, 7);
    auto tri = [&](int a, int b, int c) {
        for (auto [i, j] : {std::pair{a, b}, std::pair{a, c}, std::pair{b, c}}) {
            two.adjacency.at(i, j) = 1.0;
            two.adjacency.at(j, i) = 1.0;
        }
    };
    tri(0, 1, 2);
    tri(3, 4, 5);
    two.features = Matrix::constant(7, 1, 1.0);
    ComponentStats ts = component_stats(two, {0, 1, 2, 3, 4, 5});
    CHECK(ts.component_count == 2);
    CHECK(ts.largest_fraction == doctest::Approx(3.0 / 7.0));

    for (int trial = 0; trial < 60; ++trial) {
        Graph g = random_graph(3 + static_cast<int>(rng_index(rng, 10)), 0.4, rng);
        std::vector<int> sel;
        for (int i = 0; i < g.n; ++i)
            if (rng_uniform(rng) < 0.6) sel.push_back(i);
        ComponentStats got = component_stats(g, sel);
        auto [count, largest] = uf_components(g, sel);
        CHECK(got.component_count == count);
        CHECK(got.largest_fraction == doctest::Approx(double(largest) / g.n));
    }
}

TEST_CASE("size stats") {
    std::vector<SelectionRecord> full = {{10, 10, 10, 1}, {4, 4, 4, 1}};
    SizeStats s = size_stats(full);
    CHECK(s.subgraph_pct.mean == doctest::Approx(100.0));
    CHECK(s.subgraph_pct.std == doctest::Approx(0.0));

    std::vector<SelectionRecord> half = {{10, 5, 5, 1}, {4, 2, 2, 1}};
    SizeStats h = size_stats(half);
    CHECK(h.subgraph_pct.mean == doctest::Approx(50.0));
    CHECK(h.subgraph_pct.std == doctest::Approx(0.0));
    CHECK(h.mean_components == doctest::Approx(1.0));

    CHECK_THROWS_AS(size_stats({}), DomainError);
}

TEST_CASE("mean_std is the population statistic") {
    MeanStd ms = mean_std({1.0, 2.0, 3.0, 4.0});
    CHECK(ms.mean == doctest::Approx(2.5));
    CHECK(ms.std == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("property bias on the synthetic regression family") {
    // Scalar label = motif size; surrogate property = size of the extracted
    // largest connected part. A trained model must beat a random-selection
    // baseline of matched sizes.
    PlantedConfig pc;
    pc.count = 60;
    pc.motif_size = 7;
    pc.noise_size = 6;
    pc.seed = 31;
    pc.task = TaskKind::Regression;
    Dataset ds = generate_planted_motif(pc);
    ds = split_dataset(ds, {0.7, 0.0, 0.3}, 4);

    TrainConfig cfg;
    cfg.outer_steps = 60;
    cfg.inner_steps = 5;
    cfg.seed = 8;
    cfg.eta2 = 0.02;
    TrainResult r = train(ds, cfg);

    PropertyFn fn = [](const Graph&, const std::vector<int>& component) {
        return static_cast<double>(component.size());
    };
    PropertyBias trained = property_bias(r.state, ds, ds.test_idx, fn);

    // Random baseline: same selection sizes, uniformly random node sets.
    Rng rng(77);
    std::vector<double> random_biases;
    for (int gi : ds.test_idx) {
        const Graph& g = ds.graphs[gi];
        Prediction p = predict(r.state, g);
        std::vector<int> nodes(g.n);
        std::iota(nodes.begin(), nodes.end(), 0);
        rng_shuffle(rng, nodes);
        nodes.resize(p.extraction.nodes.size());
        std::sort(nodes.begin(), nodes.end());
        if (nodes.empty()) {
            random_biases.push_back(std::abs(g.label));
            continue;
        }
        ComponentStats cs = component_stats(g, nodes);
        random_biases.push_back(std::abs(g.label - cs.largest_fraction * g.n));
    }
    double random_mean = mean_std(random_biases).mean;
    CHECK(trained.bias.mean < random_mean);

    // Perfect extraction of the motif gives zero bias by construction.
    const Graph& g0 = ds.graphs[ds.test_idx[0]];
    std::vector<int> motif_nodes;
    for (int i = 0; i < g0.n; ++i)
        if ((*g0.node_truth)[i]) motif_nodes.push_back(i);
    ComponentStats perfect = component_stats(g0, motif_nodes);
    CHECK(std::abs(g0.label - perfect.largest_fraction * g0.n) ==
          doctest::Approx(0.0));
}

TEST_CASE("evaluate_split emits pr fields only when truth masks exist") {
    PlantedConfig pc;
    pc.count = 12;
    pc.motif_size = 4;
    pc.noise_size = 3;
    pc.seed = 9;
    Dataset ds = generate_planted_motif(pc);
    ds = split_dataset(ds, {0.5, 0.0, 0.5}, 2);

    TrainConfig cfg;
    cfg.outer_steps = 2;
    cfg.inner_steps = 1;
    cfg.seed = 3;
    TrainResult r = train(ds, cfg);

    MetricsRecord with_masks = evaluate_split(r.state, ds, ds.test_idx);
    CHECK(with_masks.accuracy.has_value());
    CHECK(with_masks.node_precision.has_value());
    CHECK(with_masks.node_recall.has_value());

    Dataset unmasked = ds;
    for (Graph& g : unmasked.graphs) g.node_truth.reset();
    MetricsRecord without = evaluate_split(r.state, unmasked, unmasked.test_idx);
    CHECK(without.accuracy.has_value());
    CHECK_FALSE(without.node_precision.has_value());

    std::string json = metrics_json(with_masks);
    CHECK(json.find("node_precision") != std::string::npos);
    CHECK(metrics_json(without).find("node_precision") == std::string::npos);
}
