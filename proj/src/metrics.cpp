#include "sib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace sib {

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
    if (preds.empty()) throw DomainError("accuracy: empty prediction list");
    if (preds.size() != labels.size())
        throw DomainError("accuracy: prediction and label counts differ");
    int correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

PrResult node_pr(const std::vector<int>& selected, const std::vector<std::uint8_t>& truth) {
    if (truth.empty()) throw DomainError("node_pr: truth mask is absent");
    int true_total = 0;
    for (std::uint8_t v : truth) true_total += v ? 1 : 0;
    int hit = 0;
    for (int i : selected) {
        if (i < 0 || i >= static_cast<int>(truth.size()))
            throw DomainError("node_pr: selected index out of range");
        if (truth[i]) ++hit;
    }
    PrResult r;
    if (selected.empty()) {
        r.empty_selection = true;
        r.precision = 0.0;
    } else {
        r.precision = static_cast<double>(hit) / static_cast<double>(selected.size());
    }
    r.recall = true_total == 0 ? 0.0
                               : static_cast<double>(hit) / static_cast<double>(true_total);
    return r;
}

ComponentStats component_stats(const Graph& g, const std::vector<int>& selected) {
    Matrix dummy(g.n, 2);
    for (int i = 0; i < g.n; ++i) dummy.at(i, 1) = 1.0;
    for (int i : selected) {
        if (i < 0 || i >= g.n) throw DomainError("component_stats: node index out of range");
        dummy.at(i, 0) = 1.0;
        dummy.at(i, 1) = 0.0;
    }
    SubgraphExtraction ex = extract_subgraph(g, dummy);
    ComponentStats cs;
    cs.component_count = static_cast<int>(ex.components.size());
    cs.largest_fraction =
        static_cast<double>(ex.largest_component.size()) / static_cast<double>(g.n);
    return cs;
}

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd ms;
    if (xs.empty()) return ms;
    double sum = 0.0;
    for (double x : xs) sum += x;
    ms.mean = sum / static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs) sq += (x - ms.mean) * (x - ms.mean);
    ms.std = std::sqrt(sq / static_cast<double>(xs.size()));
    return ms;
}

SizeStats size_stats(const std::vector<SelectionRecord>& records) {
    if (records.empty()) throw DomainError("size_stats: empty split");
    std::vector<double> pct, largest;
    double comp_sum = 0.0;
    for (const SelectionRecord& r : records) {
        pct.push_back(100.0 * static_cast<double>(r.selected) / static_cast<double>(r.n));
        largest.push_back(100.0 * static_cast<double>(r.largest_component) /
                          static_cast<double>(r.n));
        comp_sum += r.components;
    }
    SizeStats s;
    s.subgraph_pct = mean_std(pct);
    s.largest_component_pct = mean_std(largest);
    s.mean_components = comp_sum / static_cast<double>(records.size());
    return s;
}

PropertyBias property_bias(const ModelState& state, const Dataset& ds,
                           const std::vector<int>& idx, const PropertyFn& fn,
                           double att_ratio) {
    if (ds.task != TaskKind::Regression)
        throw DomainError("property_bias: requires a scalar-label dataset");
    PropertyBias pb;
    std::vector<double> biases;
    for (int gi : idx) {
        const Graph& g = ds.graphs[gi];
        Prediction p = predict(state, g, att_ratio);
        if (!p.has_extraction || p.extraction.nodes.empty()) {
            biases.push_back(std::abs(g.label));
            ++pb.flagged_empty;
            continue;
        }
        double v = fn(g, p.extraction.largest_component);
        biases.push_back(std::abs(g.label - v));
    }
    pb.bias = mean_std(biases);
    return pb;
}

MetricsRecord evaluate_split(const ModelState& state, const Dataset& ds,
                             const std::vector<int>& idx, double att_ratio) {
    if (idx.empty()) throw DomainError("evaluate_split: empty index list");
    MetricsRecord m;
    m.graphs = static_cast<int>(idx.size());

    std::vector<int> preds, labels;
    std::vector<double> precs, recalls;
    std::vector<SelectionRecord> recs;
    double se = 0.0;
    for (int gi : idx) {
        const Graph& g = ds.graphs[gi];
        Prediction p = predict(state, g, att_ratio);
        if (ds.task == TaskKind::Categorical) {
            preds.push_back(p.cls);
            labels.push_back(ds.label_of(gi));
        } else {
            double d = p.value - g.label;
            se += d * d;
        }
        if (p.has_extraction) {
            SelectionRecord r;
            r.n = g.n;
            r.selected = static_cast<int>(p.extraction.nodes.size());
            r.largest_component = static_cast<int>(p.extraction.largest_component.size());
            r.components = static_cast<int>(p.extraction.components.size());
            recs.push_back(r);
            if (p.extraction.nodes.empty()) ++m.empty_selections;
            if (g.node_truth) {
                PrResult pr = node_pr(p.extraction.nodes, *g.node_truth);
                precs.push_back(pr.precision);
                recalls.push_back(pr.recall);
            }
        }
    }
    if (ds.task == TaskKind::Categorical)
        m.accuracy = accuracy(preds, labels);
    else
        m.mse = se / static_cast<double>(idx.size());
    if (!precs.empty()) {
        m.node_precision = mean_std(precs);
        m.node_recall = mean_std(recalls);
    }
    if (!recs.empty()) m.sizes = size_stats(recs);
    return m;
}

std::string metrics_report(const MetricsRecord& m) {
    std::ostringstream out;
    out.precision(4);
    out << "graphs evaluated:        " << m.graphs << "\n";
    if (m.accuracy) out << "accuracy:                " << *m.accuracy << "\n";
    if (m.mse) out << "mse:                     " << *m.mse << "\n";
    if (m.node_precision)
        out << "node precision:          " << m.node_precision->mean << " +/- "
            << m.node_precision->std << "\n";
    if (m.node_recall)
        out << "node recall:             " << m.node_recall->mean << " +/- "
            << m.node_recall->std << "\n";
    out << "subgraph size %:         " << m.sizes.subgraph_pct.mean << " +/- "
        << m.sizes.subgraph_pct.std << "\n";
    out << "largest component %:     " << m.sizes.largest_component_pct.mean << " +/- "
        << m.sizes.largest_component_pct.std << "\n";
    out << "mean disconnected parts: " << m.sizes.mean_components << "\n";
    if (m.empty_selections > 0)
        out << "warning: empty selections on " << m.empty_selections << " graphs\n";
    return out.str();
}

std::string metrics_json(const MetricsRecord& m) {
    nlohmann::json j;
    j["graphs"] = m.graphs;
    if (m.accuracy) j["accuracy"] = *m.accuracy;
    if (m.mse) j["mse"] = *m.mse;
    if (m.node_precision) {
        j["node_precision"] = {{"mean", m.node_precision->mean}, {"std", m.node_precision->std}};
        j["node_recall"] = {{"mean", m.node_recall->mean}, {"std", m.node_recall->std}};
    }
    j["subgraph_size_pct"] = {{"mean", m.sizes.subgraph_pct.mean},
                              {"std", m.sizes.subgraph_pct.std}};
    j["largest_component_pct"] = {{"mean", m.sizes.largest_component_pct.mean},
                                  {"std", m.sizes.largest_component_pct.std}};
    j["mean_disconnected_parts"] = m.sizes.mean_components;
    j["empty_selections"] = m.empty_selections;
    return j.dump(2);
}

}  // namespace sib
