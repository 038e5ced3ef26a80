#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sib/train.hpp"

namespace sib {

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population
};

// Fraction of exact matches. Throws DomainError on empty input.
double accuracy(const std::vector<int>& preds, const std::vector<int>& labels);

struct PrResult {
    double precision = 0.0;
    double recall = 0.0;
    bool empty_selection = false;  // precision defined as 0 with this flag set
};
// Precision/recall of a selected node set against a boolean truth mask.
PrResult node_pr(const std::vector<int>& selected, const std::vector<std::uint8_t>& truth);

struct ComponentStats {
    int component_count = 0;
    double largest_fraction = 0.0;  // largest component size / n
};
ComponentStats component_stats(const Graph& g, const std::vector<int>& selected);

struct SizeStats {
    MeanStd subgraph_pct;           // |G_sub| / |G| in percent
    MeanStd largest_component_pct;  // largest connected part / |G| in percent
    double mean_components = 0.0;
};
struct SelectionRecord {
    int n = 0;
    int selected = 0;
    int largest_component = 0;
    int components = 0;
};
SizeStats size_stats(const std::vector<SelectionRecord>& records);

MeanStd mean_std(const std::vector<double>& xs);

// |Y(G) - property_fn(largest component of extraction)| over a split.
// Empty extractions count with bias |Y(G)| and raise the flagged counter.
using PropertyFn = std::function<double(const Graph&, const std::vector<int>&)>;
struct PropertyBias {
    MeanStd bias;
    int flagged_empty = 0;
};
PropertyBias property_bias(const ModelState& state, const Dataset& ds,
                           const std::vector<int>& idx, const PropertyFn& fn,
                           double att_ratio = 0.5);

// Full evaluation of a model over a split: accuracy (or MSE), truth-mask
// precision/recall when masks exist, size and component statistics.
struct MetricsRecord {
    std::optional<double> accuracy;
    std::optional<double> mse;
    std::optional<MeanStd> node_precision;
    std::optional<MeanStd> node_recall;
    SizeStats sizes;
    int graphs = 0;
    int empty_selections = 0;
};
MetricsRecord evaluate_split(const ModelState& state, const Dataset& ds,
                             const std::vector<int>& idx, double att_ratio = 0.5);

std::string metrics_report(const MetricsRecord& m);
std::string metrics_json(const MetricsRecord& m);

}  // namespace sib
