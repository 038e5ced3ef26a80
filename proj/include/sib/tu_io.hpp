#pragma once

#include <string>

#include "sib/graph.hpp"

namespace sib {

// TU-format multi-file dataset reader. Requires NAME_A.txt,
// NAME_graph_indicator.txt and NAME_graph_labels.txt; NAME_node_labels.txt,
// NAME_node_attributes.txt and NAME_truth_mask.txt are optional. Edges are
// 1-based, symmetrized and deduplicated; graph labels are remapped to
// 0-based contiguous classes (a file of non-integer labels loads as a
// regression task). Node labels are one-hot encoded; when neither labels nor
// attributes exist every node gets a constant feature 1.
Dataset parse_tu_dataset(const std::string& dir, const std::string& name);

// Canonical writer: parse(write(ds)) is byte-identical to write(ds).
void write_tu_dataset(const std::string& dir, const std::string& name, const Dataset& ds);

// FNV-1a 64 content hash over the dataset files, order-independent of the
// directory listing (files are hashed in a fixed name order).
std::string dataset_fingerprint(const std::string& dir, const std::string& name);

}  // namespace sib
