#include "sib/tu_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace sib {

namespace {

namespace fs = std::filesystem;

std::string path_join(const std::string& dir, const std::string& file) {
    return (fs::path(dir) / file).string();
}

std::vector<std::string> read_lines(const std::string& path, bool required) {
    std::ifstream in(path);
    if (!in) {
        if (required) throw IoError("cannot open required dataset file: " + path);
        return {};
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    // Trailing blank lines are common in exported files.
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

long parse_int(const std::string& s, const std::string& file, std::size_t lineno) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(s, &pos);
    } catch (const std::exception&) {
        throw FormatError(file + ":" + std::to_string(lineno) + ": expected integer, got '" +
                          s + "'");
    }
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size())
        throw FormatError(file + ":" + std::to_string(lineno) +
                          ": trailing characters after integer in '" + s + "'");
    return v;
}

double parse_double(const std::string& s, const std::string& file, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw FormatError(file + ":" + std::to_string(lineno) + ": expected number, got '" +
                          s + "'");
    }
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    for (std::string& t : out) {
        std::size_t a = t.find_first_not_of(" \t");
        std::size_t b = t.find_last_not_of(" \t");
        t = a == std::string::npos ? "" : t.substr(a, b - a + 1);
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Dataset parse_tu_dataset(const std::string& dir, const std::string& name) {
    const std::string a_file = path_join(dir, name + "_A.txt");
    const std::string ind_file = path_join(dir, name + "_graph_indicator.txt");
    const std::string glab_file = path_join(dir, name + "_graph_labels.txt");
    const std::string nlab_file = path_join(dir, name + "_node_labels.txt");
    const std::string nattr_file = path_join(dir, name + "_node_attributes.txt");
    const std::string mask_file = path_join(dir, name + "_truth_mask.txt");

    auto a_lines = read_lines(a_file, true);
    auto ind_lines = read_lines(ind_file, true);
    auto glab_lines = read_lines(glab_file, true);

    const long total_nodes = static_cast<long>(ind_lines.size());
    const long num_graphs = static_cast<long>(glab_lines.size());
    if (num_graphs < 1) throw FormatError(glab_file + ": no graphs");

    // graph_indicator: 1-based contiguous graph ids.
    std::vector<int> graph_of(total_nodes);
    std::vector<int> nodes_per_graph(num_graphs, 0);
    for (long i = 0; i < total_nodes; ++i) {
        long gid = parse_int(ind_lines[i], ind_file, i + 1);
        if (gid < 1 || gid > num_graphs)
            throw FormatError(ind_file + ":" + std::to_string(i + 1) + ": graph id " +
                              std::to_string(gid) + " out of range 1.." +
                              std::to_string(num_graphs));
        graph_of[i] = static_cast<int>(gid - 1);
        ++nodes_per_graph[gid - 1];
    }
    for (long g = 0; g < num_graphs; ++g)
        if (nodes_per_graph[g] == 0)
            throw FormatError(ind_file + ": graph ids are not contiguous, graph " +
                              std::to_string(g + 1) + " has no nodes");

    // Local node index inside its graph.
    std::vector<int> local_of(total_nodes);
    {
        std::vector<int> next(num_graphs, 0);
        for (long i = 0; i < total_nodes; ++i) local_of[i] = next[graph_of[i]]++;
    }

    Dataset ds;
    ds.name = name;
    ds.graphs.resize(num_graphs);
    for (long g = 0; g < num_graphs; ++g) {
        ds.graphs[g].n = nodes_per_graph[g];
        ds.graphs[g].adjacency = Matrix::zeros(nodes_per_graph[g], nodes_per_graph[g]);
    }

    // Edges.
    for (std::size_t li = 0; li < a_lines.size(); ++li) {
        if (a_lines[li].empty()) continue;
        auto parts = split_commas(a_lines[li]);
        if (parts.size() != 2)
            throw FormatError(a_file + ":" + std::to_string(li + 1) +
                              ": expected 'i, j', got '" + a_lines[li] + "'");
        long u = parse_int(parts[0], a_file, li + 1);
        long v = parse_int(parts[1], a_file, li + 1);
        if (u < 1 || u > total_nodes || v < 1 || v > total_nodes)
            throw FormatError(a_file + ":" + std::to_string(li + 1) + ": node index out of " +
                              "range 1.." + std::to_string(total_nodes));
        if (u == v) continue;  // self-loops are dropped
        int g = graph_of[u - 1];
        if (g != graph_of[v - 1])
            throw FormatError(a_file + ":" + std::to_string(li + 1) +
                              ": edge crosses graphs " + std::to_string(g + 1) + " and " +
                              std::to_string(graph_of[v - 1] + 1));
        ds.graphs[g].adjacency.at(local_of[u - 1], local_of[v - 1]) = 1.0;
        ds.graphs[g].adjacency.at(local_of[v - 1], local_of[u - 1]) = 1.0;
    }

    // Graph labels: all-integer -> categorical remapped to 0..C-1,
    // otherwise regression.
    {
        std::vector<double> raw(num_graphs);
        bool integral = true;
        for (long g = 0; g < num_graphs; ++g) {
            raw[g] = parse_double(glab_lines[g], glab_file, g + 1);
            if (raw[g] != std::floor(raw[g])) integral = false;
        }
        if (integral) {
            std::vector<long> alphabet;
            for (double v : raw) alphabet.push_back(static_cast<long>(v));
            std::sort(alphabet.begin(), alphabet.end());
            alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
            ds.task = TaskKind::Categorical;
            ds.num_classes = static_cast<int>(alphabet.size());
            for (long g = 0; g < num_graphs; ++g) {
                long v = static_cast<long>(raw[g]);
                ds.graphs[g].label = static_cast<double>(
                    std::lower_bound(alphabet.begin(), alphabet.end(), v) - alphabet.begin());
            }
        } else {
            ds.task = TaskKind::Regression;
            ds.num_classes = 0;
            for (long g = 0; g < num_graphs; ++g) ds.graphs[g].label = raw[g];
        }
    }

    // Node labels -> one-hot; node attributes -> raw columns; both -> concat.
    auto nlab_lines = read_lines(nlab_file, false);
    auto nattr_lines = read_lines(nattr_file, false);
    std::vector<int> node_label(total_nodes, 0);
    std::vector<std::vector<double>> node_attr;
    int label_dim = 0, attr_dim = 0;
    std::vector<long> alphabet;
    if (!nlab_lines.empty()) {
        if (static_cast<long>(nlab_lines.size()) != total_nodes)
            throw FormatError(nlab_file + ": expected " + std::to_string(total_nodes) +
                              " lines, got " + std::to_string(nlab_lines.size()));
        for (long i = 0; i < total_nodes; ++i) {
            node_label[i] =
                static_cast<int>(parse_int(nlab_lines[i], nlab_file, i + 1));
            alphabet.push_back(node_label[i]);
        }
        std::sort(alphabet.begin(), alphabet.end());
        alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
        label_dim = static_cast<int>(alphabet.size());
        ds.has_node_labels = true;
    }
    if (!nattr_lines.empty()) {
        if (static_cast<long>(nattr_lines.size()) != total_nodes)
            throw FormatError(nattr_file + ": expected " + std::to_string(total_nodes) +
                              " lines, got " + std::to_string(nattr_lines.size()));
        node_attr.resize(total_nodes);
        for (long i = 0; i < total_nodes; ++i) {
            auto parts = split_commas(nattr_lines[i]);
            for (const std::string& p : parts)
                node_attr[i].push_back(parse_double(p, nattr_file, i + 1));
            if (i > 0 && node_attr[i].size() != node_attr[0].size())
                throw FormatError(nattr_file + ":" + std::to_string(i + 1) +
                                  ": inconsistent attribute count");
        }
        attr_dim = static_cast<int>(node_attr[0].size());
        ds.has_node_attributes = true;
    }

    int d = label_dim + attr_dim;
    if (d == 0) d = 1;  // constant feature
    ds.feature_dim = d;
    for (long g = 0; g < num_graphs; ++g)
        ds.graphs[g].features = Matrix(nodes_per_graph[g], d);
    if (ds.has_node_labels)
        for (long g = 0; g < num_graphs; ++g)
            ds.graphs[g].node_labels = std::vector<int>(nodes_per_graph[g], 0);

    for (long i = 0; i < total_nodes; ++i) {
        Graph& g = ds.graphs[graph_of[i]];
        int r = local_of[i];
        if (label_dim > 0) {
            int pos = static_cast<int>(std::lower_bound(alphabet.begin(), alphabet.end(),
                                                        node_label[i]) -
                                       alphabet.begin());
            g.features.at(r, pos) = 1.0;
            (*g.node_labels)[r] = node_label[i];
        }
        if (attr_dim > 0)
            for (int c = 0; c < attr_dim; ++c)
                g.features.at(r, label_dim + c) = node_attr[i][c];
        if (label_dim == 0 && attr_dim == 0) g.features.at(r, 0) = 1.0;
    }

    // Optional truth mask: header line 'node' or 'edge', then one 0/1 line
    // per node (global node order) or per canonical edge (graphs in order).
    auto mask_lines = read_lines(mask_file, false);
    if (!mask_lines.empty()) {
        const std::string& kind = mask_lines[0];
        if (kind == "node") {
            if (static_cast<long>(mask_lines.size()) != total_nodes + 1)
                throw FormatError(mask_file + ": expected " + std::to_string(total_nodes) +
                                  " node mask lines");
            for (long g = 0; g < num_graphs; ++g)
                ds.graphs[g].node_truth = std::vector<std::uint8_t>(nodes_per_graph[g], 0);
            for (long i = 0; i < total_nodes; ++i) {
                long v = parse_int(mask_lines[i + 1], mask_file, i + 2);
                (*ds.graphs[graph_of[i]].node_truth)[local_of[i]] =
                    static_cast<std::uint8_t>(v != 0);
            }
        } else if (kind == "edge") {
            std::size_t li = 1;
            for (long g = 0; g < num_graphs; ++g) {
                auto edges = ds.graphs[g].edges();
                std::vector<std::uint8_t> mask(edges.size());
                for (std::size_t e = 0; e < edges.size(); ++e, ++li) {
                    if (li >= mask_lines.size())
                        throw FormatError(mask_file + ": too few edge mask lines");
                    long v = parse_int(mask_lines[li], mask_file, li + 1);
                    mask[e] = static_cast<std::uint8_t>(v != 0);
                }
                ds.graphs[g].edge_truth = std::move(mask);
            }
            if (li != mask_lines.size())
                throw FormatError(mask_file + ": too many edge mask lines");
        } else {
            throw FormatError(mask_file + ":1: expected header 'node' or 'edge', got '" +
                              kind + "'");
        }
    }
    return ds;
}

void write_tu_dataset(const std::string& dir, const std::string& name, const Dataset& ds) {
    fs::create_directories(dir);
    auto open = [&](const std::string& file) {
        std::ofstream out(path_join(dir, file), std::ios::binary);
        if (!out) throw IoError("cannot write dataset file: " + path_join(dir, file));
        return out;
    };

    {
        std::ofstream a = open(name + "_A.txt");
        std::ofstream ind = open(name + "_graph_indicator.txt");
        long base = 0;
        for (std::size_t gi = 0; gi < ds.graphs.size(); ++gi) {
            const Graph& g = ds.graphs[gi];
            for (int i = 0; i < g.n; ++i) {
                ind << (gi + 1) << "\n";
                for (int j = 0; j < g.n; ++j)
                    if (g.adjacency.at(i, j) != 0.0)
                        a << (base + i + 1) << ", " << (base + j + 1) << "\n";
            }
            base += g.n;
        }
    }
    {
        std::ofstream out = open(name + "_graph_labels.txt");
        for (const Graph& g : ds.graphs) {
            if (ds.task == TaskKind::Categorical)
                out << static_cast<long>(g.label) << "\n";
            else
                out << fmt_double(g.label) << "\n";
        }
    }
    if (ds.has_node_labels) {
        std::ofstream out = open(name + "_node_labels.txt");
        for (const Graph& g : ds.graphs) {
            if (!g.node_labels) throw IoError("dataset declares node labels but graph has none");
            for (int v : *g.node_labels) out << v << "\n";
        }
    }
    if (ds.has_node_attributes) {
        std::ofstream out = open(name + "_node_attributes.txt");
        int label_dim = 0;
        if (ds.has_node_labels) {
            // attributes are the trailing columns after the one-hot block
            std::vector<int> alphabet;
            for (const Graph& g : ds.graphs)
                if (g.node_labels)
                    for (int v : *g.node_labels) alphabet.push_back(v);
            std::sort(alphabet.begin(), alphabet.end());
            alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
            label_dim = static_cast<int>(alphabet.size());
        }
        for (const Graph& g : ds.graphs)
            for (int i = 0; i < g.n; ++i) {
                for (int c = label_dim; c < g.features.cols; ++c) {
                    if (c > label_dim) out << ", ";
                    out << fmt_double(g.features.at(i, c));
                }
                out << "\n";
            }
    }

    bool any_node_mask = false, any_edge_mask = false;
    for (const Graph& g : ds.graphs) {
        any_node_mask = any_node_mask || g.node_truth.has_value();
        any_edge_mask = any_edge_mask || g.edge_truth.has_value();
    }
    if (any_node_mask) {
        std::ofstream out = open(name + "_truth_mask.txt");
        out << "node\n";
        for (const Graph& g : ds.graphs)
            for (int i = 0; i < g.n; ++i)
                out << (g.node_truth && (*g.node_truth)[i] ? 1 : 0) << "\n";
    } else if (any_edge_mask) {
        std::ofstream out = open(name + "_truth_mask.txt");
        out << "edge\n";
        for (const Graph& g : ds.graphs) {
            auto edges = g.edges();
            for (std::size_t e = 0; e < edges.size(); ++e)
                out << (g.edge_truth && (*g.edge_truth)[e] ? 1 : 0) << "\n";
        }
    }
}

std::string dataset_fingerprint(const std::string& dir, const std::string& name) {
    const char* suffixes[] = {"_A.txt",          "_graph_indicator.txt",
                              "_graph_labels.txt", "_node_labels.txt",
                              "_node_attributes.txt", "_truth_mask.txt"};
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const char* data, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
            h ^= static_cast<unsigned char>(data[i]);
            h *= 0x100000001b3ull;
        }
    };
    for (const char* suf : suffixes) {
        std::string path = path_join(dir, name + suf);
        std::ifstream in(path, std::ios::binary);
        if (!in) continue;
        mix(suf, std::string(suf).size());
        char buf[4096];
        while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
            mix(buf, static_cast<std::size_t>(in.gcount()));
    }
    char out[32];
    std::snprintf(out, sizeof(out), "fnv1a:%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace sib
