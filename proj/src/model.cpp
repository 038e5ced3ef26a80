#include "sib/model.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace sib {

std::string to_string(ModelMode m) {
    switch (m) {
        case ModelMode::Sib: return "sib";
        case ModelMode::GcnMean: return "gcn";
        case ModelMode::Attention: return "att";
    }
    return "sib";
}

std::string to_string(Relaxation r) {
    return r == Relaxation::Gumbel ? "gumbel" : "softmax";
}

ModelMode model_mode_from_string(const std::string& s) {
    if (s == "sib") return ModelMode::Sib;
    if (s == "gcn") return ModelMode::GcnMean;
    if (s == "att") return ModelMode::Attention;
    throw ConfigError("unknown mode '" + s + "' (expected sib, gcn or att)");
}

Relaxation relaxation_from_string(const std::string& s) {
    if (s == "softmax") return Relaxation::Softmax;
    if (s == "gumbel") return Relaxation::Gumbel;
    throw ConfigError("unknown relaxation '" + s + "' (expected softmax or gumbel)");
}

void TrainConfig::validate() const {
    if (inner_steps < 1) throw ConfigError("inner_steps must be >= 1");
    if (outer_steps < 1) throw ConfigError("outer_steps must be >= 1");
    if (eta1 <= 0.0 || eta2 <= 0.0) throw ConfigError("learning rates must be positive");
    if (tau <= 0.0) throw ConfigError("gumbel temperature must be positive");
    if (hidden < 1 || layers < 1) throw ConfigError("hidden and layers must be >= 1");
    if (batch_size < 0) throw ConfigError("batch_size must be >= 0");
    if (drop_edge < 0.0 || drop_edge > 1.0) throw ConfigError("drop_edge must lie in [0, 1]");
    if (att_ratio <= 0.0 || att_ratio > 1.0) throw ConfigError("att ratio must lie in (0, 1]");
}

ModelState ModelState::make(ModelMode mode, TaskKind task, int feature_dim, int out_dim,
                            int hidden, int layers, std::uint64_t seed) {
    ModelState st;
    st.mode = mode;
    st.task = task;
    st.feature_dim = feature_dim;
    st.hidden = hidden;
    st.layers = layers;
    st.out_dim = out_dim;
    Rng rng(seed);
    st.encoder = GcnEncoder::make("enc", feature_dim, hidden, layers, rng);
    st.classifier = Mlp::make("clf", {hidden, out_dim}, rng);
    if (mode == ModelMode::Sib) {
        st.assign = Mlp::make("assign", {hidden, hidden, 2}, rng);
        st.stats = Mlp::make("stats", {2 * hidden, hidden, 1}, rng);
        st.snapshot_stats();
    }
    if (mode == ModelMode::Attention) st.att = AttentionReadout::make("att", hidden, rng);
    return st;
}

std::vector<Param*> ModelState::outer_params() {
    std::vector<Param*> out;
    encoder.collect(out);
    if (mode == ModelMode::Sib) assign.collect(out);
    classifier.collect(out);
    if (mode == ModelMode::Attention) att.collect(out);
    return out;
}

std::vector<Param*> ModelState::stats_params() {
    std::vector<Param*> out;
    if (mode == ModelMode::Sib) stats.collect(out);
    return out;
}

std::vector<Param*> ModelState::all_params() {
    std::vector<Param*> out = outer_params();
    for (Param* p : stats_params()) out.push_back(p);
    return out;
}

std::vector<const Param*> ModelState::all_params() const {
    std::vector<const Param*> out;
    encoder.collect_const(out);
    if (mode == ModelMode::Sib) assign.collect_const(out);
    classifier.collect_const(out);
    if (mode == ModelMode::Attention) att.collect_const(out);
    if (mode == ModelMode::Sib) stats.collect_const(out);
    return out;
}

void ModelState::snapshot_stats() {
    stats_snapshot.clear();
    std::vector<Param*> ps = stats_params();
    for (Param* p : ps) stats_snapshot.push_back(p->value);
}

void ModelState::reset_stats() {
    std::vector<Param*> ps = stats_params();
    if (ps.size() != stats_snapshot.size())
        throw DomainError("statistics network snapshot is missing");
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = stats_snapshot[i];
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelState& state,
                     const CheckpointMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << "sibckpt 1\n";
    out << "mode " << to_string(state.mode) << "\n";
    out << "task " << (state.task == TaskKind::Categorical ? "categorical" : "regression")
        << "\n";
    out << "feature_dim " << state.feature_dim << "\n";
    out << "hidden " << state.hidden << "\n";
    out << "layers " << state.layers << "\n";
    out << "out_dim " << state.out_dim << "\n";
    out << "seed " << meta.seed << "\n";
    out << "split " << fmt_double(meta.split.train) << " " << fmt_double(meta.split.val)
        << " " << fmt_double(meta.split.test) << "\n";
    out << "att_ratio " << fmt_double(meta.att_ratio) << "\n";
    out << "fingerprint "
        << (meta.dataset_fingerprint.empty() ? "none" : meta.dataset_fingerprint) << "\n";
    for (const Param* p : state.all_params()) {
        out << "tensor " << p->name << " " << p->value.rows << " " << p->value.cols << "\n";
        for (int i = 0; i < p->value.rows; ++i) {
            for (int j = 0; j < p->value.cols; ++j) {
                if (j) out << " ";
                out << fmt_double(p->value.at(i, j));
            }
            out << "\n";
        }
    }
    out << "end\n";
}

ModelState load_checkpoint(const std::string& path, CheckpointMeta* meta_out) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "sibckpt 1")
        throw FormatError(path + ":1: not a sibckpt v1 file");

    std::map<std::string, std::string> kv;
    std::streampos tensors_start;
    while (true) {
        tensors_start = in.tellg();
        if (!std::getline(in, line)) throw FormatError(path + ": truncated header");
        if (line.rfind("tensor ", 0) == 0 || line == "end") break;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        std::string rest;
        std::getline(ls, rest);
        if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
        kv[key] = rest;
    }
    in.seekg(tensors_start);

    ModelMode mode = model_mode_from_string(kv.at("mode"));
    TaskKind task = kv.at("task") == "regression" ? TaskKind::Regression
                                                  : TaskKind::Categorical;
    int feature_dim = std::stoi(kv.at("feature_dim"));
    int hidden = std::stoi(kv.at("hidden"));
    int layers = std::stoi(kv.at("layers"));
    int out_dim = std::stoi(kv.at("out_dim"));

    ModelState state = ModelState::make(mode, task, feature_dim, out_dim, hidden, layers, 0);
    std::map<std::string, Param*> by_name;
    for (Param* p : state.all_params()) by_name[p->name] = p;

    while (std::getline(in, line)) {
        if (line == "end") break;
        std::istringstream ls(line);
        std::string tag, name;
        int rows = 0, cols = 0;
        ls >> tag >> name >> rows >> cols;
        if (tag != "tensor" || ls.fail())
            throw FormatError(path + ": malformed tensor header '" + line + "'");
        auto it = by_name.find(name);
        if (it == by_name.end())
            throw FormatError(path + ": unknown tensor '" + name + "'");
        Param* p = it->second;
        if (p->value.rows != rows || p->value.cols != cols)
            throw FormatError(path + ": tensor '" + name + "' has shape " +
                              shape_str(rows, cols) + ", expected " +
                              shape_str(p->value.rows, p->value.cols));
        for (int i = 0; i < rows; ++i) {
            if (!std::getline(in, line))
                throw FormatError(path + ": truncated tensor '" + name + "'");
            std::istringstream row(line);
            for (int j = 0; j < cols; ++j)
                if (!(row >> p->value.at(i, j)))
                    throw FormatError(path + ": bad value in tensor '" + name + "' row " +
                                      std::to_string(i));
        }
    }
    if (mode == ModelMode::Sib) state.snapshot_stats();

    if (meta_out) {
        meta_out->seed = kv.count("seed") ? std::stoull(kv.at("seed")) : 0;
        if (kv.count("split")) {
            std::istringstream ss(kv.at("split"));
            ss >> meta_out->split.train >> meta_out->split.val >> meta_out->split.test;
        }
        if (kv.count("att_ratio")) meta_out->att_ratio = std::stod(kv.at("att_ratio"));
        if (kv.count("fingerprint") && kv.at("fingerprint") != "none")
            meta_out->dataset_fingerprint = kv.at("fingerprint");
    }
    return state;
}

}  // namespace sib
