#include "sib/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "sib/metrics.hpp"
#include "sib/tu_io.hpp"

namespace sib::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string infer_name(const std::string& dir, const std::string& given) {
    if (!given.empty()) return given;
    std::string base = fs::path(dir).filename().string();
    if (base.empty()) base = fs::path(dir).parent_path().filename().string();
    if (base.empty()) throw ConfigError("cannot infer dataset name from '" + dir +
                                        "', pass --name");
    return base;
}

void require_empty_or_force(const std::string& dir, bool force) {
    if (fs::exists(dir) && !fs::is_directory(dir))
        throw IoError("output path exists and is not a directory: " + dir);
    if (fs::is_directory(dir) && !fs::is_empty(dir) && !force)
        throw ConfigError("output directory '" + dir +
                          "' is not empty; pass --force to overwrite");
}

json config_to_json(const TrainConfig& cfg) {
    return json{{"mode", to_string(cfg.mode)},
                {"alpha", cfg.alpha},
                {"beta", cfg.beta},
                {"inner_steps", cfg.inner_steps},
                {"outer_steps", cfg.outer_steps},
                {"eta1", cfg.eta1},
                {"eta2", cfg.eta2},
                {"seed", cfg.seed},
                {"relaxation", to_string(cfg.relaxation)},
                {"tau", cfg.tau},
                {"hidden", cfg.hidden},
                {"layers", cfg.layers},
                {"reinit_inner", cfg.reinit_inner},
                {"batch_size", cfg.batch_size},
                {"drop_edge", cfg.drop_edge},
                {"att_ratio", cfg.att_ratio},
                {"split", {{"train", cfg.split.train},
                           {"val", cfg.split.val},
                           {"test", cfg.split.test}}}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.mode = model_mode_from_string(j.at("mode").get<std::string>());
    cfg.alpha = j.at("alpha").get<double>();
    cfg.beta = j.at("beta").get<double>();
    cfg.inner_steps = j.at("inner_steps").get<int>();
    cfg.outer_steps = j.at("outer_steps").get<int>();
    cfg.eta1 = j.at("eta1").get<double>();
    cfg.eta2 = j.at("eta2").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.relaxation = relaxation_from_string(j.at("relaxation").get<std::string>());
    cfg.tau = j.at("tau").get<double>();
    cfg.hidden = j.at("hidden").get<int>();
    cfg.layers = j.at("layers").get<int>();
    cfg.reinit_inner = j.at("reinit_inner").get<bool>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.drop_edge = j.at("drop_edge").get<double>();
    cfg.att_ratio = j.at("att_ratio").get<double>();
    cfg.split.train = j.at("split").at("train").get<double>();
    cfg.split.val = j.at("split").at("val").get<double>();
    cfg.split.test = j.at("split").at("test").get<double>();
    return cfg;
}

// Simple key=value config file; keys match the manifest config keys.
void apply_config_file(TrainConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        std::size_t a = trimmed.find_first_not_of(" \t");
        if (a == std::string::npos || trimmed[a] == '#') continue;
        std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key=value, got '" + line + "'");
        std::string key = trimmed.substr(a, eq - a);
        std::string val = trimmed.substr(eq + 1);
        auto strip = [](std::string& s) {
            std::size_t b = s.find_first_not_of(" \t");
            std::size_t e = s.find_last_not_of(" \t");
            s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        strip(key);
        strip(val);
        try {
            if (key == "mode") cfg.mode = model_mode_from_string(val);
            else if (key == "alpha") cfg.alpha = std::stod(val);
            else if (key == "beta") cfg.beta = std::stod(val);
            else if (key == "inner_steps") cfg.inner_steps = std::stoi(val);
            else if (key == "outer_steps") cfg.outer_steps = std::stoi(val);
            else if (key == "eta1") cfg.eta1 = std::stod(val);
            else if (key == "eta2") cfg.eta2 = std::stod(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "relaxation") cfg.relaxation = relaxation_from_string(val);
            else if (key == "tau") cfg.tau = std::stod(val);
            else if (key == "hidden") cfg.hidden = std::stoi(val);
            else if (key == "layers") cfg.layers = std::stoi(val);
            else if (key == "reinit_inner") cfg.reinit_inner = val == "1" || val == "true";
            else if (key == "batch_size") cfg.batch_size = std::stoi(val);
            else if (key == "drop_edge") cfg.drop_edge = std::stod(val);
            else if (key == "att_ratio") cfg.att_ratio = std::stod(val);
            else if (key == "train_frac") cfg.split.train = std::stod(val);
            else if (key == "val_frac") cfg.split.val = std::stod(val);
            else if (key == "test_frac") cfg.split.test = std::stod(val);
            else
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": unknown config key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value for '" +
                              key + "': '" + val + "'");
        }
    }
}

void write_trace(const std::string& path, const std::vector<TraceRow>& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write trace: " + path);
    for (const TraceRow& r : trace) {
        json j{{"step", r.step},
               {"l_cls", r.l_cls},
               {"l_con", r.l_con},
               {"l_mi", r.l_mi},
               {"total", r.total}};
        j["val_acc"] = r.val_acc ? json(*r.val_acc) : json(nullptr);
        out << j.dump() << "\n";
    }
}

void export_dot(const std::string& path, const Graph& g,
                const std::vector<int>& member_nodes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write export file: " + path);
    std::vector<char> member(g.n, 0);
    for (int i : member_nodes) member[i] = 1;
    out << "graph subgraph_export {\n";
    for (int i = 0; i < g.n; ++i) {
        out << "  " << i << " [member=" << (member[i] ? 1 : 0);
        if (g.node_truth) out << ", truth=" << ((*g.node_truth)[i] ? 1 : 0);
        out << "];\n";
    }
    for (auto [i, j] : g.edges()) out << "  " << i << " -- " << j << ";\n";
    out << "}\n";
}

struct TrainCliState {
    std::string data_dir, name, out_dir, config_file, manifest_file;
    TrainConfig cfg;
    bool force = false;
};

int do_train(TrainCliState& st, CLI::App* cmd) {
    if (!st.manifest_file.empty()) {
        std::ifstream in(st.manifest_file);
        if (!in) throw IoError("cannot open manifest: " + st.manifest_file);
        json m = json::parse(in);
        st.cfg = config_from_json(m.at("config"));
        st.data_dir = m.at("dataset").at("dir").get<std::string>();
        st.name = m.at("dataset").at("name").get<std::string>();
    }
    if (st.data_dir.empty())
        throw ConfigError("train: missing dataset path (--data or --manifest)");
    st.cfg.validate();
    require_empty_or_force(st.out_dir, st.force);
    fs::create_directories(st.out_dir);
    (void)cmd;

    std::string name = infer_name(st.data_dir, st.name);
    Dataset ds = parse_tu_dataset(st.data_dir, name);
    ds = split_dataset(ds, st.cfg.split, st.cfg.seed);
    std::string fingerprint = dataset_fingerprint(st.data_dir, name);

    const std::string ckpt = (fs::path(st.out_dir) / "checkpoint.txt").string();
    const std::string trace_path = (fs::path(st.out_dir) / "trace.ndjson").string();
    const std::string manifest_path = (fs::path(st.out_dir) / "manifest.json").string();

    json manifest{{"command", "train"},
                  {"config", config_to_json(st.cfg)},
                  {"dataset", {{"dir", st.data_dir}, {"name", name},
                               {"fingerprint", fingerprint}}},
                  {"artifacts", {{"checkpoint", ckpt}, {"trace", trace_path}}},
                  {"status", "running"},
                  {"duration_seconds", nullptr}};
    {
        std::ofstream out(manifest_path, std::ios::binary);
        if (!out) throw IoError("cannot write manifest: " + manifest_path);
        out << manifest.dump(2) << "\n";
    }

    auto t0 = std::chrono::steady_clock::now();
    TrainResult result = train(ds, st.cfg);
    auto t1 = std::chrono::steady_clock::now();

    CheckpointMeta meta;
    meta.dataset_fingerprint = fingerprint;
    meta.seed = st.cfg.seed;
    meta.split = st.cfg.split;
    meta.att_ratio = st.cfg.att_ratio;
    save_checkpoint(ckpt, result.state, meta);
    write_trace(trace_path, result.trace);

    manifest["status"] = "complete";
    manifest["duration_seconds"] =
        std::chrono::duration<double>(t1 - t0).count();
    {
        std::ofstream out(manifest_path, std::ios::binary);
        out << manifest.dump(2) << "\n";
    }

    const TraceRow& last = result.trace.back();
    std::cout << "trained " << to_string(st.cfg.mode) << " on " << name << " for "
              << st.cfg.outer_steps << " outer steps\n"
              << "final: l_cls=" << last.l_cls << " l_con=" << last.l_con
              << " l_mi=" << last.l_mi << " total=" << last.total;
    if (last.val_acc) std::cout << " val=" << *last.val_acc;
    std::cout << "\ncheckpoint: " << ckpt << "\n";
    return 0;
}

int run_impl(const std::vector<std::string>& args) {
    CLI::App app{"Subgraph recognition via an information-bottleneck objective"};
    app.require_subcommand(1);

    // ---- generate ----
    CLI::App* gen = app.add_subcommand("generate", "create a dataset directory");
    gen->require_subcommand(1);

    struct {
        std::string out, name = "planted", task = "classification";
        int count = 200, motif = 6, noise = 10;
        double edge_prob = 0.3;
        std::uint64_t seed = 0;
        bool force = false;
    } planted;
    CLI::App* gp = gen->add_subcommand("planted", "cycle-vs-clique motifs with noise nodes");
    gp->add_option("--out", planted.out, "output directory")->required();
    gp->add_option("--count", planted.count, "number of graphs");
    gp->add_option("--motif", planted.motif, "motif size");
    gp->add_option("--noise", planted.noise, "noise nodes per graph");
    gp->add_option("--edge-prob", planted.edge_prob, "noise edge probability");
    gp->add_option("--seed", planted.seed, "generator seed");
    gp->add_option("--name", planted.name, "dataset name");
    gp->add_option("--task", planted.task, "classification | regression");
    gp->add_flag("--force", planted.force, "overwrite a non-empty output directory");

    struct {
        std::string input, name, out, out_name;
        double fraction = 0.3;
        std::uint64_t seed = 0;
        bool line_graph = false, force = false;
    } noisy;
    CLI::App* gn = gen->add_subcommand("noisy-edges", "add redundant edges to a dataset");
    gn->add_option("--input", noisy.input, "source dataset directory")->required();
    gn->add_option("--name", noisy.name, "source dataset name (default: directory name)");
    gn->add_option("--out", noisy.out, "output directory")->required();
    gn->add_option("--out-name", noisy.out_name, "output dataset name");
    gn->add_option("--fraction", noisy.fraction, "added edges as a fraction of |E|");
    gn->add_option("--seed", noisy.seed, "corruption seed");
    gn->add_flag("--line-graph", noisy.line_graph,
                 "emit the line-graph translation (edge masks become node masks)");
    gn->add_flag("--force", noisy.force, "overwrite a non-empty output directory");

    // ---- train ----
    TrainCliState ts;
    CLI::App* tr = app.add_subcommand("train", "train a model and write checkpoint + trace");
    tr->add_option("--data", ts.data_dir, "dataset directory");
    tr->add_option("--name", ts.name, "dataset name (default: directory name)");
    tr->add_option("--out", ts.out_dir, "output directory")->required();
    tr->add_option("--config", ts.config_file, "key=value config file");
    tr->add_option("--manifest", ts.manifest_file, "replay a previous run's manifest");
    tr->add_flag("--force", ts.force, "overwrite a non-empty output directory");
    std::string mode = "sib", relaxation = "softmax";
    auto* omode = tr->add_option("--mode", mode, "sib | gcn | att");
    auto* orelax = tr->add_option("--relaxation", relaxation, "softmax | gumbel");
    auto* oalpha = tr->add_option("--alpha", ts.cfg.alpha, "connectivity loss weight");
    auto* obeta = tr->add_option("--beta", ts.cfg.beta, "MI estimate weight");
    auto* oinner = tr->add_option("--inner-steps", ts.cfg.inner_steps, "inner ascent steps T");
    auto* oouter = tr->add_option("--outer-steps", ts.cfg.outer_steps, "outer steps N");
    auto* oeta1 = tr->add_option("--eta1", ts.cfg.eta1, "inner learning rate");
    auto* oeta2 = tr->add_option("--eta2", ts.cfg.eta2, "outer learning rate");
    auto* oseed = tr->add_option("--seed", ts.cfg.seed, "run seed");
    auto* otau = tr->add_option("--tau", ts.cfg.tau, "gumbel temperature");
    auto* ohidden = tr->add_option("--hidden", ts.cfg.hidden, "hidden width");
    auto* olayers = tr->add_option("--layers", ts.cfg.layers, "encoder depth");
    auto* obatch = tr->add_option("--batch-size", ts.cfg.batch_size, "0 = full batch");
    auto* odrop = tr->add_option("--drop-edge", ts.cfg.drop_edge, "DropEdge fraction");
    auto* oratio = tr->add_option("--ratio", ts.cfg.att_ratio, "attention top-k ratio");
    auto* otrainf = tr->add_option("--train-frac", ts.cfg.split.train, "train fraction");
    auto* ovalf = tr->add_option("--val-frac", ts.cfg.split.val, "validation fraction");
    auto* otestf = tr->add_option("--test-frac", ts.cfg.split.test, "test fraction");
    bool no_reinit = false;
    auto* oreinit = tr->add_flag("--no-reinit-inner", no_reinit,
                                 "keep phi2 across outer steps (ablation)");

    // ---- eval ----
    struct {
        std::string checkpoint, data_dir, name, split = "test", out_dir;
    } ev;
    CLI::App* evc = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
    evc->add_option("--checkpoint", ev.checkpoint, "checkpoint file")->required();
    evc->add_option("--data", ev.data_dir, "dataset directory")->required();
    evc->add_option("--name", ev.name, "dataset name (default: directory name)");
    evc->add_option("--split", ev.split, "train | val | test | all");
    evc->add_option("--out", ev.out_dir, "directory for metrics.json / metrics.txt");

    // ---- export ----
    struct {
        std::string checkpoint, data_dir, name, out;
        int index = 0;
    } ex;
    CLI::App* exc = app.add_subcommand("export", "write one graph with subgraph membership");
    exc->add_option("--checkpoint", ex.checkpoint, "checkpoint file")->required();
    exc->add_option("--data", ex.data_dir, "dataset directory")->required();
    exc->add_option("--name", ex.name, "dataset name (default: directory name)");
    exc->add_option("--index", ex.index, "graph index")->required();
    exc->add_option("--out", ex.out, "output DOT file")->required();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (gp->parsed()) {
        require_empty_or_force(planted.out, planted.force);
        PlantedConfig cfg;
        cfg.count = planted.count;
        cfg.motif_size = planted.motif;
        cfg.noise_size = planted.noise;
        cfg.edge_prob = planted.edge_prob;
        cfg.seed = planted.seed;
        if (planted.task == "regression") cfg.task = TaskKind::Regression;
        else if (planted.task != "classification")
            throw ConfigError("unknown task '" + planted.task +
                              "' (expected classification or regression)");
        Dataset ds = generate_planted_motif(cfg);
        ds.name = planted.name;
        write_tu_dataset(planted.out, planted.name, ds);
        std::cout << "wrote " << ds.graphs.size() << " graphs to " << planted.out << "\n";
        return 0;
    }
    if (gn->parsed()) {
        require_empty_or_force(noisy.out, noisy.force);
        std::string in_name = infer_name(noisy.input, noisy.name);
        Dataset ds = parse_tu_dataset(noisy.input, in_name);
        Dataset corrupted = add_redundant_edges_dataset(ds, noisy.fraction, noisy.seed);
        int before = 0, after = 0;
        for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
            before += ds.graphs[i].edge_count();
            after += corrupted.graphs[i].edge_count();
        }
        if (after - before <
            static_cast<int>(std::ceil(noisy.fraction * before)) - static_cast<int>(ds.graphs.size()))
            std::cerr << "warning: some graphs had too few non-edges, additions were capped\n";
        Dataset out_ds = noisy.line_graph ? line_graph_dataset(corrupted) : corrupted;
        std::string out_name = noisy.out_name.empty()
                                   ? in_name + (noisy.line_graph ? "_noisy_line" : "_noisy")
                                   : noisy.out_name;
        out_ds.name = out_name;
        write_tu_dataset(noisy.out, out_name, out_ds);
        std::cout << "wrote " << out_ds.graphs.size() << " graphs to " << noisy.out
                  << " (edges " << before << " -> " << after << ")\n";
        return 0;
    }
    if (tr->parsed()) {
        if (!ts.config_file.empty()) apply_config_file(ts.cfg, ts.config_file);
        // Flags win over the config file.
        if (omode->count()) ts.cfg.mode = model_mode_from_string(mode);
        if (orelax->count()) ts.cfg.relaxation = relaxation_from_string(relaxation);
        if (oreinit->count()) ts.cfg.reinit_inner = !no_reinit;
        (void)oalpha; (void)obeta; (void)oinner; (void)oouter; (void)oeta1; (void)oeta2;
        (void)oseed; (void)otau; (void)ohidden; (void)olayers; (void)obatch; (void)odrop;
        (void)oratio; (void)otrainf; (void)ovalf; (void)otestf;
        return do_train(ts, tr);
    }
    if (evc->parsed()) {
        CheckpointMeta meta;
        ModelState state = load_checkpoint(ev.checkpoint, &meta);
        std::string name = infer_name(ev.data_dir, ev.name);
        Dataset ds = parse_tu_dataset(ev.data_dir, name);
        if (ds.feature_dim != state.feature_dim)
            throw ShapeError("checkpoint expects feature width " +
                             std::to_string(state.feature_dim) + " but dataset '" + name +
                             "' has width " + std::to_string(ds.feature_dim));
        ds = split_dataset(ds, meta.split, meta.seed);
        std::vector<int> idx;
        if (ev.split == "all") {
            idx.resize(ds.graphs.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        } else {
            idx = ds.split(ev.split);
        }
        if (idx.empty()) throw ConfigError("requested split '" + ev.split + "' is empty");
        MetricsRecord m = evaluate_split(state, ds, idx, meta.att_ratio);
        std::string report = metrics_report(m);
        std::cout << report;
        if (!ev.out_dir.empty()) {
            fs::create_directories(ev.out_dir);
            std::ofstream txt(fs::path(ev.out_dir) / "metrics.txt", std::ios::binary);
            txt << report;
            std::ofstream js(fs::path(ev.out_dir) / "metrics.json", std::ios::binary);
            js << metrics_json(m) << "\n";
        }
        return 0;
    }
    if (exc->parsed()) {
        CheckpointMeta meta;
        ModelState state = load_checkpoint(ex.checkpoint, &meta);
        std::string name = infer_name(ex.data_dir, ex.name);
        Dataset ds = parse_tu_dataset(ex.data_dir, name);
        if (ex.index < 0 || ex.index >= static_cast<int>(ds.graphs.size()))
            throw DomainError("graph index " + std::to_string(ex.index) +
                              " out of range for " + std::to_string(ds.graphs.size()) +
                              " graphs");
        const Graph& g = ds.graphs[ex.index];
        Prediction p = predict(state, g, meta.att_ratio);
        std::vector<int> members = p.has_extraction ? p.extraction.nodes : std::vector<int>{};
        if (p.has_extraction && p.extraction.empty)
            std::cerr << "warning: empty subgraph selection for graph " << ex.index << "\n";
        export_dot(ex.out, g, members);
        std::cout << "wrote " << ex.out << " (" << members.size() << "/" << g.n
                  << " member nodes)\n";
        return 0;
    }
    return 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    try {
        return run_impl(args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace sib::cli
