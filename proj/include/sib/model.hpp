#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sib/gnn.hpp"

namespace sib {

enum class ModelMode { Sib, GcnMean, Attention };
enum class Relaxation { Softmax, Gumbel };

std::string to_string(ModelMode m);
std::string to_string(Relaxation r);
ModelMode model_mode_from_string(const std::string& s);
Relaxation relaxation_from_string(const std::string& s);

struct TrainConfig {
    ModelMode mode = ModelMode::Sib;
    double alpha = 5.0;        // weight of the connectivity loss
    double beta = 0.1;         // weight of the MI estimate
    int inner_steps = 20;      // T
    int outer_steps = 100;     // N
    double eta1 = 0.05;        // inner ascent rate
    double eta2 = 0.01;        // outer Adam rate
    std::uint64_t seed = 0;
    Relaxation relaxation = Relaxation::Softmax;
    double tau = 1.0;          // Gumbel-Softmax temperature
    int hidden = 16;
    int layers = 2;
    bool reinit_inner = true;  // phi2 <- phi2^0 before every inner loop
    int batch_size = 0;        // 0 = full batch
    double drop_edge = 0.0;    // DropEdge fraction, resampled per outer step
    double att_ratio = 0.5;    // top-k ratio for the attention baseline
    SplitFractions split;

    void validate() const;
};

// All trainable parameters. theta1 = encoder, theta2 = assignment MLP,
// phi1 = classifier, phi2 = statistics network.
struct ModelState {
    ModelMode mode = ModelMode::Sib;
    TaskKind task = TaskKind::Categorical;
    int feature_dim = 0;
    int hidden = 16;
    int layers = 2;
    int out_dim = 2;  // classes, or 1 for regression

    GcnEncoder encoder;
    Mlp assign;      // h -> h -> 2 (Sib only)
    Mlp classifier;  // h -> out_dim
    Mlp stats;       // 2h -> h -> 1 (Sib only)
    AttentionReadout att;  // Attention mode only

    std::vector<Matrix> stats_snapshot;  // phi2^0

    static ModelState make(ModelMode mode, TaskKind task, int feature_dim, int out_dim,
                           int hidden, int layers, std::uint64_t seed);

    std::vector<Param*> outer_params();      // theta1, theta2, phi1 (+ attention)
    std::vector<Param*> stats_params();      // phi2
    std::vector<Param*> all_params();
    std::vector<const Param*> all_params() const;
    void snapshot_stats();
    void reset_stats();  // phi2 <- phi2^0
};

// Self-describing text checkpoint with named tensors. Meta keys record
// everything evaluation needs to reproduce splits and shapes.
struct CheckpointMeta {
    std::string dataset_fingerprint;
    std::uint64_t seed = 0;
    SplitFractions split;
    double att_ratio = 0.5;
};
void save_checkpoint(const std::string& path, const ModelState& state,
                     const CheckpointMeta& meta);
ModelState load_checkpoint(const std::string& path, CheckpointMeta* meta_out = nullptr);

}  // namespace sib
