#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vbuf/autodiff.hpp"
#include "vbuf/electrics.hpp"
#include "vbuf/netlist.hpp"
#include "vbuf/optimizer.hpp"
#include "vbuf/tree.hpp"

namespace vbuf::model {

// Architecture and training knobs. The dimension defaults reproduce the
// reference configuration (~0.46M parameters in total).
struct ModelConfig {
  int d_f = 12;       // input feature dimension
  int d_a = 12;       // shared embedding
  int d_l = 3;        // spatial embedding
  int d_t = 5;        // electrical embedding
  int d_u = 128;      // clustering representation
  int clusters = 20;  // K
  int type_out = 6;   // 5 buffer sizes + None
  int loc_out = 2;
  int attn_layers = 2;
  int heads = 2;
  int fcn_hidden = 128;

  double tau_start = 1.0;
  double tau_end = 0.1;
  int tau_anneal_epochs = 100;
  bool gumbel_noise = true;

  double w_cluster = 1.0;  // inner-loop loss weights
  double w_type = 1.0;
  double w_loc = 1.0;
  double w_p_erc = 1.0;  // outer-loop penalty weights
  double w_p_wire = 1.0;
  double w_p_area = 1.0;
  double w_area = 1.0;  // weighting inside the area penalty itself
  double focal_gamma = 2.0;
  int pair_cap = 32;  // all intra-net pairs up to this N, sampled beyond

  int max_depth = 16;  // inference iteration cap

  double lr = 1e-4;
  double weight_decay = 1e-5;
  int lr_halve_every = 10;  // epochs
  int max_epochs = 1000;
  int patience = 60;  // epochs without validation improvement

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

// Feature rows, driver first: kind one-hot, driver-relative coordinates,
// Manhattan distance, then the electrical block with -1 sentinels.
ad::Tensor extract_features(const std::vector<Cell>& cells);

// Column layout of the feature matrix.
inline constexpr int kFeatSpatialStart = 3;  // rel x, rel y, distance
inline constexpr int kFeatSpatialCount = 3;
inline constexpr int kFeatElecStart = 6;  // slews, caps, max cap
inline constexpr int kFeatElecCount = 5;

// One teacher-forcing step: the ground-truth input sequence with live
// electrical state, and each element's parent buffer at this level.
struct TrainingPair {
  struct Target {
    bool has_parent = false;
    std::string parent_id;
    int lib_index = -1;  // buffer type of the parent
    Pt parent_rel;       // parent location, driver-relative
  };
  std::vector<Cell> cells;      // driver first, then id order
  std::vector<Target> targets;  // aligned with cells; [0] unused
};

struct TrainingTree {
  BufferedTree tree;
  std::vector<TrainingPair> pairs;
};

// Decomposes a ground-truth tree into feature-ready pairs, replaying the
// level-by-level electrical updates the inference loop would perform.
TrainingTree prepare_training_tree(const BufferedTree& tree,
                                   const BufferLibrary& lib,
                                   const TechParams& tech);

class BufferModel {
 public:
  BufferModel(ModelConfig cfg, uint64_t init_seed);
  BufferModel(ModelConfig cfg, ad::ParameterStore store);

  const ModelConfig& config() const { return cfg_; }
  ad::ParameterStore& params() { return store_; }
  const ad::ParameterStore& params() const { return store_; }
  int64_t parameter_count() const { return store_.scalar_count(); }

  struct Forward {
    ad::Var x_a;      // N x d_a
    ad::Var x_l;      // N x d_l
    ad::Var x_t;      // N x d_t
    ad::Var x_u;      // N x d_u
    ad::Var m_raw;    // N x K, rows sum to 1
    ad::Var m;        // N x K with the driver row masked out
    ad::Var zc_type;  // K x type_out class scores
    ad::Var zc_loc;   // K x 2
    ad::Var z_type;   // N x type_out
    ad::Var z_loc;    // N x 2
  };

  // Runs one iteration of the model. When `param_vars` is provided the
  // parameters become differentiable leaves and are exposed by name.
  Forward forward(ad::Graph& g,
                  const ad::Tensor& features,
                  double tau,
                  const ad::Tensor* gumbel,
                  std::map<std::string, ad::Var>* param_vars = nullptr) const;

  double tau_for_epoch(int epoch) const;

  void save_checkpoint(const std::string& path) const;
  static BufferModel load_checkpoint(const std::string& path);

 private:
  ModelConfig cfg_;
  ad::ParameterStore store_;

  void init_params(uint64_t seed);
  void validate_shapes() const;
};

// Clusters the model would realize as buffers: argmax type is not None
// and at least one non-driver cell leans on the cluster above uniform.
std::vector<int> extract_clusters(const ad::Tensor& m,
                                  const ad::Tensor& zc_type,
                                  int k_clusters);

struct TrainOptions {
  uint64_t seed = 1;
  int max_epochs = -1;           // override config when >= 0
  int patience = -1;             // override config when >= 0
  double lr = -1.0;              // override config when > 0
  bool use_penalties = true;
  double skip_abort_fraction = 0.01;
};

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double tau = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_cluster = 0.0;
  double val_type = 0.0;
  double val_loc = 0.0;
  int skipped_trees = 0;
  bool aborted = false;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = -1;
  double best_val = 0.0;
  std::string to_json() const;
};

TrainResult train_model(BufferModel& model,
                        const std::vector<TrainingTree>& train_set,
                        const std::vector<TrainingTree>& val_set,
                        const BufferLibrary& lib,
                        const TechParams& tech,
                        const TrainOptions& opts);

// Loss of a single tree under teacher forcing, without updating anything.
struct TreeLoss {
  double inner = 0.0;
  double cluster = 0.0;
  double type = 0.0;
  double loc = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};
TreeLoss evaluate_tree_loss(const BufferModel& model,
                            const TrainingTree& tree,
                            const BufferLibrary& lib,
                            const TechParams& tech,
                            double tau);

// Performs one teacher-forced optimization step on a single tree.
// Returns false when the loss went non-finite and the step was skipped.
bool train_step(BufferModel& model,
                const TrainingTree& tree,
                const BufferLibrary& lib,
                const TechParams& tech,
                double tau,
                double lr,
                const ad::Tensor* noise_seed_unused,
                uint64_t noise_seed,
                bool use_penalties,
                double* loss_out);

struct InferStats {
  int iterations = 0;
  bool truncated = false;
};

// Auto-regressive tree construction with per-iteration electrical
// feature updates. Locations clamp to `region` when provided.
BufferedTree infer(const Net& net,
                   const BufferModel& model,
                   const BufferLibrary& lib,
                   const TechParams& tech,
                   const Rect* region = nullptr,
                   InferStats* stats = nullptr);

}  // namespace vbuf::model
