#pragma once

#include <string>
#include <vector>

#include "vbuf/dataset.hpp"
#include "vbuf/design.hpp"
#include "vbuf/model.hpp"
#include "vbuf/placer.hpp"

namespace vbuf::pipeline {

struct DesignSpec {
  int movable_cells = 2000;
  int fixed_terminals = 64;
  double utilization = 0.45;
  double nets_per_cell = 1.1;
  double high_fanout_fraction = 0.03;  // cap+fanout violators
  double fat_sink_fraction = 0.015;    // unrepairable loads
  int fanout_lo = 1;
  int fanout_hi = 5;
  int high_fanout_lo = 24;
  int high_fanout_hi = 48;
};

// Five-size synthetic buffer family with geometrically scaled drive.
Technology default_technology();

Design gen_design(const DesignSpec& spec, uint64_t seed);

struct CollectOptions {
  place::PlacerConfig placer;
  double train_ratio = 0.7;
  double val_ratio = 0.2;
};

struct CollectResult {
  std::vector<BufferedTree> trees;
  SplitManifest split;
  std::vector<NetSnapshot> snapshots;
  std::vector<place::TriggerEvent> triggers;
  std::vector<place::TrajectoryPoint> trajectory;
  bool converged = false;
};

// Runs the placer with oracle-backed virtual buffering and harvests every
// tree the oracle produces at the schedule triggers.
CollectResult collect(const Design& design, const Technology& tech,
                      const CollectOptions& opts, uint64_t seed);

void save_collect(const CollectResult& result, const Rect& region,
                  const std::string& dir);

struct LoadedDataset {
  std::vector<BufferedTree> trees;
  SplitManifest split;
};
LoadedDataset load_collect_dataset(const std::string& dir);

// Converts manifest indices into teacher-forcing trees; cap < 0 keeps all.
std::vector<model::TrainingTree> prepare_split(
    const std::vector<BufferedTree>& trees, const std::vector<int>& indices,
    const Technology& tech, int cap = -1);

struct EvalRow {
  std::string engine;
  int iteration = 0;
  double threshold = 0.0;
  double buffer_area = 0.0;
  int buffer_count = 0;
  int slew = 0;
  int cap = 0;
  int fanout = 0;
  int wirelength = 0;
};

struct ComparisonReport {
  struct Summary {
    std::string engine;
    double buffer_area = 0.0;
    double buffer_count = 0.0;
    double slew = 0.0;
    double cap = 0.0;
    double fanout = 0.0;
    double wirelength = 0.0;
  };
  std::vector<EvalRow> rows;
  std::vector<Summary> summaries;

  const Summary& summary_for(const std::string& engine) const;
  std::string to_csv() const;
  std::string to_json() const;
};

// Applies each engine to every snapshot net and scores the resulting
// trees; engine names: "none", "oracle", "mlbuf".
ComparisonReport evaluate_trees(const std::vector<NetSnapshot>& snapshots,
                                const std::vector<std::string>& engines,
                                const Technology& tech,
                                const Rect& region,
                                const model::BufferModel* mdl,
                                const oracle::DpConfig& dp = {});

struct SweepRow {
  int k = 0;
  int iteration = 0;
  double norm_violations = 0.0;
  double norm_area = 0.0;
};
struct SweepResult {
  std::vector<SweepRow> rows;
  std::string to_csv() const;
  std::string to_json() const;
};

// Retrains per cluster count and normalizes violations/area to the k=5
// run, iteration by iteration.
SweepResult sweep_k(std::vector<int> values,
                    const LoadedDataset& dataset,
                    const std::vector<NetSnapshot>& snapshots,
                    const Technology& tech,
                    const Rect& region,
                    const model::ModelConfig& base_cfg,
                    const model::TrainOptions& train_opts);

struct BenchRow {
  int sink_count = 0;
  int nets = 0;
  double oracle_ms = 0.0;  // median per net
  double model_ms = 0.0;
  double ratio = 0.0;
};
struct BenchResult {
  std::vector<BenchRow> rows;
  double model_loglog_slope = 0.0;
  std::string to_csv() const;
  std::string to_json() const;
};

BenchResult bench_runtime(const std::vector<int>& sink_bins,
                          int nets_per_bin,
                          const Technology& tech,
                          const model::BufferModel& mdl,
                          uint64_t seed,
                          const oracle::DpConfig& dp = {});

// Aggregates whatever artifacts the run directories hold into one
// markdown document; absent pieces get explicit gap markers.
std::string make_report_markdown(const std::vector<std::string>& run_dirs);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

std::string stats_to_csv(const DatasetStats& train, const DatasetStats& val,
                         const DatasetStats& test);
std::string stats_to_json(const DatasetStats& all, const DatasetStats& train,
                          const DatasetStats& val, const DatasetStats& test);

}  // namespace vbuf::pipeline
