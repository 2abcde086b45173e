#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "vbuf/pipeline.hpp"

namespace vbuf::pipeline {

namespace {
using nlohmann::json;
}

CollectResult collect(const Design& design, const Technology& tech,
                      const CollectOptions& opts, uint64_t seed)
{
  CollectResult result;
  auto observer = [&](int, const Net&, const BufferedTree& tree) {
    result.trees.push_back(tree);
  };
  const place::PlaceResult placed =
      place::place(design, tech, place::Strategy::Oracle, opts.placer, seed,
                   nullptr, observer);
  result.snapshots = placed.snapshots;
  result.triggers = placed.triggers;
  result.trajectory = placed.trajectory;
  result.converged = placed.converged;
  result.split = split_dataset(static_cast<int>(result.trees.size()),
                               opts.train_ratio, opts.val_ratio, seed);
  return result;
}

namespace {

DatasetStats stats_of(const std::vector<BufferedTree>& trees,
                      const std::vector<int>& idx)
{
  std::vector<BufferedTree> subset;
  subset.reserve(idx.size());
  for (int i : idx) {
    subset.push_back(trees[i]);
  }
  return dataset_stats(subset);
}

json trigger_log(const CollectResult& r)
{
  json j;
  j["converged"] = r.converged;
  j["triggers"] = json::array();
  for (const place::TriggerEvent& t : r.triggers) {
    j["triggers"].push_back({{"iteration", t.iteration},
                             {"threshold", t.threshold},
                             {"problematic_nets", t.problematic_nets},
                             {"boxes", t.boxes}});
  }
  return j;
}

}  // namespace

std::string stats_to_csv(const DatasetStats& train, const DatasetStats& val,
                         const DatasetStats& test)
{
  std::string csv =
      "characteristic,training_data,validation_data,test_data\n";
  auto range = [](int lo, int hi) {
    return "[" + std::to_string(lo) + ";" + std::to_string(hi) + "]";
  };
  csv += "buffered_tree_count," + std::to_string(train.tree_count) + ","
         + std::to_string(val.tree_count) + ","
         + std::to_string(test.tree_count) + "\n";
  csv += "sink_count_range," + range(train.sink_min, train.sink_max) + ","
         + range(val.sink_min, val.sink_max) + ","
         + range(test.sink_min, test.sink_max) + "\n";
  csv += "buffer_count_range," + range(train.buffer_min, train.buffer_max)
         + "," + range(val.buffer_min, val.buffer_max) + ","
         + range(test.buffer_min, test.buffer_max) + "\n";
  return csv;
}

std::string stats_to_json(const DatasetStats& all, const DatasetStats& train,
                          const DatasetStats& val, const DatasetStats& test)
{
  auto one = [](const DatasetStats& s) {
    return json{{"buffered_tree_count", s.tree_count},
                {"sink_count_range", {s.sink_min, s.sink_max}},
                {"buffer_count_range", {s.buffer_min, s.buffer_max}}};
  };
  json j;
  j["all"] = one(all);
  j["training_data"] = one(train);
  j["validation_data"] = one(val);
  j["test_data"] = one(test);
  return j.dump(1);
}

void save_collect(const CollectResult& result, const Rect& region,
                  const std::string& dir)
{
  std::filesystem::create_directories(dir);
  save_dataset(result.trees, dir + "/dataset.jsonl");
  write_text_file(dir + "/splits.json", result.split.to_json());
  save_snapshots(result.snapshots, region, dir + "/snapshots.json");

  const DatasetStats all = dataset_stats(result.trees);
  const DatasetStats tr = stats_of(result.trees, result.split.train);
  const DatasetStats va = stats_of(result.trees, result.split.validation);
  const DatasetStats te = stats_of(result.trees, result.split.test);
  write_text_file(dir + "/stats.json", stats_to_json(all, tr, va, te));
  write_text_file(dir + "/stats.csv", stats_to_csv(tr, va, te));

  json log = trigger_log(result);
  log["trajectory"] = json::array();
  for (const place::TrajectoryPoint& p : result.trajectory) {
    log["trajectory"].push_back({{"iteration", p.iteration},
                                 {"overflow", p.overflow},
                                 {"hpwl", p.hpwl},
                                 {"triggers_fired", p.triggers_fired}});
  }
  write_text_file(dir + "/place_log.json", log.dump(1));
}

LoadedDataset load_collect_dataset(const std::string& dir)
{
  LoadedDataset out;
  out.trees = load_dataset(dir + "/dataset.jsonl");
  out.split = SplitManifest::from_json(read_text_file(dir + "/splits.json"));
  return out;
}

std::vector<model::TrainingTree> prepare_split(
    const std::vector<BufferedTree>& trees, const std::vector<int>& indices,
    const Technology& tech, int cap)
{
  std::vector<model::TrainingTree> out;
  for (int i : indices) {
    if (cap >= 0 && static_cast<int>(out.size()) >= cap) {
      break;
    }
    out.push_back(
        model::prepare_training_tree(trees[i], tech.lib, tech.params));
  }
  return out;
}

}  // namespace vbuf::pipeline
