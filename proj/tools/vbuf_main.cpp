#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "vbuf/dataset.hpp"
#include "vbuf/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vbuf;

namespace {

struct GlobalArgs {
  uint64_t seed = 1;
  std::string config;
  std::string out = "out";
};

model::ModelConfig model_config_from(const GlobalArgs& g)
{
  model::ModelConfig cfg;
  if (!g.config.empty()) {
    cfg = model::ModelConfig::from_json(
        pipeline::read_text_file(g.config));
  }
  return cfg;
}

void save_trajectory(const place::PlaceResult& result,
                     const std::string& dir)
{
  std::string lines;
  char buf[160];
  for (const place::TrajectoryPoint& p : result.trajectory) {
    std::snprintf(buf, sizeof buf,
                  "{\"iteration\":%d,\"overflow\":%.9g,\"hpwl\":%.9g,"
                  "\"triggers_fired\":%d}\n",
                  p.iteration, p.overflow, p.hpwl, p.triggers_fired);
    lines += buf;
  }
  pipeline::write_text_file(dir + "/trajectory.jsonl", lines);

  json log;
  log["converged"] = result.converged;
  log["final_overflow"] = result.final_overflow;
  log["final_hpwl"] = result.final_hpwl;
  log["triggers"] = json::array();
  for (const place::TriggerEvent& t : result.triggers) {
    log["triggers"].push_back({{"iteration", t.iteration},
                               {"threshold", t.threshold},
                               {"problematic_nets", t.problematic_nets},
                               {"boxes", t.boxes}});
  }
  pipeline::write_text_file(dir + "/place_log.json", log.dump(1));
}

void save_positions(const Design& design, const std::vector<Pt>& pos,
                    const std::string& path)
{
  json j;
  j["cells"] = json::array();
  for (size_t i = 0; i < design.cells.size(); ++i) {
    j["cells"].push_back({{"id", design.cells[i].id},
                          {"x", pos[i].x},
                          {"y", pos[i].y},
                          {"movable", design.cells[i].movable}});
  }
  pipeline::write_text_file(path, j.dump());
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Learning-backed virtual buffering for analytical placement"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--seed", g.seed, "root seed for all stages");
  app.add_option("--config", g.config, "model config JSON");
  app.add_option("--out", g.out, "output directory");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic design");
  pipeline::DesignSpec spec;
  gen->add_option("--cells", spec.movable_cells, "movable cell count");
  gen->add_option("--terminals", spec.fixed_terminals, "fixed terminals");
  gen->add_option("--utilization", spec.utilization, "target utilization");
  gen->add_option("--high-fanout", spec.high_fanout_fraction,
                  "high fanout net fraction");
  gen->add_option("--fat-sink", spec.fat_sink_fraction,
                  "unrepairable net fraction");

  // collect
  auto* collect = app.add_subcommand("collect", "harvest oracle trees");
  std::string design_path, tech_path;
  collect->add_option("--design", design_path, "design JSON")->required();
  collect->add_option("--tech", tech_path, "technology JSON")->required();

  // train
  auto* train = app.add_subcommand("train", "train the buffering model");
  std::string dataset_dir;
  int epochs = -1;
  int max_trees = -1;
  train->add_option("--dataset", dataset_dir, "collect output dir")
      ->required();
  train->add_option("--tech", tech_path, "technology JSON")->required();
  train->add_option("--epochs", epochs, "override max epochs");
  train->add_option("--max-trees", max_trees, "cap training trees");

  // infer
  auto* infer_cmd = app.add_subcommand("infer", "buffer nets with the model");
  std::string netlist_path, checkpoint_path, infer_out;
  infer_cmd->add_option("--netlist", netlist_path, "netlist JSON")
      ->required();
  infer_cmd->add_option("--tech", tech_path, "technology JSON")->required();
  infer_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")
      ->required();
  infer_cmd->add_option("--trees-out", infer_out, "output JSONL path");

  // place
  auto* place_cmd = app.add_subcommand("place", "analytical placement");
  std::string strategy_name = "none";
  place_cmd->add_option("--netlist", netlist_path, "design JSON")
      ->required();
  place_cmd->add_option("--tech", tech_path, "technology JSON")->required();
  place_cmd->add_option("--strategy", strategy_name,
                        "none|mlbuf|oracle|adhoc");
  place_cmd->add_option("--checkpoint", checkpoint_path,
                        "model checkpoint (mlbuf strategy)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "compare buffering engines");
  std::string snapshots_path, engines_arg = "none,oracle,mlbuf";
  eval_cmd->add_option("--snapshots", snapshots_path, "snapshots JSON")
      ->required();
  eval_cmd->add_option("--tech", tech_path, "technology JSON")->required();
  eval_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint");
  eval_cmd->add_option("--engines", engines_arg, "comma-separated engines");

  // sweep-k
  auto* sweep_cmd = app.add_subcommand("sweep-k", "cluster-count sweep");
  std::string values_arg = "5,10,20";
  sweep_cmd->add_option("--dataset", dataset_dir, "collect output dir")
      ->required();
  sweep_cmd->add_option("--tech", tech_path, "technology JSON")->required();
  sweep_cmd->add_option("--values", values_arg, "comma-separated k values");
  sweep_cmd->add_option("--epochs", epochs, "training epochs per k");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "runtime comparison");
  std::string bins_arg = "10,50,100,200,300";
  int nets_per_bin = 5;
  bench_cmd->add_option("--tech", tech_path, "technology JSON")->required();
  bench_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")
      ->required();
  bench_cmd->add_option("--bins", bins_arg, "sink-count bins");
  bench_cmd->add_option("--nets-per-bin", nets_per_bin, "nets per bin");

  // report
  auto* report_cmd = app.add_subcommand("report", "aggregate run outputs");
  std::vector<std::string> run_dirs;
  report_cmd->add_option("--run", run_dirs, "run directory (repeatable)");

  CLI11_PARSE(app, argc, argv);

  auto parse_ints = [](const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) {
        out.push_back(std::stoi(tok));
      }
    }
    return out;
  };
  auto parse_strings = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) {
        out.push_back(tok);
      }
    }
    return out;
  };

  try {
    fs::create_directories(g.out);

    if (gen->parsed()) {
      const Design design = pipeline::gen_design(spec, g.seed);
      save_design(design, g.out + "/design.json");
      save_tech(pipeline::default_technology(), g.out + "/tech.json");
      std::cout << "wrote " << g.out << "/design.json ("
                << design.cells.size() << " cells, " << design.nets.size()
                << " nets)\n";
    } else if (collect->parsed()) {
      const Design design = load_design(design_path);
      const Technology tech = load_tech(tech_path);
      pipeline::CollectOptions opts;
      const pipeline::CollectResult result =
          pipeline::collect(design, tech, opts, g.seed);
      pipeline::save_collect(result, design.region, g.out);
      std::cout << "collected " << result.trees.size() << " trees over "
                << result.triggers.size() << " triggers\n";
    } else if (train->parsed()) {
      const Technology tech = load_tech(tech_path);
      const pipeline::LoadedDataset data =
          pipeline::load_collect_dataset(dataset_dir);
      const auto train_trees = pipeline::prepare_split(
          data.trees, data.split.train, tech, max_trees);
      const auto val_trees = pipeline::prepare_split(
          data.trees, data.split.validation, tech,
          max_trees > 0 ? std::max(1, max_trees / 3) : -1);
      model::BufferModel mdl(model_config_from(g), g.seed);
      model::TrainOptions opts;
      opts.seed = g.seed;
      opts.max_epochs = epochs;
      const model::TrainResult log = model::train_model(
          mdl, train_trees, val_trees, tech.lib, tech.params, opts);
      mdl.save_checkpoint(g.out + "/checkpoint.json");
      pipeline::write_text_file(g.out + "/training_log.json", log.to_json());
      std::cout << "trained " << mdl.parameter_count() << " parameters over "
                << log.log.size() << " epochs\n";
    } else if (infer_cmd->parsed()) {
      const Technology tech = load_tech(tech_path);
      const Design design = load_design(netlist_path);
      const model::BufferModel mdl =
          model::BufferModel::load_checkpoint(checkpoint_path);
      std::vector<BufferedTree> trees;
      for (size_t i = 0; i < design.nets.size(); ++i) {
        trees.push_back(model::infer(design.materialize(static_cast<int>(i)),
                                     mdl, tech.lib, tech.params,
                                     &design.region));
      }
      const std::string path =
          infer_out.empty() ? g.out + "/trees.jsonl" : infer_out;
      save_dataset(trees, path);
      std::cout << "wrote " << trees.size() << " trees to " << path << "\n";
    } else if (place_cmd->parsed()) {
      const Technology tech = load_tech(tech_path);
      const Design design = load_design(netlist_path);
      const place::Strategy strategy =
          place::strategy_from_string(strategy_name);
      std::optional<model::BufferModel> mdl;
      if (strategy == place::Strategy::Model) {
        mdl = model::BufferModel::load_checkpoint(checkpoint_path);
      }
      place::PlacerConfig cfg;
      const place::PlaceResult result =
          place::place(design, tech, strategy, cfg, g.seed,
                       mdl ? &*mdl : nullptr);
      save_trajectory(result, g.out);
      save_positions(design, result.positions, g.out + "/placement.json");
      save_snapshots(result.snapshots, design.region,
                     g.out + "/snapshots.json");
      std::cout << "placement " << (result.converged ? "converged" : "ended")
                << " at overflow " << result.final_overflow << " with "
                << result.triggers.size() << " triggers\n";
    } else if (eval_cmd->parsed()) {
      const Technology tech = load_tech(tech_path);
      Rect region;
      const auto snapshots = load_snapshots(snapshots_path, &region);
      std::optional<model::BufferModel> mdl;
      const auto engines = parse_strings(engines_arg);
      for (const std::string& e : engines) {
        if (e == "mlbuf") {
          mdl = model::BufferModel::load_checkpoint(checkpoint_path);
        }
      }
      const pipeline::ComparisonReport report = pipeline::evaluate_trees(
          snapshots, engines, tech, region, mdl ? &*mdl : nullptr);
      pipeline::write_text_file(g.out + "/comparison.csv", report.to_csv());
      pipeline::write_text_file(g.out + "/comparison.json",
                                report.to_json());
      std::cout << "evaluated " << engines.size() << " engines over "
                << snapshots.size() << " iterations\n";
    } else if (sweep_cmd->parsed()) {
      const Technology tech = load_tech(tech_path);
      const pipeline::LoadedDataset data =
          pipeline::load_collect_dataset(dataset_dir);
      Rect region;
      const auto snapshots =
          load_snapshots(dataset_dir + "/snapshots.json", &region);
      model::TrainOptions opts;
      opts.seed = g.seed;
      opts.max_epochs = epochs > 0 ? epochs : 5;
      const pipeline::SweepResult result =
          pipeline::sweep_k(parse_ints(values_arg), data, snapshots, tech,
                            region, model_config_from(g), opts);
      pipeline::write_text_file(g.out + "/sweep_k.csv", result.to_csv());
      pipeline::write_text_file(g.out + "/sweep_k.json", result.to_json());
      std::cout << "swept " << values_arg << "\n";
    } else if (bench_cmd->parsed()) {
      const Technology tech = load_tech(tech_path);
      const model::BufferModel mdl =
          model::BufferModel::load_checkpoint(checkpoint_path);
      const pipeline::BenchResult result = pipeline::bench_runtime(
          parse_ints(bins_arg), nets_per_bin, tech, mdl, g.seed);
      pipeline::write_text_file(g.out + "/runtime.csv", result.to_csv());
      pipeline::write_text_file(g.out + "/runtime.json", result.to_json());
      std::cout << "benchmarked " << result.rows.size() << " bins\n";
    } else if (report_cmd->parsed()) {
      const std::string md = pipeline::make_report_markdown(run_dirs);
      pipeline::write_text_file(g.out + "/report.md", md);
      std::cout << "wrote " << g.out << "/report.md\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
