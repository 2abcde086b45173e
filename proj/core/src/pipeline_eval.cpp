#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "vbuf/electrics.hpp"
#include "vbuf/pipeline.hpp"
#include "vbuf/rng.hpp"

namespace vbuf::pipeline {

namespace {
using nlohmann::json;
}

const ComparisonReport::Summary& ComparisonReport::summary_for(
    const std::string& engine) const
{
  for (const Summary& s : summaries) {
    if (s.engine == engine) {
      return s;
    }
  }
  throw std::out_of_range("no summary for engine " + engine);
}

std::string ComparisonReport::to_csv() const
{
  std::string csv =
      "engine,iteration,threshold,buffer_area,buffer_count,"
      "slew_violations,cap_violations,fanout_violations,"
      "wirelength_violations\n";
  char buf[256];
  for (const EvalRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.6g,%.6f,%d,%d,%d,%d,%d\n",
                  r.engine.c_str(), r.iteration, r.threshold, r.buffer_area,
                  r.buffer_count, r.slew, r.cap, r.fanout, r.wirelength);
    csv += buf;
  }
  return csv;
}

std::string ComparisonReport::to_json() const
{
  json j;
  j["rows"] = json::array();
  for (const EvalRow& r : rows) {
    j["rows"].push_back({{"engine", r.engine},
                         {"iteration", r.iteration},
                         {"threshold", r.threshold},
                         {"buffer_area", r.buffer_area},
                         {"buffer_count", r.buffer_count},
                         {"slew_violations", r.slew},
                         {"cap_violations", r.cap},
                         {"fanout_violations", r.fanout},
                         {"wirelength_violations", r.wirelength}});
  }
  j["summaries"] = json::array();
  for (const Summary& s : summaries) {
    j["summaries"].push_back({{"engine", s.engine},
                              {"buffer_area", s.buffer_area},
                              {"buffer_count", s.buffer_count},
                              {"slew_violations", s.slew},
                              {"cap_violations", s.cap},
                              {"fanout_violations", s.fanout},
                              {"wirelength_violations", s.wirelength}});
  }
  return j.dump(1);
}

ComparisonReport evaluate_trees(const std::vector<NetSnapshot>& snapshots,
                                const std::vector<std::string>& engines,
                                const Technology& tech,
                                const Rect& region,
                                const model::BufferModel* mdl,
                                const oracle::DpConfig& dp)
{
  ComparisonReport report;
  for (const std::string& engine : engines) {
    ComparisonReport::Summary sum;
    sum.engine = engine;
    for (const NetSnapshot& snap : snapshots) {
      EvalRow row;
      row.engine = engine;
      row.iteration = snap.trigger_index;
      row.threshold = snap.threshold;
      for (const Net& net : snap.nets) {
        BufferedTree tree;
        if (engine == "none") {
          tree = BufferedTree::unbuffered(net);
        } else if (engine == "oracle") {
          tree = oracle::dp_buffer(net, tech.lib, tech.params, dp);
        } else if (engine == "mlbuf") {
          if (mdl == nullptr) {
            throw std::invalid_argument("mlbuf engine needs a checkpoint");
          }
          tree = model::infer(net, *mdl, tech.lib, tech.params, &region);
        } else {
          throw std::invalid_argument("unknown engine " + engine);
        }
        const ErcReport erc = check_erc(tree, tech.params);
        row.buffer_area += tree.buffer_area();
        row.buffer_count += tree.buffer_count();
        row.slew += erc.slew_violations;
        row.cap += erc.cap_violations;
        row.fanout += erc.fanout_violations;
        row.wirelength += erc.wirelength_violations;
      }
      sum.buffer_area += row.buffer_area;
      sum.buffer_count += row.buffer_count;
      sum.slew += row.slew;
      sum.cap += row.cap;
      sum.fanout += row.fanout;
      sum.wirelength += row.wirelength;
      report.rows.push_back(std::move(row));
    }
    const double n = std::max<size_t>(1, snapshots.size());
    sum.buffer_area /= n;
    sum.buffer_count /= n;
    sum.slew /= n;
    sum.cap /= n;
    sum.fanout /= n;
    sum.wirelength /= n;
    report.summaries.push_back(std::move(sum));
  }
  return report;
}

std::string SweepResult::to_csv() const
{
  std::string csv = "k,iteration,norm_violations,norm_area\n";
  char buf[128];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f\n", r.k, r.iteration,
                  r.norm_violations, r.norm_area);
    csv += buf;
  }
  return csv;
}

std::string SweepResult::to_json() const
{
  json j = json::array();
  for (const SweepRow& r : rows) {
    j.push_back({{"k", r.k},
                 {"iteration", r.iteration},
                 {"norm_violations", r.norm_violations},
                 {"norm_area", r.norm_area}});
  }
  return j.dump(1);
}

SweepResult sweep_k(std::vector<int> values,
                    const LoadedDataset& dataset,
                    const std::vector<NetSnapshot>& snapshots,
                    const Technology& tech,
                    const Rect& region,
                    const model::ModelConfig& base_cfg,
                    const model::TrainOptions& train_opts)
{
  if (std::find(values.begin(), values.end(), 5) == values.end()) {
    values.insert(values.begin(), 5);  // the normalization baseline
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  const auto train_trees =
      prepare_split(dataset.trees, dataset.split.train, tech);
  const auto val_trees =
      prepare_split(dataset.trees, dataset.split.validation, tech);

  std::map<int, std::vector<double>> violations;  // k -> per-iteration
  std::map<int, std::vector<double>> areas;

  for (int k : values) {
    model::ModelConfig cfg = base_cfg;
    cfg.clusters = k;
    model::BufferModel mdl(cfg, train_opts.seed + static_cast<uint64_t>(k));
    model::train_model(mdl, train_trees, val_trees, tech.lib, tech.params,
                       train_opts);
    const ComparisonReport rep =
        evaluate_trees(snapshots, {"mlbuf"}, tech, region, &mdl);
    for (const EvalRow& r : rep.rows) {
      violations[k].push_back(r.slew + r.cap + r.fanout + r.wirelength);
      areas[k].push_back(r.buffer_area);
    }
  }

  SweepResult out;
  const auto& base_v = violations.at(5);
  const auto& base_a = areas.at(5);
  for (int k : values) {
    for (size_t it = 0; it < violations[k].size(); ++it) {
      SweepRow row;
      row.k = k;
      row.iteration = static_cast<int>(it);
      const double bv = it < base_v.size() ? base_v[it] : 0.0;
      const double ba = it < base_a.size() ? base_a[it] : 0.0;
      row.norm_violations =
          bv > 0 ? violations[k][it] / bv
                 : (violations[k][it] == 0.0 ? 1.0 : violations[k][it]);
      row.norm_area = ba > 0
                          ? areas[k][it] / ba
                          : (areas[k][it] == 0.0 ? 1.0 : areas[k][it]);
      out.rows.push_back(row);
    }
  }
  return out;
}

std::string BenchResult::to_csv() const
{
  std::string csv = "sink_count,nets,oracle_ms,model_ms,ratio\n";
  char buf[128];
  for (const BenchRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.4f,%.4f,%.4f\n", r.sink_count,
                  r.nets, r.oracle_ms, r.model_ms, r.ratio);
    csv += buf;
  }
  return csv;
}

std::string BenchResult::to_json() const
{
  json j;
  j["rows"] = json::array();
  for (const BenchRow& r : rows) {
    j["rows"].push_back({{"sink_count", r.sink_count},
                         {"nets", r.nets},
                         {"oracle_ms", r.oracle_ms},
                         {"model_ms", r.model_ms},
                         {"ratio", r.ratio}});
  }
  j["model_loglog_slope"] = model_loglog_slope;
  return j.dump(1);
}

namespace {

Net random_bench_net(int sinks, const Rect& region, Rng& rng, int index)
{
  Net net;
  net.id = "bench" + std::to_string(index);
  net.driver.id = net.id + "_d";
  net.driver.kind = CellKind::Driver;
  net.driver.x = rng.uniform(region.lx, region.rx);
  net.driver.y = rng.uniform(region.ly, region.ry);
  net.driver.elec.output_res = rng.uniform(80.0, 200.0);
  net.driver.elec.max_cap = rng.uniform(25.0, 60.0);
  net.driver.elec.max_fanout = static_cast<int>(rng.uniform_int(8, 16));
  net.driver.elec.output_slew = rng.uniform(5.0, 15.0);
  for (int s = 0; s < sinks; ++s) {
    Cell c;
    c.id = net.id + "_s" + std::to_string(s);
    c.kind = CellKind::Sink;
    c.x = rng.uniform(region.lx, region.rx);
    c.y = rng.uniform(region.ly, region.ry);
    c.elec.input_cap = rng.uniform(1.0, 3.0);
    net.sinks.push_back(std::move(c));
  }
  return net;
}

double median(std::vector<double> xs)
{
  if (xs.empty()) {
    return 0.0;
  }
  std::sort(xs.begin(), xs.end());
  const size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

BenchResult bench_runtime(const std::vector<int>& sink_bins,
                          int nets_per_bin,
                          const Technology& tech,
                          const model::BufferModel& mdl,
                          uint64_t seed,
                          const oracle::DpConfig& dp)
{
  using clock = std::chrono::steady_clock;
  const Rect region{0.0, 0.0, 600.0, 600.0};
  Rng rng = Rng::sub(seed, "bench-nets");

  BenchResult out;
  std::vector<double> log_n, log_t;
  int index = 0;
  for (int sinks : sink_bins) {
    if (sinks < 1 || nets_per_bin < 1) {
      continue;  // empty bins are omitted
    }
    std::vector<double> t_oracle, t_model;
    for (int i = 0; i < nets_per_bin; ++i) {
      const Net net = random_bench_net(sinks, region, rng, index++);
      {
        const auto t0 = clock::now();
        const BufferedTree tree =
            oracle::dp_buffer(net, tech.lib, tech.params, dp);
        const auto t1 = clock::now();
        (void)tree;
        t_oracle.push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count());
      }
      {
        const auto t0 = clock::now();
        const BufferedTree tree =
            model::infer(net, mdl, tech.lib, tech.params, &region);
        const auto t1 = clock::now();
        (void)tree;
        t_model.push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count());
      }
    }
    BenchRow row;
    row.sink_count = sinks;
    row.nets = nets_per_bin;
    row.oracle_ms = median(t_oracle);
    row.model_ms = median(t_model);
    row.ratio = row.model_ms > 0 ? row.oracle_ms / row.model_ms : 0.0;
    out.rows.push_back(row);
    if (row.model_ms > 0) {
      log_n.push_back(std::log(static_cast<double>(sinks)));
      log_t.push_back(std::log(row.model_ms));
    }
  }

  // Least-squares slope of log(time) over log(sinks).
  if (log_n.size() >= 2) {
    const size_t n = log_n.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
      sx += log_n[i];
      sy += log_t[i];
      sxx += log_n[i] * log_n[i];
      sxy += log_n[i] * log_t[i];
    }
    out.model_loglog_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return out;
}

}  // namespace vbuf::pipeline
