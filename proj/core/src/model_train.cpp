#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "vbuf/model.hpp"
#include "vbuf/rng.hpp"

namespace vbuf::model {

namespace {

using ad::Graph;
using ad::Tensor;
using ad::Var;

struct ClusterTarget {
  bool has_parent = false;
  std::string parent_id;
  int lib_index = -1;
  Pt parent_rel;
};

// Majority ground-truth parent among the cells the model assigned to a
// cluster. Count ties prefer a concrete parent over None, then id order.
ClusterTarget majority_target(const TrainingPair& pair,
                              const std::vector<int>& members)
{
  std::map<std::string, int> votes;  // "" stands for None
  for (int i : members) {
    const auto& t = pair.targets[i];
    votes[t.has_parent ? t.parent_id : ""] += 1;
  }
  std::string best;
  int best_votes = -1;
  for (const auto& [id, n] : votes) {
    const bool better =
        n > best_votes
        || (n == best_votes && !id.empty()
            && (best.empty() || id < best));
    if (better) {
      best = id;
      best_votes = n;
    }
  }
  ClusterTarget out;
  if (!best.empty()) {
    for (size_t i = 1; i < pair.targets.size(); ++i) {
      if (pair.targets[i].has_parent && pair.targets[i].parent_id == best) {
        out.has_parent = true;
        out.parent_id = best;
        out.lib_index = pair.targets[i].lib_index;
        out.parent_rel = pair.targets[i].parent_rel;
        break;
      }
    }
  }
  return out;
}

std::vector<Graph::PairLabel> sample_pairs(const TrainingPair& pair,
                                           int pair_cap, Rng* rng)
{
  const int n = static_cast<int>(pair.cells.size());
  std::vector<Graph::PairLabel> out;
  auto same_parent = [&](int i, int j) {
    const auto& a = pair.targets[i];
    const auto& b = pair.targets[j];
    return a.has_parent && b.has_parent && a.parent_id == b.parent_id;
  };
  const int m = n - 1;
  if (m < 2) {
    return out;
  }
  if (m <= pair_cap || rng == nullptr) {
    for (int i = 1; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        out.push_back({i, j, same_parent(i, j)});
      }
    }
  } else {
    const int samples = pair_cap * m;
    for (int s = 0; s < samples; ++s) {
      const int i = 1 + static_cast<int>(rng->uniform_int(0, m - 1));
      int j = 1 + static_cast<int>(rng->uniform_int(0, m - 2));
      if (j >= i) {
        ++j;
      }
      out.push_back({std::min(i, j), std::max(i, j), same_parent(i, j)});
    }
  }
  return out;
}

// Bookkeeping for the tree the model predicts across teacher-forced
// iterations. Ground-truth buffers appearing in later inputs act as
// stand-ins for the predictions that targeted them, which grafts the
// per-level predictions into one connected tree.
struct PredictedBuffer {
  int lib_index = 0;
  Var loc;       // 1x2, driver-relative
  Var prob_row;  // 1x6 softmax over types
  int parent = -1;
  std::vector<int> child_preds;
  std::vector<std::string> child_sinks;
};

struct PredictedTree {
  std::vector<PredictedBuffer> buffers;
  std::map<std::string, int> sink_parent;
  std::map<std::string, std::vector<int>> surrogates;
  std::set<std::string> sinks_seen;
};

struct LossAccum {
  Var inner;
  double cluster = 0.0;
  double type = 0.0;
  double loc = 0.0;
};

void accumulate_pair(Graph& g,
                     const BufferModel& model,
                     const TrainingPair& pair,
                     const BufferModel::Forward& fw,
                     const BufferLibrary& lib,
                     Rng* pair_rng,
                     LossAccum& acc,
                     PredictedTree& pred)
{
  const ModelConfig& cfg = model.config();
  const int n = static_cast<int>(pair.cells.size());
  const int K = cfg.clusters;
  const Tensor& m_val = fw.m.val();

  // Hard cluster of each non-driver cell.
  std::vector<int> assign(n, -1);
  std::vector<std::vector<int>> members(K);
  for (int i = 1; i < n; ++i) {
    int best = 0;
    for (int k = 1; k < K; ++k) {
      if (m_val.at(i, k) > m_val.at(i, best)) {
        best = k;
      }
    }
    assign[i] = best;
    members[best].push_back(i);
  }

  std::vector<ClusterTarget> targets(K);
  for (int k = 0; k < K; ++k) {
    if (!members[k].empty()) {
      targets[k] = majority_target(pair, members[k]);
    }
  }

  // Cluster contrastive loss on the clustering representation.
  Var l_c = g.contrastive_loss(fw.x_u,
                               sample_pairs(pair, cfg.pair_cap, pair_rng));

  // Type classification: focal loss against per-cluster one-hot targets.
  Tensor onehot(K, cfg.type_out, 0.0);
  for (int k = 0; k < K; ++k) {
    const int cls = targets[k].has_parent ? targets[k].lib_index + 1 : 0;
    onehot.at(k, cls) = 1.0;
  }
  Var probs = g.softmax_rows(fw.zc_type, 1.0);
  Var l_bt = g.focal_loss(probs, onehot, cfg.focal_gamma);

  // Location regression on clusters with a concrete parent.
  std::vector<int> loc_rows;
  for (int k = 0; k < K; ++k) {
    if (targets[k].has_parent) {
      loc_rows.push_back(k);
    }
  }
  Var l_bl;
  if (!loc_rows.empty()) {
    Tensor want(static_cast<int>(loc_rows.size()), 2);
    for (size_t r = 0; r < loc_rows.size(); ++r) {
      want.at(static_cast<int>(r), 0) = targets[loc_rows[r]].parent_rel.x;
      want.at(static_cast<int>(r), 1) = targets[loc_rows[r]].parent_rel.y;
    }
    l_bl = g.mse_loss(g.select_rows(fw.zc_loc, loc_rows), g.constant(want));
  } else {
    l_bl = g.constant_scalar(0.0);
  }

  acc.cluster += l_c.scalar();
  acc.type += l_bt.scalar();
  acc.loc += l_bl.scalar();
  Var step = g.add(g.add(g.scale(l_c, cfg.w_cluster),
                         g.scale(l_bt, cfg.w_type)),
                   g.scale(l_bl, cfg.w_loc));
  acc.inner = acc.inner.valid() ? g.add(acc.inner, step) : step;

  // Grafting pass: realize extracted clusters as predicted buffers and
  // wire up parents for the nodes assigned to them.
  const auto extracted = extract_clusters(m_val, fw.zc_type.val(), K);
  std::map<int, int> cluster_pred;  // cluster -> index in pred.buffers
  for (int k : extracted) {
    int argmax = 0;
    const Tensor& zt = fw.zc_type.val();
    for (int c = 1; c < zt.cols; ++c) {
      if (zt.at(k, c) > zt.at(k, argmax)) {
        argmax = c;
      }
    }
    PredictedBuffer pb;
    pb.lib_index = argmax - 1;
    pb.loc = g.select_rows(fw.zc_loc, {k});
    pb.prob_row = g.select_rows(probs, {k});
    cluster_pred[k] = static_cast<int>(pred.buffers.size());
    pred.buffers.push_back(std::move(pb));
  }
  for (int i = 1; i < n; ++i) {
    const Cell& c = pair.cells[i];
    if (c.kind == CellKind::Sink) {
      pred.sinks_seen.insert(c.id);
    }
    auto it = cluster_pred.find(assign[i]);
    if (it == cluster_pred.end()) {
      continue;
    }
    const int pidx = it->second;
    if (c.kind == CellKind::Sink) {
      pred.sink_parent.emplace(c.id, pidx);  // first assignment wins
    } else {
      for (int s : pred.surrogates[c.id]) {
        if (pred.buffers[s].parent < 0) {
          pred.buffers[s].parent = pidx;
        }
      }
    }
  }
  for (int k : extracted) {
    const ClusterTarget& t = targets[k];
    if (t.has_parent) {
      pred.surrogates[t.parent_id].push_back(cluster_pred[k]);
    }
  }
  (void)lib;
}

struct PenaltyVars {
  Var erc;
  Var wire;
  Var area;
};

PenaltyVars build_penalties(Graph& g,
                            const BufferModel& model,
                            const TrainingTree& t,
                            PredictedTree& pred,
                            const BufferLibrary& lib,
                            const TechParams& tech)
{
  const ModelConfig& cfg = model.config();
  const Cell& driver = t.tree.driver();
  const Pt origin = driver.loc();

  for (auto& [sink, pidx] : pred.sink_parent) {
    pred.buffers[pidx].child_sinks.push_back(sink);
  }
  std::vector<std::string> driver_sinks;
  std::vector<int> driver_preds;
  for (const std::string& s : pred.sinks_seen) {
    if (!pred.sink_parent.count(s)) {
      driver_sinks.push_back(s);
    }
  }
  for (size_t i = 0; i < pred.buffers.size(); ++i) {
    if (pred.buffers[i].parent >= 0) {
      pred.buffers[pred.buffers[i].parent].child_preds.push_back(
          static_cast<int>(i));
    } else {
      driver_preds.push_back(static_cast<int>(i));
    }
  }

  Var p_cap = g.constant_scalar(0.0);
  Var p_fanout = g.constant_scalar(0.0);
  Var p_wire = g.constant_scalar(0.0);

  auto stage = [&](Var head_pt, double max_cap, int max_fanout,
                   const std::vector<std::string>& sink_children,
                   const std::vector<int>& pred_children) {
    const int fanout = static_cast<int>(sink_children.size())
                       + static_cast<int>(pred_children.size());
    if (fanout == 0) {
      return;
    }
    std::vector<Var> rows{head_pt};
    double sum_cin = 0.0;
    if (!sink_children.empty()) {
      Tensor pts(static_cast<int>(sink_children.size()), 2);
      for (size_t i = 0; i < sink_children.size(); ++i) {
        const Cell* s = t.tree.find(sink_children[i]);
        pts.at(static_cast<int>(i), 0) = s->x - origin.x;
        pts.at(static_cast<int>(i), 1) = s->y - origin.y;
        sum_cin += s->elec.input_cap;
      }
      rows.push_back(g.constant(pts));
    }
    for (int pidx : pred_children) {
      rows.push_back(pred.buffers[pidx].loc);
      sum_cin += lib.buffers[pred.buffers[pidx].lib_index].input_cap;
    }
    Var w = g.bbox_hpwl(g.concat_rows(rows));
    Var c_out = g.add_scalar(
        g.scale(w, tech.alpha * tech.unit_wire_cap), sum_cin);
    p_cap = g.add(p_cap, g.relu(g.add_scalar(c_out, -max_cap)));
    p_fanout = g.add(p_fanout,
                     g.constant_scalar(std::max(
                         0.0, static_cast<double>(fanout) - max_fanout)));
    p_wire = g.add(
        p_wire,
        g.relu(g.add_scalar(g.scale(w, tech.alpha), -tech.max_wirelength)));
  };

  for (size_t i = 0; i < pred.buffers.size(); ++i) {
    const PredictedBuffer& pb = pred.buffers[i];
    const BufferSpec& spec = lib.buffers[pb.lib_index];
    stage(pb.loc, spec.max_output_cap, spec.max_fanout, pb.child_sinks,
          pb.child_preds);
  }
  {
    Tensor zero(1, 2, 0.0);
    stage(g.constant(zero), driver.elec.max_cap, driver.elec.max_fanout,
          driver_sinks, driver_preds);
  }

  PenaltyVars out;
  out.erc = g.add(p_cap, p_fanout);
  out.wire = p_wire;
  if (pred.buffers.empty()) {
    out.area = g.constant_scalar(0.0);
  } else {
    // Expected buffer area through the soft type probabilities keeps the
    // area penalty differentiable; the None class carries zero area.
    Tensor areas(cfg.type_out, 1, 0.0);
    for (int x = 0; x < lib.size(); ++x) {
      areas.at(x + 1, 0) = lib.buffers[x].area;
    }
    Var areas_c = g.constant(areas);
    Var total;
    for (const PredictedBuffer& pb : pred.buffers) {
      Var a = g.matmul(pb.prob_row, areas_c);
      total = total.valid() ? g.add(total, a) : a;
    }
    total = g.add_scalar(total, 1e-300);
    Var excess = g.add_scalar(g.log(total),
                              -std::log(lib.smallest().area));
    out.area = g.scale(g.relu(excess), cfg.w_area);
  }
  return out;
}

struct BuiltLoss {
  Var total;
  LossAccum acc;
  double penalty = 0.0;
};

BuiltLoss build_tree_loss(Graph& g,
                          const BufferModel& model,
                          const TrainingTree& t,
                          const BufferLibrary& lib,
                          const TechParams& tech,
                          double tau,
                          Rng* noise_rng,
                          bool use_penalties,
                          std::map<std::string, Var>* param_vars)
{
  const ModelConfig& cfg = model.config();
  BuiltLoss out;
  PredictedTree pred;

  for (const TrainingPair& pair : t.pairs) {
    const Tensor features = extract_features(pair.cells);
    Tensor noise;
    const Tensor* noise_ptr = nullptr;
    if (noise_rng != nullptr && cfg.gumbel_noise) {
      noise = Tensor(features.rows, cfg.clusters);
      for (double& x : noise.v) {
        x = noise_rng->gumbel();
      }
      noise_ptr = &noise;
    }
    const auto fw = model.forward(g, features, tau, noise_ptr, param_vars);
    accumulate_pair(g, model, pair, fw, lib, noise_rng, out.acc, pred);
  }

  out.total = out.acc.inner;
  if (use_penalties) {
    const PenaltyVars pen = build_penalties(g, model, t, pred, lib, tech);
    Var weighted = g.add(g.add(g.scale(pen.erc, cfg.w_p_erc),
                               g.scale(pen.wire, cfg.w_p_wire)),
                         g.scale(pen.area, cfg.w_p_area));
    out.penalty = weighted.scalar();
    out.total = g.add(out.total, weighted);
  }
  return out;
}

}  // namespace

TreeLoss evaluate_tree_loss(const BufferModel& model,
                            const TrainingTree& tree,
                            const BufferLibrary& lib,
                            const TechParams& tech,
                            double tau)
{
  Graph g;
  const BuiltLoss built =
      build_tree_loss(g, model, tree, lib, tech, tau, nullptr, true, nullptr);
  TreeLoss out;
  out.inner = built.acc.inner.valid() ? built.acc.inner.scalar() : 0.0;
  out.cluster = built.acc.cluster;
  out.type = built.acc.type;
  out.loc = built.acc.loc;
  out.penalty = built.penalty;
  out.total = built.total.valid() ? built.total.scalar() : 0.0;
  return out;
}

bool train_step(BufferModel& model,
                const TrainingTree& tree,
                const BufferLibrary& lib,
                const TechParams& tech,
                double tau,
                double lr,
                const ad::Tensor* /*unused*/,
                uint64_t noise_seed,
                bool use_penalties,
                double* loss_out)
{
  Graph g;
  std::map<std::string, Var> param_vars;
  Rng noise_rng(noise_seed);
  const BuiltLoss built = build_tree_loss(g, model, tree, lib, tech, tau,
                                          &noise_rng, use_penalties,
                                          &param_vars);
  const double loss = built.total.scalar();
  if (loss_out != nullptr) {
    *loss_out = loss;
  }
  if (!std::isfinite(loss)) {
    return false;
  }
  g.backward(built.total);

  std::map<std::string, Tensor> grads;
  for (const auto& [name, var] : param_vars) {
    grads.emplace(name, var.grad());
  }
  ad::AdamConfig adam;
  adam.lr = lr;
  adam.weight_decay = model.config().weight_decay;
  return adam_step(model.params(), grads, adam);
}

std::string TrainResult::to_json() const
{
  nlohmann::json j;
  j["best_epoch"] = best_epoch;
  j["best_val"] = best_val;
  j["epochs"] = nlohmann::json::array();
  for (const EpochLog& e : log) {
    j["epochs"].push_back({{"epoch", e.epoch},
                           {"lr", e.lr},
                           {"tau", e.tau},
                           {"train_loss", e.train_loss},
                           {"val_loss", e.val_loss},
                           {"val_cluster", e.val_cluster},
                           {"val_type", e.val_type},
                           {"val_loc", e.val_loc},
                           {"skipped_trees", e.skipped_trees},
                           {"aborted", e.aborted}});
  }
  return j.dump(2);
}

TrainResult train_model(BufferModel& model,
                        const std::vector<TrainingTree>& train_set,
                        const std::vector<TrainingTree>& val_set,
                        const BufferLibrary& lib,
                        const TechParams& tech,
                        const TrainOptions& opts)
{
  const ModelConfig& cfg = model.config();
  const int max_epochs = opts.max_epochs >= 0 ? opts.max_epochs
                                              : cfg.max_epochs;
  const int patience = opts.patience >= 0 ? opts.patience : cfg.patience;
  const double base_lr = opts.lr > 0 ? opts.lr : cfg.lr;

  TrainResult result;
  ad::ParameterStore best_store = model.params();
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = -1;

  std::vector<int> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) {
    order[i] = static_cast<int>(i);
  }

  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    const double lr =
        base_lr * std::pow(0.5, epoch / std::max(1, cfg.lr_halve_every));
    const double tau = model.tau_for_epoch(epoch);

    Rng shuffle_rng = Rng::sub(opts.seed, "shuffle-" + std::to_string(epoch));
    for (size_t i = order.size(); i > 1; --i) {
      const size_t j =
          static_cast<size_t>(shuffle_rng.uniform_int(0, i - 1));
      std::swap(order[i - 1], order[j]);
    }

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.tau = tau;
    double loss_sum = 0.0;
    int steps = 0;
    const int abort_at = std::max(
        1, static_cast<int>(opts.skip_abort_fraction * train_set.size()));

    for (int idx : order) {
      const uint64_t noise_seed =
          Rng::sub(opts.seed,
                   "noise-" + std::to_string(epoch) + "-"
                       + std::to_string(idx))
              .next_u64();
      double loss = 0.0;
      const bool ok = train_step(model, train_set[idx], lib, tech, tau, lr,
                                 nullptr, noise_seed, opts.use_penalties,
                                 &loss);
      if (!ok) {
        ++log.skipped_trees;
        if (log.skipped_trees > abort_at) {
          log.aborted = true;
          break;
        }
        continue;
      }
      loss_sum += loss;
      ++steps;
    }
    log.train_loss = steps > 0 ? loss_sum / steps : 0.0;

    double val_sum = 0.0, val_c = 0.0, val_t = 0.0, val_l = 0.0;
    for (const TrainingTree& t : val_set) {
      const TreeLoss v = evaluate_tree_loss(model, t, lib, tech,
                                            cfg.tau_end);
      val_sum += v.inner;
      val_c += v.cluster;
      val_t += v.type;
      val_l += v.loc;
    }
    const int nv = std::max<size_t>(1, val_set.size());
    log.val_loss = val_sum / nv;
    log.val_cluster = val_c / nv;
    log.val_type = val_t / nv;
    log.val_loc = val_l / nv;
    result.log.push_back(log);

    if (!val_set.empty() && log.val_loss < best_val) {
      best_val = log.val_loss;
      best_epoch = epoch;
      best_store = model.params();
    }
    if (best_epoch >= 0 && epoch - best_epoch >= patience) {
      break;
    }
  }

  if (best_epoch >= 0) {
    model.params() = best_store;
    result.best_epoch = best_epoch;
    result.best_val = best_val;
  }
  return result;
}

}  // namespace vbuf::model
