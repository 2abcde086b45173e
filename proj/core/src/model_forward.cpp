#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "vbuf/model.hpp"
#include "vbuf/rng.hpp"

namespace vbuf::model {

namespace {

using ad::Graph;
using ad::Tensor;
using ad::Var;

// Fixed diagonal conditioning of the raw feature columns (microns, ps,
// fF, ohms) onto O(1) activations, and the inverse scale on the location
// head. Both are constant reparameterizations of the adjacent layers;
// the interface stays in physical units.
constexpr double kFeatureScale[12] = {1.0,       1.0,       1.0,
                                      1.0 / 50,  1.0 / 50,  1.0 / 50,
                                      1.0 / 10,  1.0 / 10,  1.0 / 10,
                                      1.0 / 50,  1.0 / 50,  1.0 / 100};
constexpr double kLocOutputScale = 50.0;

int head_dim(int width, int heads)
{
  return std::max(1, width / heads);
}

struct ParamCtx {
  const ad::ParameterStore* store;
  Graph* g;
  std::map<std::string, Var>* out;  // non-null during training

  Var fetch(const std::string& name)
  {
    Var v = g->leaf(store->at(name), out != nullptr);
    if (out != nullptr) {
      out->emplace(name, v);
    }
    return v;
  }
};

// One residual self-attention block at the tensor's native width.
Var attention_block(ParamCtx& ctx, Var x, const std::string& prefix,
                    int heads)
{
  Graph& g = *ctx.g;
  const int width = x.cols();
  const int dh = head_dim(width, heads);

  Var wq = ctx.fetch(prefix + ".wq");
  Var bq = ctx.fetch(prefix + ".bq");
  Var wk = ctx.fetch(prefix + ".wk");
  Var bk = ctx.fetch(prefix + ".bk");
  Var wv = ctx.fetch(prefix + ".wv");
  Var bv = ctx.fetch(prefix + ".bv");
  Var wo = ctx.fetch(prefix + ".wo");
  Var bo = ctx.fetch(prefix + ".bo");

  Var q = g.add_rowvec(g.matmul(x, wq), bq);
  Var k = g.add_rowvec(g.matmul(x, wk), bk);
  Var v = g.add_rowvec(g.matmul(x, wv), bv);

  std::vector<Var> head_outs;
  for (int h = 0; h < heads; ++h) {
    Var qh = g.slice_cols(q, h * dh, dh);
    Var kh = g.slice_cols(k, h * dh, dh);
    Var vh = g.slice_cols(v, h * dh, dh);
    Var scores = g.scale(g.matmul(qh, g.transpose(kh)),
                         1.0 / std::sqrt(static_cast<double>(dh)));
    Var attn = g.softmax_rows(scores, 1.0);
    head_outs.push_back(g.matmul(attn, vh));
  }
  Var merged = heads == 1 ? head_outs[0] : g.concat_cols(head_outs);
  Var projected = g.add_rowvec(g.matmul(merged, wo), bo);
  return g.add(x, projected);
}

Var attention_stack(ParamCtx& ctx, Var x, const std::string& prefix,
                    int layers, int heads)
{
  for (int l = 0; l < layers; ++l) {
    x = attention_block(ctx, x, prefix + ".l" + std::to_string(l), heads);
  }
  return x;
}

// Three-layer FCN: GELU on the two hidden layers, linear output.
Var fcn3(ParamCtx& ctx, Var x, const std::string& prefix)
{
  Graph& g = *ctx.g;
  Var h1 = g.gelu(g.add_rowvec(g.matmul(x, ctx.fetch(prefix + ".w1")),
                               ctx.fetch(prefix + ".b1")));
  Var h2 = g.gelu(g.add_rowvec(g.matmul(h1, ctx.fetch(prefix + ".w2")),
                               ctx.fetch(prefix + ".b2")));
  return g.add_rowvec(g.matmul(h2, ctx.fetch(prefix + ".w3")),
                      ctx.fetch(prefix + ".b3"));
}

}  // namespace

std::string ModelConfig::to_json() const
{
  nlohmann::json j;
  j["d_f"] = d_f;
  j["d_a"] = d_a;
  j["d_l"] = d_l;
  j["d_t"] = d_t;
  j["d_u"] = d_u;
  j["clusters"] = clusters;
  j["type_out"] = type_out;
  j["loc_out"] = loc_out;
  j["attn_layers"] = attn_layers;
  j["heads"] = heads;
  j["fcn_hidden"] = fcn_hidden;
  j["tau_start"] = tau_start;
  j["tau_end"] = tau_end;
  j["tau_anneal_epochs"] = tau_anneal_epochs;
  j["gumbel_noise"] = gumbel_noise;
  j["w_cluster"] = w_cluster;
  j["w_type"] = w_type;
  j["w_loc"] = w_loc;
  j["w_p_erc"] = w_p_erc;
  j["w_p_wire"] = w_p_wire;
  j["w_p_area"] = w_p_area;
  j["w_area"] = w_area;
  j["focal_gamma"] = focal_gamma;
  j["pair_cap"] = pair_cap;
  j["max_depth"] = max_depth;
  j["lr"] = lr;
  j["weight_decay"] = weight_decay;
  j["lr_halve_every"] = lr_halve_every;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text)
{
  nlohmann::json j = nlohmann::json::parse(text);
  ModelConfig c;
  auto pick = [&](const char* key, auto& field) {
    if (j.contains(key)) {
      field = j.at(key).get<std::decay_t<decltype(field)>>();
    }
  };
  pick("d_f", c.d_f);
  pick("d_a", c.d_a);
  pick("d_l", c.d_l);
  pick("d_t", c.d_t);
  pick("d_u", c.d_u);
  pick("clusters", c.clusters);
  pick("type_out", c.type_out);
  pick("loc_out", c.loc_out);
  pick("attn_layers", c.attn_layers);
  pick("heads", c.heads);
  pick("fcn_hidden", c.fcn_hidden);
  pick("tau_start", c.tau_start);
  pick("tau_end", c.tau_end);
  pick("tau_anneal_epochs", c.tau_anneal_epochs);
  pick("gumbel_noise", c.gumbel_noise);
  pick("w_cluster", c.w_cluster);
  pick("w_type", c.w_type);
  pick("w_loc", c.w_loc);
  pick("w_p_erc", c.w_p_erc);
  pick("w_p_wire", c.w_p_wire);
  pick("w_p_area", c.w_p_area);
  pick("w_area", c.w_area);
  pick("focal_gamma", c.focal_gamma);
  pick("pair_cap", c.pair_cap);
  pick("max_depth", c.max_depth);
  pick("lr", c.lr);
  pick("weight_decay", c.weight_decay);
  pick("lr_halve_every", c.lr_halve_every);
  pick("max_epochs", c.max_epochs);
  pick("patience", c.patience);
  return c;
}

BufferModel::BufferModel(ModelConfig cfg, uint64_t init_seed) : cfg_(cfg)
{
  init_params(init_seed);
}

BufferModel::BufferModel(ModelConfig cfg, ad::ParameterStore store)
    : cfg_(cfg), store_(std::move(store))
{
  validate_shapes();
}

double BufferModel::tau_for_epoch(int epoch) const
{
  if (cfg_.tau_anneal_epochs <= 0 || epoch >= cfg_.tau_anneal_epochs) {
    return cfg_.tau_end;
  }
  const double f = static_cast<double>(epoch) / cfg_.tau_anneal_epochs;
  return cfg_.tau_start + f * (cfg_.tau_end - cfg_.tau_start);
}

namespace {

// Registration order fixes the init stream; every shape derives from the
// config so checkpoints can be validated structurally.
void for_each_parameter(
    const ModelConfig& cfg,
    const std::function<void(const std::string&, int, int)>& emit)
{
  auto attention = [&](const std::string& prefix, int width) {
    const int dh = head_dim(width, cfg.heads);
    const int inner = cfg.heads * dh;
    for (int l = 0; l < cfg.attn_layers; ++l) {
      const std::string p = prefix + ".l" + std::to_string(l);
      emit(p + ".wq", width, inner);
      emit(p + ".bq", 1, inner);
      emit(p + ".wk", width, inner);
      emit(p + ".bk", 1, inner);
      emit(p + ".wv", width, inner);
      emit(p + ".bv", 1, inner);
      emit(p + ".wo", inner, width);
      emit(p + ".bo", 1, width);
    }
  };
  auto fcn = [&](const std::string& prefix, int in, int out) {
    emit(prefix + ".w1", in, cfg.fcn_hidden);
    emit(prefix + ".b1", 1, cfg.fcn_hidden);
    emit(prefix + ".w2", cfg.fcn_hidden, cfg.fcn_hidden);
    emit(prefix + ".b2", 1, cfg.fcn_hidden);
    emit(prefix + ".w3", cfg.fcn_hidden, out);
    emit(prefix + ".b3", 1, out);
  };

  attention("enc.shared", cfg.d_a);
  attention("enc.loc", cfg.d_l);
  attention("enc.elc", cfg.d_t);
  fcn("cluster.fcn", cfg.d_a + cfg.d_l, cfg.d_u);
  emit("cluster.assign.w", cfg.d_u, cfg.clusters);
  emit("cluster.assign.b", 1, cfg.clusters);
  attention("dec.type.attn", cfg.d_u + cfg.d_a + cfg.d_l);
  fcn("dec.type.fcn", cfg.d_u + cfg.d_a + cfg.d_l, cfg.type_out);
  attention("dec.loc.attn", cfg.d_u + cfg.d_a + cfg.d_t + cfg.type_out);
  fcn("dec.loc.fcn", cfg.d_u + cfg.d_a + cfg.d_t + cfg.type_out,
      cfg.loc_out);
}

}  // namespace

void BufferModel::init_params(uint64_t seed)
{
  Rng rng = Rng::sub(seed, "model-init");
  for_each_parameter(cfg_, [&](const std::string& name, int rows, int cols) {
    Tensor t(rows, cols);
    if (rows == 1 && cols >= 1 && name.find(".b") != std::string::npos) {
      // biases start at zero
    } else {
      const double bound = std::sqrt(6.0 / (rows + cols));
      for (double& x : t.v) {
        x = rng.uniform(-bound, bound);
      }
    }
    store_.add(name, std::move(t));
  });
}

void BufferModel::validate_shapes() const
{
  int64_t expected = 0;
  for_each_parameter(cfg_, [&](const std::string& name, int rows, int cols) {
    if (!store_.has(name)) {
      throw std::runtime_error("checkpoint missing parameter " + name);
    }
    const Tensor& t = store_.at(name);
    if (t.rows != rows || t.cols != cols) {
      throw std::runtime_error("checkpoint shape mismatch for " + name);
    }
    expected += static_cast<int64_t>(rows) * cols;
  });
  if (expected != store_.scalar_count()) {
    throw std::runtime_error("checkpoint holds unexpected parameters");
  }
}

BufferModel::Forward BufferModel::forward(
    Graph& g,
    const Tensor& features,
    double tau,
    const Tensor* gumbel,
    std::map<std::string, Var>* param_vars) const
{
  if (features.cols != cfg_.d_f) {
    throw std::invalid_argument("forward: feature width mismatch");
  }
  ParamCtx ctx{&store_, &g, param_vars};

  Tensor conditioned = features;
  for (int r = 0; r < conditioned.rows; ++r) {
    for (int c = 0; c < conditioned.cols; ++c) {
      conditioned.at(r, c) *= kFeatureScale[c];
    }
  }
  Var f = g.constant(conditioned);
  Var f_spatial = g.slice_cols(f, kFeatSpatialStart, kFeatSpatialCount);
  Var f_elec = g.slice_cols(f, kFeatElecStart, kFeatElecCount);

  Forward out;
  out.x_a = attention_stack(ctx, f, "enc.shared", cfg_.attn_layers,
                            cfg_.heads);
  out.x_l = attention_stack(ctx, f_spatial, "enc.loc", cfg_.attn_layers,
                            cfg_.heads);
  out.x_t = attention_stack(ctx, f_elec, "enc.elc", cfg_.attn_layers,
                            cfg_.heads);

  Var al = g.concat_cols({out.x_a, out.x_l});
  out.x_u = fcn3(ctx, al, "cluster.fcn");
  Var logits = g.add_rowvec(g.matmul(out.x_u, ctx.fetch("cluster.assign.w")),
                            ctx.fetch("cluster.assign.b"));
  out.m_raw = g.softmax_rows(logits, tau, gumbel);
  // The driver stays outside every cluster; masking its row removes it
  // from aggregation and from the mapped-back predictions alike.
  out.m = g.zero_rows(out.m_raw, {0});

  Var mt = g.transpose(out.m);
  Var xc_u = g.matmul(mt, out.x_u);
  Var xc_al = g.matmul(mt, al);
  Var xc_at = g.matmul(mt, g.concat_cols({out.x_a, out.x_t}));

  Var type_in = g.concat_cols({xc_u, xc_al});
  out.zc_type = fcn3(ctx,
                     attention_stack(ctx, type_in, "dec.type.attn",
                                     cfg_.attn_layers, cfg_.heads),
                     "dec.type.fcn");

  Var loc_in = g.concat_cols({xc_u, xc_at, out.zc_type});
  out.zc_loc = g.scale(fcn3(ctx,
                            attention_stack(ctx, loc_in, "dec.loc.attn",
                                            cfg_.attn_layers, cfg_.heads),
                            "dec.loc.fcn"),
                       kLocOutputScale);

  out.z_type = g.matmul(out.m, out.zc_type);
  out.z_loc = g.matmul(out.m, out.zc_loc);
  return out;
}

std::vector<int> extract_clusters(const Tensor& m, const Tensor& zc_type,
                                  int k_clusters)
{
  std::vector<int> picked;
  for (int k = 0; k < k_clusters; ++k) {
    int argmax = 0;
    for (int c = 1; c < zc_type.cols; ++c) {
      if (zc_type.at(k, c) > zc_type.at(k, argmax)) {
        argmax = c;
      }
    }
    if (argmax == 0) {
      continue;  // None class
    }
    double strongest = 0.0;
    for (int i = 1; i < m.rows; ++i) {
      strongest = std::max(strongest, m.at(i, k));
    }
    if (strongest > 1.0 / k_clusters) {
      picked.push_back(k);
    }
  }
  return picked;
}

void BufferModel::save_checkpoint(const std::string& path) const
{
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(cfg_.to_json());
  j["store"] = nlohmann::json::parse(store_.to_json());
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint " + path);
  }
  out << j.dump();
}

BufferModel BufferModel::load_checkpoint(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read checkpoint " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j = nlohmann::json::parse(ss.str());
  ModelConfig cfg = ModelConfig::from_json(j.at("config").dump());
  ad::ParameterStore store =
      ad::ParameterStore::from_json(j.at("store").dump());
  return BufferModel(cfg, std::move(store));
}

}  // namespace vbuf::model
