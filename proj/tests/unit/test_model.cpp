#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "vbuf/model.hpp"
#include "vbuf/oracle.hpp"
#include "vbuf/rng.hpp"

using namespace vbuf;
using ad::Graph;
using ad::Tensor;

namespace {

// Small dims keep unit runs quick; shapes still exercise every path.
model::ModelConfig tiny_config()
{
  model::ModelConfig cfg;
  cfg.d_u = 16;
  cfg.fcn_hidden = 16;
  cfg.clusters = 6;
  cfg.attn_layers = 1;
  return cfg;
}

std::vector<Cell> small_sequence()
{
  std::vector<Cell> cells;
  Cell d = fixtures::driver("d", 10.0, 20.0);
  d.elec.output_cap = 9.0;
  d.elec.output_slew = 4.0;
  cells.push_back(d);
  Cell s = fixtures::sink("s0", 13.0, 24.0, 2.5);
  s.elec.input_slew = 4.0;
  cells.push_back(s);
  Cell s2 = fixtures::sink("s1", 5.0, 14.0, 1.5);
  s2.elec.input_slew = 4.0;
  cells.push_back(s2);
  return cells;
}

}  // namespace

TEST_CASE("feature extraction layout and sentinels")
{
  const Tensor f = model::extract_features(small_sequence());
  REQUIRE(f.rows == 3);
  REQUIRE(f.cols == 12);

  // driver one-hot and sentinels
  CHECK(f.at(0, 0) == 1.0);
  CHECK(f.at(0, 1) == 0.0);
  CHECK(f.at(0, 6) == -1.0);  // input slew n/a
  CHECK(f.at(0, 8) == -1.0);  // input cap n/a
  CHECK(f.at(0, 9) == doctest::Approx(9.0));

  // sink relative coordinates and distance
  CHECK(f.at(1, 1) == 1.0);
  CHECK(f.at(1, 3) == doctest::Approx(3.0));
  CHECK(f.at(1, 4) == doctest::Approx(4.0));
  CHECK(f.at(1, 5) == doctest::Approx(7.0));
  CHECK(f.at(1, 7) == -1.0);   // output slew n/a
  CHECK(f.at(1, 10) == -1.0);  // max cap n/a
  CHECK(f.at(1, 8) == doctest::Approx(2.5));

  // one-hot block sums to 1 on every row
  for (int r = 0; r < f.rows; ++r) {
    CHECK(f.at(r, 0) + f.at(r, 1) + f.at(r, 2) == doctest::Approx(1.0));
  }
}

TEST_CASE("forward shapes follow the configuration")
{
  const model::ModelConfig cfg;  // reference dims
  model::BufferModel mdl(cfg, 1);
  CHECK(mdl.parameter_count() > 400000);
  CHECK(mdl.parameter_count() < 520000);

  Graph g;
  const Tensor f = model::extract_features(small_sequence());
  const auto fw = mdl.forward(g, f, 1.0, nullptr);
  CHECK(fw.x_a.rows() == 3);
  CHECK(fw.x_a.cols() == 12);
  CHECK(fw.x_l.cols() == 3);
  CHECK(fw.x_t.cols() == 5);
  CHECK(fw.x_u.cols() == 128);
  CHECK(fw.m.rows() == 3);
  CHECK(fw.m.cols() == 20);
  CHECK(fw.zc_type.rows() == 20);
  CHECK(fw.zc_type.cols() == 6);
  CHECK(fw.zc_loc.cols() == 2);
  CHECK(fw.z_type.rows() == 3);
  CHECK(fw.z_loc.rows() == 3);
}

TEST_CASE("assignment rows normalize and the driver is masked")
{
  model::BufferModel mdl(tiny_config(), 7);
  Graph g;
  const Tensor f = model::extract_features(small_sequence());
  const auto fw = mdl.forward(g, f, 0.8, nullptr);

  for (int r = 0; r < fw.m_raw.rows(); ++r) {
    double s = 0.0;
    for (int c = 0; c < fw.m_raw.cols(); ++c) {
      s += fw.m_raw.val().at(r, c);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
  for (int c = 0; c < fw.m.cols(); ++c) {
    CHECK(fw.m.val().at(0, c) == 0.0);
  }
  // mapped-back driver predictions are zero
  for (int c = 0; c < fw.z_type.cols(); ++c) {
    CHECK(fw.z_type.val().at(0, c) == 0.0);
  }
}

TEST_CASE("encoders and outputs are permutation-equivariant")
{
  model::BufferModel mdl(tiny_config(), 9);
  std::vector<Cell> cells = small_sequence();
  cells.push_back(fixtures::sink("s2", 19.0, 11.0, 1.0));
  cells.back().elec.input_slew = 4.0;

  Graph g1;
  const auto fw1 = mdl.forward(g1, model::extract_features(cells), 0.9,
                               nullptr);

  std::vector<Cell> swapped = cells;
  std::swap(swapped[1], swapped[3]);  // permute sinks, driver first
  Graph g2;
  const auto fw2 = mdl.forward(g2, model::extract_features(swapped), 0.9,
                               nullptr);

  // row i of the permuted run matches the original row sigma(i)
  const std::vector<int> perm{0, 3, 2, 1};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < fw1.z_loc.cols(); ++c) {
      CHECK(fw2.z_loc.val().at(r, c)
            == doctest::Approx(fw1.z_loc.val().at(perm[r], c))
                   .epsilon(1e-9));
    }
    for (int c = 0; c < fw1.x_a.cols(); ++c) {
      CHECK(fw2.x_a.val().at(r, c)
            == doctest::Approx(fw1.x_a.val().at(perm[r], c)).epsilon(1e-9));
    }
  }
}

TEST_CASE("type scores feed the location decoder")
{
  // Perturbing the type head's final bias must move location outputs.
  model::ModelConfig cfg = tiny_config();
  model::BufferModel a(cfg, 11);
  model::BufferModel b(cfg, 11);
  b.params().at("dec.type.fcn.b3").v[3] += 0.5;

  Graph ga, gb;
  const Tensor f = model::extract_features(small_sequence());
  const auto fa = a.forward(ga, f, 1.0, nullptr);
  const auto fb = b.forward(gb, f, 1.0, nullptr);
  double diff = 0.0;
  for (int i = 0; i < fa.zc_loc.val().size(); ++i) {
    diff += std::abs(fa.zc_loc.val().v[i] - fb.zc_loc.val().v[i]);
  }
  CHECK(diff > 1e-9);
}

TEST_CASE("prepare_training_tree replays the reference decomposition")
{
  const Technology tech = pipeline::default_technology();
  const model::TrainingTree tt = model::prepare_training_tree(
      fixtures::reference_tree(), tech.lib, tech.params);
  REQUIRE(tt.pairs.size() == 3);
  CHECK(tt.pairs[0].cells.size() == 7);
  CHECK(tt.pairs[1].cells.size() == 5);
  CHECK(tt.pairs[2].cells.size() == 3);

  // teacher-forcing inputs equal the ground-truth pair inputs
  const auto pairs = tree_to_pairs(tt.tree);
  for (size_t i = 0; i < pairs.size(); ++i) {
    REQUIRE(tt.pairs[i].cells.size() == pairs[i].input.size());
    for (size_t j = 0; j < pairs[i].input.size(); ++j) {
      CHECK(tt.pairs[i].cells[j].id == pairs[i].input[j]);
    }
  }

  // electrical state is live: every input cell carries a slew estimate
  for (const auto& pair : tt.pairs) {
    for (size_t j = 1; j < pair.cells.size(); ++j) {
      CHECK(pair.cells[j].elec.input_slew > 0.0);
    }
  }

  // targets carry the parent's type and location
  const auto& t0 = tt.pairs[0];
  bool saw_parent = false;
  for (size_t j = 1; j < t0.cells.size(); ++j) {
    if (t0.cells[j].id == "v0") {
      REQUIRE(t0.targets[j].has_parent);
      CHECK(t0.targets[j].parent_id == "v6");
      CHECK(t0.targets[j].lib_index == 1);
      CHECK(t0.targets[j].parent_rel.x == doctest::Approx(4.0 - 50.0));
      saw_parent = true;
    }
  }
  CHECK(saw_parent);
}

TEST_CASE("training steps reduce the loss on one tree")
{
  const Technology tech = pipeline::default_technology();
  model::ModelConfig cfg = tiny_config();
  cfg.gumbel_noise = false;
  model::BufferModel mdl(cfg, 21);

  const model::TrainingTree tt = model::prepare_training_tree(
      fixtures::reference_tree(), tech.lib, tech.params);

  const double before =
      model::evaluate_tree_loss(mdl, tt, tech.lib, tech.params, 0.5).inner;
  for (int step = 0; step < 40; ++step) {
    double loss = 0.0;
    const bool ok = model::train_step(mdl, tt, tech.lib, tech.params, 0.5,
                                      3e-3, nullptr, 1234 + step, true,
                                      &loss);
    REQUIRE(ok);
  }
  const double after =
      model::evaluate_tree_loss(mdl, tt, tech.lib, tech.params, 0.5).inner;
  CHECK(after < before);
}

TEST_CASE("inference terminates and yields a rooted tree")
{
  const Technology tech = pipeline::default_technology();
  model::BufferModel mdl(tiny_config(), 33);
  Net net = fixtures::simple_net(6);
  model::InferStats stats;
  const Rect region{-100, -100, 200, 200};
  const BufferedTree t =
      model::infer(net, mdl, tech.lib, tech.params, &region, &stats);
  CHECK(stats.iterations <= tiny_config().max_depth);
  CHECK_NOTHROW(tree_levels(t));
  // every sink present and parented
  for (const Cell& s : net.sinks) {
    CHECK(t.find(s.id) != nullptr);
    CHECK(t.parent.count(s.id) == 1);
  }
  // predicted buffers stay inside the clamp region
  for (const Cell& c : t.nodes) {
    if (c.kind == CellKind::Buffer) {
      CHECK(c.x >= region.lx);
      CHECK(c.x <= region.rx);
      CHECK(c.y >= region.ly);
      CHECK(c.y <= region.ry);
    }
  }
}

TEST_CASE("checkpoints restore the exact model")
{
  const Technology tech = pipeline::default_technology();
  model::BufferModel mdl(tiny_config(), 55);
  const std::string path = "/tmp/vbuf_test_checkpoint.json";
  mdl.save_checkpoint(path);
  const model::BufferModel back = model::BufferModel::load_checkpoint(path);
  CHECK(back.parameter_count() == mdl.parameter_count());

  Net net = fixtures::simple_net(4);
  const BufferedTree a = model::infer(net, mdl, tech.lib, tech.params);
  const BufferedTree b = model::infer(net, back, tech.lib, tech.params);
  CHECK(trees_isomorphic(a, b));
}

TEST_CASE("checkpoint shape validation rejects mismatches")
{
  model::BufferModel mdl(tiny_config(), 55);
  model::ModelConfig other = tiny_config();
  other.d_u = 24;
  CHECK_THROWS(model::BufferModel(other, mdl.params()));
}
