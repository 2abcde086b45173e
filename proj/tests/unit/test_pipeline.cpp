#include <filesystem>

#include "doctest.h"
#include "fixtures.hpp"
#include "vbuf/dataset.hpp"
#include "vbuf/electrics.hpp"
#include "vbuf/pipeline.hpp"

using namespace vbuf;

TEST_CASE("generated designs validate and reproduce byte-identically")
{
  pipeline::DesignSpec spec;
  spec.movable_cells = 300;
  spec.fixed_terminals = 16;
  const Technology tech = pipeline::default_technology();

  const Design a = pipeline::gen_design(spec, 42);
  for (size_t i = 0; i < a.nets.size(); ++i) {
    CHECK(validate_net(a.materialize(static_cast<int>(i)), tech.params)
              .empty());
  }

  const std::string pa = "/tmp/vbuf_gen_a.json";
  const std::string pb = "/tmp/vbuf_gen_b.json";
  save_design(a, pa);
  save_design(pipeline::gen_design(spec, 42), pb);
  CHECK(pipeline::read_text_file(pa) == pipeline::read_text_file(pb));

  // a different seed moves things
  save_design(pipeline::gen_design(spec, 43), pb);
  CHECK(pipeline::read_text_file(pa) != pipeline::read_text_file(pb));
}

TEST_CASE("generated designs carry enough violating nets")
{
  pipeline::DesignSpec spec;
  spec.movable_cells = 400;
  const Design d = pipeline::gen_design(spec, 7);
  const Technology tech = pipeline::default_technology();
  int violating = 0;
  for (size_t i = 0; i < d.nets.size(); ++i) {
    const Net net = d.materialize(static_cast<int>(i));
    std::vector<Pt> pts{net.driver.loc()};
    for (const Cell& s : net.sinks) {
      pts.push_back(s.loc());
    }
    if (check_erc(net, tech.params).total() > 0
        || hpwl(pts) > tech.params.max_wirelength) {
      ++violating;
    }
  }
  CHECK(violating >= static_cast<int>(0.05 * d.nets.size()));
}

TEST_CASE("design files round-trip")
{
  pipeline::DesignSpec spec;
  spec.movable_cells = 50;
  spec.fixed_terminals = 8;
  const Design d = pipeline::gen_design(spec, 9);
  const std::string path = "/tmp/vbuf_design_rt.json";
  save_design(d, path);
  const Design back = load_design(path);
  REQUIRE(back.cells.size() == d.cells.size());
  REQUIRE(back.nets.size() == d.nets.size());
  CHECK(back.region.rx == d.region.rx);
  CHECK(back.cells[7].id == d.cells[7].id);
  CHECK(back.nets[3].sinks == d.nets[3].sinks);
}

TEST_CASE("technology files round-trip")
{
  const Technology t = pipeline::default_technology();
  const std::string path = "/tmp/vbuf_tech_rt.json";
  save_tech(t, path);
  const Technology back = load_tech(path);
  REQUIRE(back.lib.size() == t.lib.size());
  CHECK(back.lib.buffers[2].name == t.lib.buffers[2].name);
  CHECK(back.lib.buffers[2].max_output_cap
        == t.lib.buffers[2].max_output_cap);
  CHECK(back.params.max_wirelength == t.params.max_wirelength);
  CHECK(back.lib.smallest().name == "BUF_S2");
}

TEST_CASE("split sizes stay within one tree of the ratios")
{
  for (int n : {10, 100, 999, 2357}) {
    const SplitManifest m = split_dataset(n, 0.7, 0.2, 5);
    CHECK(static_cast<int>(m.train.size() + m.validation.size()
                           + m.test.size())
          == n);
    CHECK(std::abs(static_cast<int>(m.train.size())
                   - static_cast<int>(std::llround(0.7 * n)))
          <= 1);
    CHECK(std::abs(static_cast<int>(m.validation.size())
                   - static_cast<int>(std::llround(0.2 * n)))
          <= 1);
    // disjoint and covering
    std::vector<bool> seen(n, false);
    for (const auto* part : {&m.train, &m.validation, &m.test}) {
      for (int i : *part) {
        CHECK(!seen[i]);
        seen[i] = true;
      }
    }
  }
}

TEST_CASE("dataset stats cover counts and ranges")
{
  std::vector<BufferedTree> trees{fixtures::reference_tree(),
                                  BufferedTree::unbuffered(
                                      fixtures::simple_net(2))};
  const DatasetStats s = dataset_stats(trees);
  CHECK(s.tree_count == 2);
  CHECK(s.sink_min == 2);
  CHECK(s.sink_max == 6);
  CHECK(s.buffer_min == 0);
  CHECK(s.buffer_max == 4);

  const std::string csv = pipeline::stats_to_csv(s, s, s);
  CHECK(csv.find("buffered_tree_count,2,2,2") != std::string::npos);
  CHECK(csv.find("sink_count_range,[2;6]") != std::string::npos);
}

TEST_CASE("comparison report averages equal row means")
{
  pipeline::ComparisonReport rep;
  pipeline::ComparisonReport::Summary sum;
  sum.engine = "x";
  for (int i = 0; i < 13; ++i) {
    pipeline::EvalRow r;
    r.engine = "x";
    r.iteration = i;
    r.cap = i;
    rep.rows.push_back(r);
    sum.cap += i;
  }
  sum.cap /= 13.0;
  rep.summaries.push_back(sum);
  double mean = 0.0;
  for (const auto& r : rep.rows) {
    mean += r.cap;
  }
  mean /= 13.0;
  CHECK(rep.summary_for("x").cap == doctest::Approx(mean).epsilon(1e-12));
  CHECK(rep.to_csv().find("engine,iteration") == 0);
}

TEST_CASE("report handles missing run directories")
{
  const std::string md = pipeline::make_report_markdown(
      {"/tmp/vbuf_definitely_missing_dir"});
  CHECK(md.find("missing") != std::string::npos);

  // and reproduces byte-identically from identical inputs
  const std::string md2 = pipeline::make_report_markdown(
      {"/tmp/vbuf_definitely_missing_dir"});
  CHECK(md == md2);
}

TEST_CASE("snapshot files round-trip")
{
  std::vector<NetSnapshot> snaps(2);
  snaps[0].trigger_index = 0;
  snaps[0].threshold = 0.7;
  snaps[0].nets.push_back(fixtures::simple_net(3));
  snaps[1].trigger_index = 1;
  snaps[1].threshold = 0.65;
  const Rect region{0, 0, 50, 50};
  const std::string path = "/tmp/vbuf_snaps.json";
  save_snapshots(snaps, region, path);
  Rect back_region;
  const auto back = load_snapshots(path, &back_region);
  REQUIRE(back.size() == 2);
  CHECK(back_region.rx == 50.0);
  CHECK(back[0].nets.size() == 1);
  CHECK(back[0].nets[0].sinks.size() == 3);
  CHECK(back[0].nets[0].driver.elec.max_cap
        == snaps[0].nets[0].driver.elec.max_cap);
}
