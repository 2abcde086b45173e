#include <benchmark/benchmark.h>

#include "vbuf/model.hpp"
#include "vbuf/oracle.hpp"
#include "vbuf/pipeline.hpp"
#include "vbuf/placer.hpp"
#include "vbuf/rng.hpp"

using namespace vbuf;

namespace {

Net bench_net(int sinks, uint64_t seed)
{
  Rng rng(seed);
  Net net;
  net.id = "b";
  net.driver.id = "d";
  net.driver.kind = CellKind::Driver;
  net.driver.x = rng.uniform(0, 600);
  net.driver.y = rng.uniform(0, 600);
  net.driver.elec.output_res = 150.0;
  net.driver.elec.max_cap = 40.0;
  net.driver.elec.max_fanout = 12;
  net.driver.elec.output_slew = 8.0;
  for (int i = 0; i < sinks; ++i) {
    Cell s;
    s.id = "s" + std::to_string(i);
    s.kind = CellKind::Sink;
    s.x = rng.uniform(0, 600);
    s.y = rng.uniform(0, 600);
    s.elec.input_cap = rng.uniform(1.0, 3.0);
    net.sinks.push_back(std::move(s));
  }
  return net;
}

void BM_OracleBuffer(benchmark::State& state)
{
  const Technology tech = pipeline::default_technology();
  const Net net = bench_net(static_cast<int>(state.range(0)), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        oracle::dp_buffer(net, tech.lib, tech.params));
  }
}
BENCHMARK(BM_OracleBuffer)->Arg(10)->Arg(50)->Arg(200);

void BM_ModelInfer(benchmark::State& state)
{
  const Technology tech = pipeline::default_technology();
  const model::BufferModel mdl(model::ModelConfig{}, 1);
  const Net net = bench_net(static_cast<int>(state.range(0)), 11);
  const Rect region{0, 0, 600, 600};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        model::infer(net, mdl, tech.lib, tech.params, &region));
  }
}
BENCHMARK(BM_ModelInfer)->Arg(10)->Arg(50)->Arg(200);

void BM_VirtualOccupancy(benchmark::State& state)
{
  place::BinGrid grid = place::BinGrid::make({0, 0, 512, 512}, 32, 32, 0.8);
  Rng rng(3);
  std::vector<place::VirtualBufferBox> boxes;
  for (int i = 0; i < 1000; ++i) {
    place::VirtualBufferBox b;
    const double x = rng.uniform(0, 500);
    const double y = rng.uniform(0, 500);
    b.bounds = {x, y, x + rng.uniform(0.5, 6.0), y + 1.4};
    boxes.push_back(b);
  }
  for (auto _ : state) {
    grid.reset_virtual();
    benchmark::DoNotOptimize(place::apply_virtual_occupancy(grid, boxes));
  }
}
BENCHMARK(BM_VirtualOccupancy);

void BM_ModelForward(benchmark::State& state)
{
  const model::BufferModel mdl(model::ModelConfig{}, 1);
  const Net net = bench_net(static_cast<int>(state.range(0)), 17);
  std::vector<Cell> cells{net.driver};
  cells.insert(cells.end(), net.sinks.begin(), net.sinks.end());
  const ad::Tensor features = model::extract_features(cells);
  for (auto _ : state) {
    ad::Graph g;
    benchmark::DoNotOptimize(mdl.forward(g, features, 0.1, nullptr));
  }
}
BENCHMARK(BM_ModelForward)->Arg(20)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
