#include "vbuf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "vbuf/rng.hpp"

namespace vbuf {

namespace {

using nlohmann::json;

const char* kind_name(CellKind k)
{
  switch (k) {
    case CellKind::Driver: return "driver";
    case CellKind::Sink: return "sink";
    case CellKind::Buffer: return "buffer";
  }
  return "?";
}

CellKind kind_from(const std::string& s)
{
  if (s == "driver") return CellKind::Driver;
  if (s == "sink") return CellKind::Sink;
  if (s == "buffer") return CellKind::Buffer;
  throw std::runtime_error("unknown cell kind " + s);
}

}  // namespace

std::string tree_to_json_line(const BufferedTree& tree)
{
  json j;
  j["net_id"] = tree.net_id;
  j["infeasible"] = tree.infeasible;
  j["nodes"] = json::array();
  for (const Cell& c : tree.nodes) {
    json e = {{"in_cap", c.elec.input_cap},
              {"out_cap", c.elec.output_cap},
              {"in_slew", c.elec.input_slew},
              {"out_slew", c.elec.output_slew},
              {"max_cap", c.elec.max_cap},
              {"max_fanout", c.elec.max_fanout},
              {"out_res", c.elec.output_res}};
    j["nodes"].push_back({{"id", c.id},
                          {"kind", kind_name(c.kind)},
                          {"x", c.x},
                          {"y", c.y},
                          {"w", c.width},
                          {"h", c.height},
                          {"spec", c.buffer_spec},
                          {"elec", std::move(e)}});
  }
  j["parent"] = tree.parent;
  // Pair decomposition rides along for external consumers.
  j["pairs"] = json::array();
  for (const LevelPair& p : tree_to_pairs(tree)) {
    json jp;
    jp["input"] = p.input;
    jp["labels"] = json::object();
    for (const auto& [id, parent] : p.labels) {
      jp["labels"][id] = parent.has_value() ? json(*parent) : json(nullptr);
    }
    j["pairs"].push_back(std::move(jp));
  }
  return j.dump();
}

BufferedTree tree_from_json_line(const std::string& line)
{
  const json j = json::parse(line);
  BufferedTree t;
  t.net_id = j.at("net_id").get<std::string>();
  t.infeasible = j.value("infeasible", false);
  for (const json& jc : j.at("nodes")) {
    Cell c;
    c.id = jc.at("id").get<std::string>();
    c.kind = kind_from(jc.at("kind").get<std::string>());
    c.x = jc.at("x").get<double>();
    c.y = jc.at("y").get<double>();
    c.width = jc.at("w").get<double>();
    c.height = jc.at("h").get<double>();
    c.buffer_spec = jc.value("spec", "");
    const json& e = jc.at("elec");
    c.elec.input_cap = e.at("in_cap").get<double>();
    c.elec.output_cap = e.at("out_cap").get<double>();
    c.elec.input_slew = e.at("in_slew").get<double>();
    c.elec.output_slew = e.at("out_slew").get<double>();
    c.elec.max_cap = e.at("max_cap").get<double>();
    c.elec.max_fanout = e.at("max_fanout").get<int>();
    c.elec.output_res = e.at("out_res").get<double>();
    t.nodes.push_back(std::move(c));
  }
  t.parent =
      j.at("parent").get<std::map<std::string, std::string>>();
  return t;
}

void save_dataset(const std::vector<BufferedTree>& trees,
                  const std::string& path)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  for (const BufferedTree& t : trees) {
    out << tree_to_json_line(t) << "\n";
  }
}

std::vector<BufferedTree> load_dataset(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  std::vector<BufferedTree> trees;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      trees.push_back(tree_from_json_line(line));
    }
  }
  return trees;
}

DatasetStats dataset_stats(const std::vector<BufferedTree>& trees)
{
  DatasetStats s;
  s.tree_count = static_cast<int>(trees.size());
  bool first = true;
  for (const BufferedTree& t : trees) {
    int sinks = 0;
    for (const Cell& c : t.nodes) {
      sinks += c.kind == CellKind::Sink ? 1 : 0;
    }
    const int buffers = t.buffer_count();
    if (first) {
      s.sink_min = s.sink_max = sinks;
      s.buffer_min = s.buffer_max = buffers;
      first = false;
    } else {
      s.sink_min = std::min(s.sink_min, sinks);
      s.sink_max = std::max(s.sink_max, sinks);
      s.buffer_min = std::min(s.buffer_min, buffers);
      s.buffer_max = std::max(s.buffer_max, buffers);
    }
  }
  return s;
}

std::string SplitManifest::to_json() const
{
  json j;
  j["train"] = train;
  j["validation"] = validation;
  j["test"] = test;
  return j.dump();
}

SplitManifest SplitManifest::from_json(const std::string& text)
{
  const json j = json::parse(text);
  SplitManifest m;
  m.train = j.at("train").get<std::vector<int>>();
  m.validation = j.at("validation").get<std::vector<int>>();
  m.test = j.at("test").get<std::vector<int>>();
  return m;
}

SplitManifest split_dataset(int tree_count, double train_ratio,
                            double val_ratio, uint64_t seed)
{
  std::vector<int> order(tree_count);
  for (int i = 0; i < tree_count; ++i) {
    order[i] = i;
  }
  Rng rng = Rng::sub(seed, "dataset-split");
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_int(0, i - 1)]);
  }
  const int n_train = static_cast<int>(std::llround(train_ratio * tree_count));
  const int n_val = static_cast<int>(std::llround(val_ratio * tree_count));
  SplitManifest m;
  for (int i = 0; i < tree_count; ++i) {
    if (i < n_train) {
      m.train.push_back(order[i]);
    } else if (i < n_train + n_val) {
      m.validation.push_back(order[i]);
    } else {
      m.test.push_back(order[i]);
    }
  }
  std::sort(m.train.begin(), m.train.end());
  std::sort(m.validation.begin(), m.validation.end());
  std::sort(m.test.begin(), m.test.end());
  return m;
}

}  // namespace vbuf
