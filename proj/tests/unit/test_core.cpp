#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "vbuf/dataset.hpp"
#include "vbuf/tree.hpp"

using namespace vbuf;

TEST_CASE("validate_net accepts a well-formed net")
{
  const Technology tech = pipeline::default_technology();
  CHECK(validate_net(fixtures::simple_net(3), tech.params).empty());
}

TEST_CASE("validate_net flags degenerate nets")
{
  const Technology tech = pipeline::default_technology();
  Net net = fixtures::simple_net(0);
  auto issues = validate_net(net, tech.params);
  REQUIRE(!issues.empty());
  CHECK(issues[0].find("empty sink set") != std::string::npos);

  net = fixtures::simple_net(2);
  net.sinks[1].id = net.sinks[0].id;
  issues = validate_net(net, tech.params);
  bool saw_dup = false;
  for (const auto& s : issues) {
    saw_dup |= s.find("duplicate sink") != std::string::npos;
  }
  CHECK(saw_dup);

  net = fixtures::simple_net(2);
  net.sinks[0].width = -1.0;
  issues = validate_net(net, tech.params);
  bool saw_dim = false;
  for (const auto& s : issues) {
    saw_dim |= s.find("negative dimensions") != std::string::npos;
  }
  CHECK(saw_dim);
}

TEST_CASE("tree_levels on the reference tree")
{
  const auto levels = tree_levels(fixtures::reference_tree());
  CHECK(levels.at("v0") == 0);
  CHECK(levels.at("v5") == 0);
  CHECK(levels.at("v6") == 1);
  CHECK(levels.at("v7") == 1);
  CHECK(levels.at("v8") == 1);
  CHECK(levels.at("v9") == 2);
  CHECK(tree_depth(fixtures::reference_tree()) == 2);
}

TEST_CASE("tree_levels on a bufferless tree")
{
  const BufferedTree t = BufferedTree::unbuffered(fixtures::simple_net(4));
  for (const auto& [id, lv] : tree_levels(t)) {
    CHECK(lv == 0);
  }
  CHECK(tree_depth(t) == 0);
}

TEST_CASE("tree_levels on a buffer chain")
{
  const Technology tech = pipeline::default_technology();
  BufferedTree t;
  t.net_id = "chain";
  t.nodes.push_back(fixtures::driver("d", 0, 0));
  t.nodes.push_back(fixtures::sink("s", 30, 0));
  t.nodes.push_back(make_buffer_cell("b1", tech.lib.buffers[0], {10, 0}));
  t.nodes.push_back(make_buffer_cell("b2", tech.lib.buffers[0], {20, 0}));
  t.parent = {{"s", "b2"}, {"b2", "b1"}, {"b1", "d"}};
  const auto levels = tree_levels(t);
  CHECK(levels.at("b2") == 1);
  CHECK(levels.at("b1") == 2);

  const auto pairs = tree_to_pairs(t);
  CHECK(pairs.size() == 3);
}

TEST_CASE("tree_levels rejects cycles")
{
  const Technology tech = pipeline::default_technology();
  BufferedTree t;
  t.net_id = "cyc";
  t.nodes.push_back(fixtures::driver("d", 0, 0));
  t.nodes.push_back(fixtures::sink("s", 10, 0));
  t.nodes.push_back(make_buffer_cell("b1", tech.lib.buffers[0], {4, 0}));
  t.nodes.push_back(make_buffer_cell("b2", tech.lib.buffers[0], {6, 0}));
  t.parent = {{"s", "b2"}, {"b2", "b1"}, {"b1", "b2"}};
  CHECK_THROWS(tree_levels(t));
}

TEST_CASE("tree_to_pairs matches the reference decomposition")
{
  const auto pairs = tree_to_pairs(fixtures::reference_tree());
  REQUIRE(pairs.size() == 3);

  const std::vector<std::string> want1{"v10", "v0", "v1", "v2",
                                       "v3",  "v4", "v5"};
  CHECK(pairs[0].input == want1);
  CHECK(pairs[0].labels.at("v0") == std::optional<std::string>("v6"));
  CHECK(pairs[0].labels.at("v1") == std::optional<std::string>("v6"));
  CHECK(pairs[0].labels.at("v2") == std::optional<std::string>("v7"));
  CHECK(pairs[0].labels.at("v3") == std::optional<std::string>("v8"));
  CHECK(pairs[0].labels.at("v4") == std::optional<std::string>("v8"));
  CHECK(!pairs[0].labels.at("v5").has_value());

  const std::vector<std::string> want2{"v10", "v5", "v6", "v7", "v8"};
  CHECK(pairs[1].input == want2);
  CHECK(pairs[1].labels.at("v6") == std::optional<std::string>("v9"));
  CHECK(pairs[1].labels.at("v7") == std::optional<std::string>("v9"));
  CHECK(pairs[1].labels.at("v8") == std::optional<std::string>("v9"));
  CHECK(!pairs[1].labels.at("v5").has_value());

  const std::vector<std::string> want3{"v10", "v5", "v9"};
  CHECK(pairs[2].input == want3);
  for (const auto& [id, label] : pairs[2].labels) {
    CHECK(!label.has_value());
  }
}

TEST_CASE("bufferless tree yields one all-None pair")
{
  const BufferedTree t = BufferedTree::unbuffered(fixtures::simple_net(3));
  const auto pairs = tree_to_pairs(t);
  REQUIRE(pairs.size() == 1);
  for (const auto& [id, label] : pairs[0].labels) {
    CHECK(!label.has_value());
  }
}

TEST_CASE("pair decomposition round-trips")
{
  const BufferedTree t = fixtures::reference_tree();
  const BufferedTree back = replay_pairs(t, tree_to_pairs(t));
  CHECK(trees_isomorphic(t, back));
}

TEST_CASE("levels are invariant under node permutation")
{
  BufferedTree t = fixtures::reference_tree();
  const auto base = tree_levels(t);
  std::reverse(t.nodes.begin() + 1, t.nodes.end());
  CHECK(tree_levels(t) == base);
}

TEST_CASE("dataset lines round-trip trees")
{
  const BufferedTree t = fixtures::reference_tree();
  const BufferedTree back = tree_from_json_line(tree_to_json_line(t));
  CHECK(trees_isomorphic(t, back));
  CHECK(back.buffer_count() == 4);
}
