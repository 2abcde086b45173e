#pragma once

#include <string>
#include <vector>

#include "vbuf/netlist.hpp"
#include "vbuf/tree.hpp"

namespace vbuf {

// One line per tree, structure plus electrical annotation plus the
// embedded input-label pair decomposition.
std::string tree_to_json_line(const BufferedTree& tree);
BufferedTree tree_from_json_line(const std::string& line);

void save_dataset(const std::vector<BufferedTree>& trees,
                  const std::string& path);
std::vector<BufferedTree> load_dataset(const std::string& path);

struct DatasetStats {
  int tree_count = 0;
  int sink_min = 0;
  int sink_max = 0;
  int buffer_min = 0;
  int buffer_max = 0;
};
DatasetStats dataset_stats(const std::vector<BufferedTree>& trees);

struct SplitManifest {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;

  std::string to_json() const;
  static SplitManifest from_json(const std::string& text);
};

// Seeded shuffle split; sizes land within one tree of the exact ratios.
SplitManifest split_dataset(int tree_count, double train_ratio,
                            double val_ratio, uint64_t seed);

}  // namespace vbuf
