#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "vbuf/autodiff.hpp"

namespace vbuf::ad {

// Named parameter tensors plus Adam moment state. Map ordering keeps
// iteration deterministic; serialization round-trips values bit-exactly.
struct ParameterStore {
  struct Entry {
    Tensor value;
    Tensor m;  // first moment
    Tensor v;  // second moment
  };
  std::map<std::string, Entry> entries;
  int64_t step = 0;

  Tensor& add(const std::string& name, Tensor init);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const { return entries.count(name) > 0; }
  int64_t scalar_count() const;

  std::string to_json() const;
  static ParameterStore from_json(const std::string& text);
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-5;  // decoupled
};

// One Adam step with decoupled weight decay. Returns false (and applies
// nothing) when any gradient is non-finite.
bool adam_step(ParameterStore& store,
               const std::map<std::string, Tensor>& grads,
               const AdamConfig& cfg);

}  // namespace vbuf::ad
