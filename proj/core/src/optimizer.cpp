#include "vbuf/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace vbuf::ad {

Tensor& ParameterStore::add(const std::string& name, Tensor init)
{
  if (entries.count(name)) {
    throw std::logic_error("parameter already registered: " + name);
  }
  Entry e;
  e.m = Tensor(init.rows, init.cols, 0.0);
  e.v = Tensor(init.rows, init.cols, 0.0);
  e.value = std::move(init);
  return entries.emplace(name, std::move(e)).first->second.value;
}

Tensor& ParameterStore::at(const std::string& name)
{
  auto it = entries.find(name);
  if (it == entries.end()) {
    throw std::out_of_range("unknown parameter: " + name);
  }
  return it->second.value;
}

const Tensor& ParameterStore::at(const std::string& name) const
{
  auto it = entries.find(name);
  if (it == entries.end()) {
    throw std::out_of_range("unknown parameter: " + name);
  }
  return it->second.value;
}

int64_t ParameterStore::scalar_count() const
{
  int64_t n = 0;
  for (const auto& [name, e] : entries) {
    n += e.value.size();
  }
  return n;
}

std::string ParameterStore::to_json() const
{
  nlohmann::json j;
  j["format"] = "vbuf-checkpoint-v1";
  j["step"] = step;
  nlohmann::json manifest = nlohmann::json::object();
  nlohmann::json values = nlohmann::json::object();
  nlohmann::json moments1 = nlohmann::json::object();
  nlohmann::json moments2 = nlohmann::json::object();
  for (const auto& [name, e] : entries) {
    manifest[name] = {e.value.rows, e.value.cols};
    values[name] = e.value.v;
    moments1[name] = e.m.v;
    moments2[name] = e.v.v;
  }
  j["shapes"] = manifest;
  j["values"] = values;
  j["adam_m"] = moments1;
  j["adam_v"] = moments2;
  return j.dump();
}

ParameterStore ParameterStore::from_json(const std::string& text)
{
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "vbuf-checkpoint-v1") {
    throw std::runtime_error("checkpoint: unknown format tag");
  }
  ParameterStore store;
  store.step = j.at("step").get<int64_t>();
  for (auto& [name, shape] : j.at("shapes").items()) {
    const int rows = shape.at(0).get<int>();
    const int cols = shape.at(1).get<int>();
    Entry e;
    e.value = Tensor(rows, cols);
    e.m = Tensor(rows, cols);
    e.v = Tensor(rows, cols);
    e.value.v = j.at("values").at(name).get<std::vector<double>>();
    e.m.v = j.at("adam_m").at(name).get<std::vector<double>>();
    e.v.v = j.at("adam_v").at(name).get<std::vector<double>>();
    if (static_cast<int>(e.value.v.size()) != rows * cols) {
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    }
    store.entries.emplace(name, std::move(e));
  }
  return store;
}

bool adam_step(ParameterStore& store,
               const std::map<std::string, Tensor>& grads,
               const AdamConfig& cfg)
{
  for (const auto& [name, g] : grads) {
    if (!g.all_finite()) {
      return false;
    }
    if (!store.has(name)) {
      throw std::out_of_range("adam_step: unknown parameter " + name);
    }
    if (!store.at(name).same_shape(g)) {
      throw std::invalid_argument("adam_step: gradient shape mismatch for "
                                  + name);
    }
  }

  store.step += 1;
  const double t = static_cast<double>(store.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);

  for (auto& [name, e] : store.entries) {
    auto it = grads.find(name);
    if (it == grads.end()) {
      continue;
    }
    const Tensor& g = it->second;
    for (int i = 0; i < e.value.size(); ++i) {
      e.m.v[i] = cfg.beta1 * e.m.v[i] + (1.0 - cfg.beta1) * g.v[i];
      e.v.v[i] = cfg.beta2 * e.v.v[i] + (1.0 - cfg.beta2) * g.v[i] * g.v[i];
      const double mhat = e.m.v[i] / bc1;
      const double vhat = e.v.v[i] / bc2;
      e.value.v[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
      e.value.v[i] -= cfg.lr * cfg.weight_decay * e.value.v[i];
    }
  }
  return true;
}

}  // namespace vbuf::ad
