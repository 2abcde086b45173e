#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vbuf/pipeline.hpp"

namespace vbuf::pipeline {

namespace {
using nlohmann::json;
namespace fs = std::filesystem;
}

void write_text_file(const std::string& path, const std::string& text)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << text;
}

std::string read_text_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

bool try_read(const std::string& path, std::string& out)
{
  if (!fs::exists(path)) {
    return false;
  }
  out = read_text_file(path);
  return true;
}

void report_stats(const std::string& dir, std::string& md)
{
  std::string text;
  if (!try_read(dir + "/stats.json", text)) {
    md += "- dataset stats: *(missing)*\n";
    return;
  }
  const json j = json::parse(text);
  md += "- dataset stats:\n\n";
  md += "  | characteristic | training | validation | test |\n";
  md += "  |---|---|---|---|\n";
  auto cell = [&](const char* split, const char* key) {
    const json& s = j.at(split);
    if (key == std::string("buffered_tree_count")) {
      return std::to_string(s.at(key).get<int>());
    }
    const auto r = s.at(key);
    return "[" + std::to_string(r.at(0).get<int>()) + ", "
           + std::to_string(r.at(1).get<int>()) + "]";
  };
  for (const char* key :
       {"buffered_tree_count", "sink_count_range", "buffer_count_range"}) {
    md += "  | " + std::string(key) + " | " + cell("training_data", key)
          + " | " + cell("validation_data", key) + " | "
          + cell("test_data", key) + " |\n";
  }
  md += "\n";
}

void report_comparison(const std::string& dir, std::string& md)
{
  std::string text;
  if (!try_read(dir + "/comparison.json", text)) {
    md += "- tree comparison: *(missing)*\n";
    return;
  }
  const json j = json::parse(text);
  md += "- tree comparison (13-iteration averages):\n\n";
  md += "  | engine | buffer area | buffers | slew | cap | fanout | wire "
        "|\n";
  md += "  |---|---|---|---|---|---|---|\n";
  char buf[256];
  for (const json& s : j.at("summaries")) {
    std::snprintf(buf, sizeof buf,
                  "  | %s | %.1f | %.1f | %.1f | %.1f | %.1f | %.1f |\n",
                  s.at("engine").get<std::string>().c_str(),
                  s.at("buffer_area").get<double>(),
                  s.at("buffer_count").get<double>(),
                  s.at("slew_violations").get<double>(),
                  s.at("cap_violations").get<double>(),
                  s.at("fanout_violations").get<double>(),
                  s.at("wirelength_violations").get<double>());
    md += buf;
  }
  md += "\n";
}

void report_runtime(const std::string& dir, std::string& md)
{
  std::string text;
  if (!try_read(dir + "/runtime.json", text)) {
    md += "- runtime comparison: *(missing)*\n";
    return;
  }
  const json j = json::parse(text);
  md += "- runtime comparison (medians per net):\n\n";
  md += "  | sinks | oracle ms | model ms | oracle/model |\n";
  md += "  |---|---|---|---|\n";
  char buf[160];
  for (const json& r : j.at("rows")) {
    std::snprintf(buf, sizeof buf, "  | %d | %.3f | %.3f | %.2f |\n",
                  r.at("sink_count").get<int>(),
                  r.at("oracle_ms").get<double>(),
                  r.at("model_ms").get<double>(),
                  r.at("ratio").get<double>());
    md += buf;
  }
  std::snprintf(buf, sizeof buf,
                "\n  log-log slope of model inference time: %.3f\n\n",
                j.at("model_loglog_slope").get<double>());
  md += buf;
}

void report_place(const std::string& dir, std::string& md)
{
  std::string text;
  if (!try_read(dir + "/place_log.json", text)) {
    md += "- placement run: *(missing)*\n";
    return;
  }
  const json j = json::parse(text);
  md += "- placement run: ";
  md += j.value("converged", false) ? "converged" : "did not converge";
  md += ", " + std::to_string(j.at("triggers").size())
        + " buffering triggers\n";
  char buf[128];
  for (const json& t : j.at("triggers")) {
    std::snprintf(buf, sizeof buf,
                  "  - iteration %d, overflow threshold %.2f: %d nets, %d "
                  "boxes\n",
                  t.at("iteration").get<int>(),
                  t.at("threshold").get<double>(),
                  t.at("problematic_nets").get<int>(),
                  t.at("boxes").get<int>());
    md += buf;
  }
  md += "\n";
}

void report_training(const std::string& dir, std::string& md)
{
  std::string text;
  if (!try_read(dir + "/training_log.json", text)) {
    md += "- training log: *(missing)*\n";
    return;
  }
  const json j = json::parse(text);
  const auto& epochs = j.at("epochs");
  md += "- training: " + std::to_string(epochs.size()) + " epochs, best "
        + std::to_string(j.at("best_epoch").get<int>()) + "\n";
  if (!epochs.empty()) {
    char buf[160];
    const json& first = epochs.front();
    const json& last = epochs.back();
    std::snprintf(buf, sizeof buf,
                  "  - validation loss %.4f -> %.4f\n\n",
                  first.at("val_loss").get<double>(),
                  last.at("val_loss").get<double>());
    md += buf;
  }
}

}  // namespace

std::string make_report_markdown(const std::vector<std::string>& run_dirs)
{
  std::string md = "# Virtual buffering experiment report\n\n";
  for (const std::string& dir : run_dirs) {
    md += "## " + dir + "\n\n";
    if (!fs::exists(dir)) {
      md += "*(run directory missing)*\n\n";
      continue;
    }
    report_stats(dir, md);
    report_training(dir, md);
    report_comparison(dir, md);
    report_runtime(dir, md);
    report_place(dir, md);
    md += "\n";
  }
  return md;
}

}  // namespace vbuf::pipeline
