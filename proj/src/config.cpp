#include "spnet/config.hpp"

#include <fstream>

#include "spnet/errors.hpp"

namespace spnet {

namespace {

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key + ": expected true/false, got '" + value + "'");
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "projection") config.projection = projection_from_name(value);
  else if (key == "image_size") config.image_size = parse_int(key, value);
  else if (key == "views") {
    preset_from_name(value);  // validate
    config.view_preset = value;
  }
  else if (key == "num_views") config.num_views = parse_int(key, value);
  else if (key == "top_m") config.top_m = parse_int(key, value);
  else if (key == "aggregation") config.aggregation = aggregation_from_name(value);
  else if (key == "metric") config.metric = metric_from_name(value);
  else if (key == "hit_rule") {
    if (value == "farthest") config.hit_rule = HitRule::Farthest;
    else if (value == "nearest") config.hit_rule = HitRule::Nearest;
    else throw ConfigError("hit_rule: expected farthest or nearest, got '" + value + "'");
  } else if (key == "center_mode") {
    if (value == "bbox") config.center_mode = CenterMode::BoundingBox;
    else if (value == "vertex_mean") config.center_mode = CenterMode::VertexMean;
    else throw ConfigError("center_mode: expected bbox or vertex_mean, got '" + value + "'");
  } else if (key == "ensemble_from_scratch") config.ensemble_from_scratch = parse_bool(key, value);
  else if (key == "selection_epochs") config.selection_epochs = parse_int(key, value);
  else if (key == "ensemble_epochs") config.ensemble_epochs = parse_int(key, value);
  else if (key == "learning_rate") config.train.learning_rate = parse_real(key, value);
  else if (key == "batch_size") config.train.batch_size = parse_int(key, value);
  else if (key == "epochs") config.train.epochs = parse_int(key, value);
  else if (key == "dropout") config.train.dropout_rate = parse_real(key, value);
  else if (key == "seed") config.train.seed = uint64_t(std::stoull(value));
  else if (key == "target_accuracy") config.train.target_accuracy = parse_real(key, value);
  else if (key == "eval_every") config.train.eval_every = parse_int(key, value);
  else if (key == "workers") config.workers = parse_int(key, value);
  else throw ConfigError("unknown config key '" + key + "'");

  if (key == "workers") config.train.workers = config.workers;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  RunConfig config;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    size_t last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + " line " + std::to_string(number) +
                        ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    try {
      apply_setting(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + " line " + std::to_string(number) + ": " + e.what());
    }
  }
  return config;
}

}  // namespace spnet
