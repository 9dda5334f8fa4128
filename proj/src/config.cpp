#include "pmffnn/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pmffnn/errors.hpp"

namespace pmffnn {

using nlohmann::json;

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::PMFFNN: return "pmffnn";
    case ModelKind::DeepFFNN: return "deep_ffnn";
    case ModelKind::CNN1D: return "cnn1d";
  }
  return "?";
}

std::string task_name(Task task) {
  return task == Task::Classification ? "classification" : "regression";
}

namespace {

std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& prefix) {
  for (const auto& item : obj.items()) {
    if (!known.count(item.key())) {
      throw ConfigError(join_path(prefix, item.key()), "unknown key");
    }
  }
}

const json& require_key(const json& obj, const std::string& key, const std::string& prefix) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join_path(prefix, key), "missing required key");
  return *it;
}

int get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

int get_positive_int(const json& v, const std::string& path) {
  const int n = get_int(v, path);
  if (n < 1) throw ConfigError(path, "must be >= 1");
  return n;
}

double get_rate(const json& v, const std::string& path) {
  const double r = get_number(v, path);
  if (!(r >= 0.0 && r < 1.0)) throw ConfigError(path, "must lie in [0, 1)");
  return r;
}

PathwayConfig parse_pathway(const json& obj, const std::string& prefix) {
  reject_unknown_keys(obj, {"hidden_dim", "repeat_blocks", "dropout_rate", "output_dim"}, prefix);
  PathwayConfig cfg;
  if (obj.contains("hidden_dim"))
    cfg.hidden_dim = get_positive_int(obj["hidden_dim"], join_path(prefix, "hidden_dim"));
  if (obj.contains("repeat_blocks")) {
    cfg.repeat_blocks = get_int(obj["repeat_blocks"], join_path(prefix, "repeat_blocks"));
    if (cfg.repeat_blocks < 0)
      throw ConfigError(join_path(prefix, "repeat_blocks"), "must be >= 0");
  }
  if (obj.contains("dropout_rate"))
    cfg.dropout_rate = get_rate(obj["dropout_rate"], join_path(prefix, "dropout_rate"));
  if (obj.contains("output_dim"))
    cfg.output_dim = get_positive_int(obj["output_dim"], join_path(prefix, "output_dim"));
  return cfg;
}

HeadConfig parse_head(const json& obj, const std::string& prefix) {
  reject_unknown_keys(obj, {"hidden_dim", "dropout_rate"}, prefix);
  HeadConfig cfg;
  if (obj.contains("hidden_dim"))
    cfg.hidden_dim = get_positive_int(obj["hidden_dim"], join_path(prefix, "hidden_dim"));
  if (obj.contains("dropout_rate"))
    cfg.dropout_rate = get_rate(obj["dropout_rate"], join_path(prefix, "dropout_rate"));
  return cfg;
}

ConvConfig parse_conv(const json& obj, const std::string& prefix) {
  reject_unknown_keys(obj, {"kernel_size", "out_channels", "blocks"}, prefix);
  ConvConfig cfg;
  if (obj.contains("kernel_size"))
    cfg.kernel_size = get_positive_int(obj["kernel_size"], join_path(prefix, "kernel_size"));
  if (obj.contains("out_channels"))
    cfg.out_channels = get_positive_int(obj["out_channels"], join_path(prefix, "out_channels"));
  if (obj.contains("blocks"))
    cfg.blocks = get_positive_int(obj["blocks"], join_path(prefix, "blocks"));
  return cfg;
}

GroupsSpec parse_groups(const json& v, int n_features, const std::string& path) {
  if (v.is_number_integer()) {
    const int p = v.get<int>();
    if (p < 1) throw ConfigError(path, "automatic group count must be >= 1");
    if (p > n_features)
      throw ConfigError(path, "automatic group count exceeds n_features");
    return p;
  }
  if (!v.is_array()) throw ConfigError(path, "expected an integer or a list of index lists");
  std::vector<std::vector<int>> groups;
  for (std::size_t g = 0; g < v.size(); ++g) {
    const json& entry = v[g];
    const std::string gpath = path + "[" + std::to_string(g) + "]";
    if (!entry.is_array() || entry.empty())
      throw ConfigError(gpath, "each group must be a non-empty index list");
    std::vector<int> cols;
    std::set<int> seen;
    for (const auto& idx : entry) {
      if (!idx.is_number_integer()) throw ConfigError(gpath, "indices must be integers");
      const int c = idx.get<int>();
      if (c < 0 || c >= n_features)
        throw ConfigError(gpath, "index " + std::to_string(c) + " out of range [0, " +
                                     std::to_string(n_features) + ")");
      if (!seen.insert(c).second)
        throw ConfigError(gpath, "duplicate index " + std::to_string(c));
      cols.push_back(c);
    }
    groups.push_back(std::move(cols));
  }
  if (groups.empty()) throw ConfigError(path, "at least one group is required");
  return groups;
}

}  // namespace

ArchConfig parse_arch_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("<document>", "top level must be an object");

  reject_unknown_keys(root,
                      {"kind", "n_features", "n_outputs", "task", "groups",
                       "include_full_pathway", "pathway", "head", "conv"},
                      "");

  ArchConfig cfg;

  const json& kind = require_key(root, "kind", "");
  if (!kind.is_string()) throw ConfigError("kind", "expected a string");
  const std::string kind_s = kind.get<std::string>();
  if (kind_s == "pmffnn") cfg.kind = ModelKind::PMFFNN;
  else if (kind_s == "deep_ffnn") cfg.kind = ModelKind::DeepFFNN;
  else if (kind_s == "cnn1d") cfg.kind = ModelKind::CNN1D;
  else throw ConfigError("kind", "unknown model kind '" + kind_s +
                                 "' (expected pmffnn, deep_ffnn, or cnn1d)");

  cfg.n_features = get_positive_int(require_key(root, "n_features", ""), "n_features");
  cfg.n_outputs = get_positive_int(require_key(root, "n_outputs", ""), "n_outputs");

  const json& task = require_key(root, "task", "");
  if (!task.is_string()) throw ConfigError("task", "expected a string");
  const std::string task_s = task.get<std::string>();
  if (task_s == "classification") cfg.task = Task::Classification;
  else if (task_s == "regression") cfg.task = Task::Regression;
  else throw ConfigError("task", "unknown task '" + task_s +
                                 "' (expected classification or regression)");

  if (cfg.kind == ModelKind::PMFFNN) {
    cfg.groups = parse_groups(require_key(root, "groups", ""), cfg.n_features, "groups");
    if (root.contains("include_full_pathway")) {
      cfg.include_full_pathway =
          get_bool(root["include_full_pathway"], "include_full_pathway");
    }
  } else {
    if (root.contains("groups"))
      throw ConfigError("groups", "only valid for kind pmffnn");
    if (root.contains("include_full_pathway"))
      throw ConfigError("include_full_pathway", "only valid for kind pmffnn");
  }

  if (root.contains("pathway")) {
    if (!root["pathway"].is_object()) throw ConfigError("pathway", "expected an object");
    cfg.pathway = parse_pathway(root["pathway"], "pathway");
  }
  if (root.contains("head")) {
    if (!root["head"].is_object()) throw ConfigError("head", "expected an object");
    cfg.head = parse_head(root["head"], "head");
  }
  if (root.contains("conv")) {
    if (cfg.kind != ModelKind::CNN1D)
      throw ConfigError("conv", "only valid for kind cnn1d");
    if (!root["conv"].is_object()) throw ConfigError("conv", "expected an object");
    cfg.conv = parse_conv(root["conv"], "conv");
  }

  return cfg;
}

ArchConfig load_arch_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_arch_config(buf.str());
}

std::string arch_config_to_json(const ArchConfig& cfg) {
  json root;
  root["kind"] = model_kind_name(cfg.kind);
  root["n_features"] = cfg.n_features;
  root["n_outputs"] = cfg.n_outputs;
  root["task"] = task_name(cfg.task);
  if (cfg.kind == ModelKind::PMFFNN) {
    if (std::holds_alternative<int>(cfg.groups)) {
      root["groups"] = std::get<int>(cfg.groups);
    } else {
      root["groups"] = std::get<std::vector<std::vector<int>>>(cfg.groups);
    }
    root["include_full_pathway"] = cfg.include_full_pathway;
  }
  root["pathway"] = {{"hidden_dim", cfg.pathway.hidden_dim},
                     {"repeat_blocks", cfg.pathway.repeat_blocks},
                     {"dropout_rate", cfg.pathway.dropout_rate},
                     {"output_dim", cfg.pathway.output_dim}};
  root["head"] = {{"hidden_dim", cfg.head.hidden_dim},
                  {"dropout_rate", cfg.head.dropout_rate}};
  if (cfg.kind == ModelKind::CNN1D) {
    root["conv"] = {{"kernel_size", cfg.conv.kernel_size},
                    {"out_channels", cfg.conv.out_channels},
                    {"blocks", cfg.conv.blocks}};
  }
  return root.dump(2);
}

}  // namespace pmffnn
