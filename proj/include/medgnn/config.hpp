#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "medgnn/common.hpp"
#include "medgnn/diffusion.hpp"
#include "medgnn/graph.hpp"
#include "medgnn/model.hpp"

namespace medgnn {

enum class TaskKind { SourceLocalization, Authorship };

struct GraphSource {
  std::string kind = "edge-list";  // "edge-list" | "geometric"
  std::string path;                // edge-list
  bool directed = false;           // edge-list flag; geometric graphs get a
                                   // seeded random arc orientation when set
  int nodes = 0;                   // geometric
  double radius = 0.0;             // geometric
  std::uint64_t seed = 0;          // geometric
};

struct CorpusConfig {
  std::string dir;
  std::string function_words;  // path to word list, one per line
  std::string target_author;
  int window = 10;
  bool normalize = false;
  int excerpt_tokens = 1000;
  double train_fraction = 0.8;
};

// Full description of one experiment; JSON keys mirror the field names.
// Unknown keys are rejected.
struct ExperimentConfig {
  TaskKind task = TaskKind::SourceLocalization;
  GraphSource graph;
  CorpusConfig corpus;

  std::vector<std::string> architectures;  // for `compare`
  std::string activation = "relu";         // for single runs
  int filters = 32;
  int taps = 5;
  int classes = 5;
  int train_samples = 10000;
  int test_samples = 200;
  int epochs = 30;
  int batch = 100;
  double lr = 0.001;
  int rounds = 10;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  int t_max = 4;
  DiffusionGso diffusion_gso = DiffusionGso::Normalized;
  NeighborhoodDirection neighborhood_direction = NeighborhoodDirection::In;
  double val_fraction = 0.1;
  int threads = 1;

  void validate() const {
    if (filters < 1 || taps < 1 || classes < 1 || epochs < 1 || batch < 1 || rounds < 1)
      throw ConfigError("config: filters, taps, classes, epochs, batch and rounds must be positive");
    if (lr <= 0.0) throw ConfigError("config: lr must be positive");
    if (t_max < 0) throw ConfigError("config: t_max must be >= 0");
    if (val_fraction < 0.0 || val_fraction >= 1.0)
      throw ConfigError("config: val_fraction must be in [0, 1)");
    if (threads < 1) throw ConfigError("config: threads must be >= 1");
    parse_activation(activation);  // reach >= 1 enforced for median kinds
    for (const auto& a : architectures) parse_activation(a);
    if (task == TaskKind::SourceLocalization) {
      if (train_samples < 1 || test_samples < 1)
        throw ConfigError("config: train_samples and test_samples must be positive");
      if (graph.kind == "edge-list") {
        if (graph.path.empty()) throw ConfigError("config: graph.path is required");
      } else if (graph.kind == "geometric") {
        if (graph.nodes < 2 || graph.radius <= 0.0)
          throw ConfigError("config: geometric graph needs nodes >= 2 and radius > 0");
      } else {
        throw ConfigError("config: graph.kind must be 'edge-list' or 'geometric'");
      }
    } else {
      if (corpus.dir.empty() || corpus.function_words.empty() || corpus.target_author.empty())
        throw ConfigError("config: corpus.dir, corpus.function_words and corpus.target_author are required");
      if (corpus.excerpt_tokens < 1) throw ConfigError("config: corpus.excerpt_tokens must be >= 1");
      if (!(corpus.train_fraction > 0.0 && corpus.train_fraction < 1.0))
        throw ConfigError("config: corpus.train_fraction must be in (0, 1)");
      if (corpus.window < 1) throw ConfigError("config: corpus.window must be >= 1");
    }
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("config: unknown key '" + where + it.key() + "'");
}

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: bad value type for '") + key + "'");
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  detail::reject_unknown_keys(
      j,
      {"task", "graph", "corpus", "architectures", "activation", "filters", "taps",
       "classes", "train_samples", "test_samples", "epochs", "batch", "lr", "rounds",
       "seed", "out_dir", "t_max", "diffusion_gso", "neighborhood_direction",
       "val_fraction", "threads"},
      "");

  ExperimentConfig cfg;
  std::string task = "source-localization";
  detail::read_field(j, "task", task);
  if (task == "source-localization")
    cfg.task = TaskKind::SourceLocalization;
  else if (task == "authorship")
    cfg.task = TaskKind::Authorship;
  else
    throw ConfigError("config: task must be 'source-localization' or 'authorship'");

  if (j.contains("graph")) {
    const auto& g = j.at("graph");
    detail::reject_unknown_keys(g, {"kind", "path", "directed", "nodes", "radius", "seed"},
                                "graph.");
    detail::read_field(g, "kind", cfg.graph.kind);
    detail::read_field(g, "path", cfg.graph.path);
    detail::read_field(g, "directed", cfg.graph.directed);
    detail::read_field(g, "nodes", cfg.graph.nodes);
    detail::read_field(g, "radius", cfg.graph.radius);
    detail::read_field(g, "seed", cfg.graph.seed);
  }
  if (j.contains("corpus")) {
    const auto& c = j.at("corpus");
    detail::reject_unknown_keys(c,
                                {"dir", "function_words", "target_author", "window",
                                 "normalize", "excerpt_tokens", "train_fraction"},
                                "corpus.");
    detail::read_field(c, "dir", cfg.corpus.dir);
    detail::read_field(c, "function_words", cfg.corpus.function_words);
    detail::read_field(c, "target_author", cfg.corpus.target_author);
    detail::read_field(c, "window", cfg.corpus.window);
    detail::read_field(c, "normalize", cfg.corpus.normalize);
    detail::read_field(c, "excerpt_tokens", cfg.corpus.excerpt_tokens);
    detail::read_field(c, "train_fraction", cfg.corpus.train_fraction);
  }

  detail::read_field(j, "architectures", cfg.architectures);
  detail::read_field(j, "activation", cfg.activation);
  detail::read_field(j, "filters", cfg.filters);
  detail::read_field(j, "taps", cfg.taps);
  detail::read_field(j, "classes", cfg.classes);
  detail::read_field(j, "train_samples", cfg.train_samples);
  detail::read_field(j, "test_samples", cfg.test_samples);
  detail::read_field(j, "epochs", cfg.epochs);
  detail::read_field(j, "batch", cfg.batch);
  detail::read_field(j, "lr", cfg.lr);
  detail::read_field(j, "rounds", cfg.rounds);
  detail::read_field(j, "seed", cfg.seed);
  detail::read_field(j, "out_dir", cfg.out_dir);
  detail::read_field(j, "t_max", cfg.t_max);
  std::string gso = "normalized";
  detail::read_field(j, "diffusion_gso", gso);
  cfg.diffusion_gso = parse_diffusion_gso(gso);
  std::string direction = "in";
  detail::read_field(j, "neighborhood_direction", direction);
  cfg.neighborhood_direction = parse_direction(direction);
  detail::read_field(j, "val_fraction", cfg.val_fraction);
  detail::read_field(j, "threads", cfg.threads);

  if (cfg.architectures.empty())
    cfg.architectures = {"relu", "dyn-med:1", "dyn-med:2"};
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top-level JSON value must be an object");
  return parse_config(j);
}

}  // namespace medgnn
