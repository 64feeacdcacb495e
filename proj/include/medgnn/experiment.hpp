#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "medgnn/common.hpp"
#include "medgnn/config.hpp"
#include "medgnn/dataset.hpp"
#include "medgnn/diffusion.hpp"
#include "medgnn/graph.hpp"
#include "medgnn/model.hpp"
#include "medgnn/neighborhood.hpp"
#include "medgnn/spectral.hpp"
#include "medgnn/train.hpp"
#include "medgnn/wan.hpp"

namespace medgnn {

struct RoundResult {
  int round = 0;
  std::uint64_t seed = 0;
  std::string activation;
  long conv_params = 0;
  std::uint64_t dataset_hash = 0;
  double test_accuracy = 0.0;
  double final_train_loss = 0.0;
  double wall_seconds = 0.0;  // informational; kept out of the result CSVs
};

struct ArchitectureSummary {
  std::string activation;
  long conv_params = 0;
  int rounds = 0;
  double mean_test_accuracy = 0.0;
  double std_test_accuracy = 0.0;  // sample standard deviation
};

struct ExperimentResult {
  std::vector<RoundResult> rounds;
  std::vector<ArchitectureSummary> summaries;
  std::vector<TrainReport> first_round_reports;  // one per architecture
};

// Writes via a temp file and rename so readers never observe partial output.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Fig-1 style per-epoch curves.
inline void emit_curves(const TrainReport& report, const std::filesystem::path& path) {
  if (report.train_loss.empty()) throw ValidationError("emit_curves: empty report");
  std::ostringstream ss;
  ss << "epoch,train_loss,val_loss,val_acc\n";
  for (std::size_t e = 0; e < report.train_loss.size(); ++e)
    ss << (e + 1) << ',' << format_double(report.train_loss[e]) << ','
       << format_double(report.val_loss[e]) << ',' << format_double(report.val_acc[e]) << '\n';
  write_file_atomic(path, ss.str());
}

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct RoundData {
  Dataset train;
  Dataset test;
  ShiftMatrix shift;
  NeighborhoodTable table;
  std::uint64_t hash = 0;
};

inline int max_required_hops(const ExperimentConfig& cfg) {
  int hops = 0;
  for (const auto& a : cfg.architectures)
    hops = std::max(hops, parse_activation(a).required_hops());
  return hops;
}

}  // namespace detail

inline Graph load_experiment_graph(const ExperimentConfig& cfg) {
  if (cfg.graph.kind == "geometric") {
    Graph g = random_geometric_graph(cfg.graph.nodes, cfg.graph.radius, cfg.graph.seed);
    if (cfg.graph.directed) g = orient_randomly(g, mix_seed(cfg.graph.seed, 0xd17));
    return g;
  }
  std::ifstream in(cfg.graph.path);
  if (!in) throw IoError("cannot open edge list: " + cfg.graph.path);
  return load_edge_list(in, cfg.graph.directed);
}

// Runs the round protocol: for each round, one dataset; every architecture
// trains on that identical dataset; per-architecture mean and sample standard
// deviation of test accuracy are reported. Writes results.csv, summary.csv
// and round-0 curves into cfg.out_dir.
inline ExperimentResult run_rounds(const ExperimentConfig& cfg,
                                   std::ostream* progress = nullptr) {
  cfg.validate();
  if (cfg.architectures.empty()) throw ConfigError("run_rounds: no architectures");

  const int needed_hops = detail::max_required_hops(cfg);

  // Static task inputs shared by all rounds.
  Graph graph;
  std::vector<int> class_nodes;
  ShiftMatrix shift;
  NeighborhoodTable table;
  Corpus corpus;
  WanSpec wan_spec;
  int corpus_target = -1;
  if (cfg.task == TaskKind::SourceLocalization) {
    graph = load_experiment_graph(cfg);
    class_nodes = top_degree_nodes(graph, cfg.classes);
    shift = normalized_adjacency(graph);
    table = build_neighborhood_table(graph, needed_hops, cfg.neighborhood_direction);
  } else {
    corpus = load_corpus(cfg.corpus.dir);
    corpus_target = corpus.author_index(cfg.corpus.target_author);
    wan_spec.function_words = load_function_words_file(cfg.corpus.function_words);
    wan_spec.window = cfg.corpus.window;
    wan_spec.normalize = cfg.corpus.normalize;
  }

  ExperimentResult result;
  for (int round = 0; round < cfg.rounds; ++round) {
    const std::uint64_t round_seed = cfg.seed + static_cast<std::uint64_t>(round);

    detail::RoundData data;
    if (cfg.task == TaskKind::SourceLocalization) {
      DiffusionOptions opt;
      opt.t_max = cfg.t_max;
      opt.gso = cfg.diffusion_gso;
      Dataset full = generate_diffusion_dataset(graph, class_nodes,
                                                cfg.train_samples + cfg.test_samples,
                                                round_seed, opt);
      data.train = full;
      data.train.samples.assign(full.samples.begin(), full.samples.begin() + cfg.train_samples);
      data.test = full;
      data.test.samples.assign(full.samples.begin() + cfg.train_samples, full.samples.end());
      data.shift = shift;
      data.table = table;
    } else {
      AuthorshipRound ar =
          make_authorship_round(corpus, corpus_target, wan_spec, cfg.corpus.excerpt_tokens,
                                cfg.corpus.train_fraction, round_seed);
      data.train = std::move(ar.train);
      data.test = std::move(ar.test);
      data.shift = normalized_adjacency(ar.wan);
      data.table = build_neighborhood_table(ar.wan, needed_hops, cfg.neighborhood_direction);
    }
    data.hash = fnv1a64(serialize_dataset(data.test), fnv1a64(serialize_dataset(data.train)));

    for (std::size_t ai = 0; ai < cfg.architectures.size(); ++ai) {
      const std::string& arch = cfg.architectures[ai];
      const ActivationSpec activation = parse_activation(arch);
      const std::uint64_t arch_seed = mix_seed(round_seed, fnv1a64(arch));

      const auto t0 = std::chrono::steady_clock::now();
      ModelParams model = init_model(activation, 1, cfg.filters, cfg.taps,
                                     data.train.n, data.train.classes, mix_seed(arch_seed, 1));
      TrainConfig tc;
      tc.epochs = cfg.epochs;
      tc.batch_size = cfg.batch;
      tc.learning_rate = cfg.lr;
      tc.seed = mix_seed(arch_seed, 2);
      tc.val_fraction = cfg.val_fraction;
      tc.threads = cfg.threads;
      TrainReport report = train(model, data.shift, data.table, data.train, tc);
      EvalResult ev = evaluate(model, data.shift, data.table, data.test, cfg.threads);

      RoundResult rr;
      rr.round = round;
      rr.seed = round_seed;
      rr.activation = arch;
      rr.conv_params = model.conv_param_count();
      rr.dataset_hash = data.hash;
      rr.test_accuracy = ev.accuracy;
      rr.final_train_loss = report.final_train_loss();
      rr.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      result.rounds.push_back(rr);
      if (round == 0) result.first_round_reports.push_back(report);

      if (progress)
        *progress << "round " << round << " " << arch << ": test_accuracy="
                  << ev.accuracy << " train_loss=" << rr.final_train_loss
                  << " (" << rr.wall_seconds << "s)\n";
    }
  }

  for (const std::string& arch : cfg.architectures) {
    ArchitectureSummary s;
    s.activation = arch;
    std::vector<double> accs;
    for (const RoundResult& rr : result.rounds)
      if (rr.activation == arch) {
        accs.push_back(rr.test_accuracy);
        s.conv_params = rr.conv_params;
      }
    s.rounds = static_cast<int>(accs.size());
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= accs.size();
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    s.mean_test_accuracy = mean;
    s.std_test_accuracy = accs.size() > 1 ? std::sqrt(var / (accs.size() - 1)) : 0.0;
    result.summaries.push_back(s);
  }

  namespace fs = std::filesystem;
  const fs::path out = cfg.out_dir;
  {
    std::ostringstream ss;
    ss << "round,seed,activation,conv_params,dataset_hash,test_accuracy,final_train_loss\n";
    for (const RoundResult& rr : result.rounds)
      ss << rr.round << ',' << rr.seed << ',' << rr.activation << ',' << rr.conv_params << ','
         << detail::hex64(rr.dataset_hash) << ',' << format_double(rr.test_accuracy) << ','
         << format_double(rr.final_train_loss) << '\n';
    write_file_atomic(out / "results.csv", ss.str());
  }
  {
    std::ostringstream ss;
    ss << "activation,conv_params,rounds,mean_test_accuracy,std_test_accuracy\n";
    for (const ArchitectureSummary& s : result.summaries)
      ss << s.activation << ',' << s.conv_params << ',' << s.rounds << ','
         << format_double(s.mean_test_accuracy) << ',' << format_double(s.std_test_accuracy)
         << '\n';
    write_file_atomic(out / "summary.csv", ss.str());
  }
  for (std::size_t ai = 0; ai < cfg.architectures.size(); ++ai) {
    std::string name = cfg.architectures[ai];
    for (char& ch : name)
      if (ch == ':') ch = '_';
    emit_curves(result.first_round_reports[ai], out / ("curves_" + name + ".csv"));
  }
  return result;
}

}  // namespace medgnn
