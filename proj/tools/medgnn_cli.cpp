// Command-line experiment runner: dataset generation, training, evaluation,
// round comparisons and WAN construction, driven by a JSON config file.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "medgnn/medgnn.hpp"

namespace fs = std::filesystem;

namespace {

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> activation;
  std::optional<std::string> out;
  std::optional<int> threads;
};

medgnn::ExperimentConfig load_config(const std::string& path, const CliOverrides& ov) {
  medgnn::ExperimentConfig cfg = medgnn::load_config_file(path);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.activation) cfg.activation = *ov.activation;
  if (ov.out) cfg.out_dir = *ov.out;
  if (ov.threads) cfg.threads = *ov.threads;
  cfg.validate();
  return cfg;
}

// Builds the per-run data exactly as `compare` does for one round.
struct PreparedRun {
  medgnn::Dataset train;
  medgnn::Dataset test;
  medgnn::ShiftMatrix shift;
  medgnn::NeighborhoodTable table;
  medgnn::Graph graph;
};

PreparedRun prepare_run(const medgnn::ExperimentConfig& cfg, int needed_hops) {
  PreparedRun run;
  if (cfg.task == medgnn::TaskKind::SourceLocalization) {
    run.graph = medgnn::load_experiment_graph(cfg);
    const auto classes = medgnn::top_degree_nodes(run.graph, cfg.classes);
    medgnn::DiffusionOptions opt;
    opt.t_max = cfg.t_max;
    opt.gso = cfg.diffusion_gso;
    medgnn::Dataset full = medgnn::generate_diffusion_dataset(
        run.graph, classes, cfg.train_samples + cfg.test_samples, cfg.seed, opt);
    run.train = full;
    run.train.samples.assign(full.samples.begin(), full.samples.begin() + cfg.train_samples);
    run.test = full;
    run.test.samples.assign(full.samples.begin() + cfg.train_samples, full.samples.end());
    run.shift = medgnn::normalized_adjacency(run.graph);
  } else {
    medgnn::Corpus corpus = medgnn::load_corpus(cfg.corpus.dir);
    medgnn::WanSpec spec;
    spec.function_words = medgnn::load_function_words_file(cfg.corpus.function_words);
    spec.window = cfg.corpus.window;
    spec.normalize = cfg.corpus.normalize;
    medgnn::AuthorshipRound round = medgnn::make_authorship_round(
        corpus, corpus.author_index(cfg.corpus.target_author), spec,
        cfg.corpus.excerpt_tokens, cfg.corpus.train_fraction, cfg.seed);
    run.graph = round.wan;
    run.train = std::move(round.train);
    run.test = std::move(round.test);
    run.shift = medgnn::normalized_adjacency(run.graph);
  }
  run.table = medgnn::build_neighborhood_table(run.graph, needed_hops,
                                               cfg.neighborhood_direction);
  return run;
}

void write_dataset_file(const fs::path& path, const medgnn::Dataset& d) {
  medgnn::write_file_atomic(path, medgnn::serialize_dataset(d));
}

int cmd_gen_data(const medgnn::ExperimentConfig& cfg) {
  const int hops = medgnn::parse_activation(cfg.activation).required_hops();
  PreparedRun run = prepare_run(cfg, hops);
  const fs::path out = cfg.out_dir;
  write_dataset_file(out / "train.ds", run.train);
  write_dataset_file(out / "test.ds", run.test);
  std::ostringstream edges;
  medgnn::save_edge_list(edges, run.graph);
  medgnn::write_file_atomic(out / "graph.edges", edges.str());
  std::cout << "wrote " << (out / "train.ds").string() << " ("
            << run.train.samples.size() << " samples), "
            << (out / "test.ds").string() << " (" << run.test.samples.size()
            << " samples)\n";
  return 0;
}

int cmd_train(const medgnn::ExperimentConfig& cfg) {
  const medgnn::ActivationSpec activation = medgnn::parse_activation(cfg.activation);
  PreparedRun run = prepare_run(cfg, activation.required_hops());

  medgnn::ModelParams model =
      medgnn::init_model(activation, 1, cfg.filters, cfg.taps, run.train.n,
                         run.train.classes, medgnn::mix_seed(cfg.seed, 1));
  medgnn::TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch;
  tc.learning_rate = cfg.lr;
  tc.seed = medgnn::mix_seed(cfg.seed, 2);
  tc.val_fraction = cfg.val_fraction;
  tc.threads = cfg.threads;
  medgnn::TrainReport report = medgnn::train(model, run.shift, run.table, run.train, tc);

  const fs::path out = cfg.out_dir;
  {
    std::ostringstream ss;
    medgnn::save_checkpoint(ss, model);
    medgnn::write_file_atomic(out / "checkpoint.txt", ss.str());
  }
  {
    std::ostringstream ss;
    medgnn::report_to_csv(ss, report);
    medgnn::write_file_atomic(out / "curves.csv", ss.str());
  }
  write_dataset_file(out / "train.ds", run.train);
  write_dataset_file(out / "test.ds", run.test);
  {
    std::ostringstream edges;
    medgnn::save_edge_list(edges, run.graph);
    medgnn::write_file_atomic(out / "graph.edges", edges.str());
  }

  medgnn::EvalResult on_train =
      medgnn::evaluate(model, run.shift, run.table, run.train, cfg.threads);
  medgnn::EvalResult on_test =
      medgnn::evaluate(model, run.shift, run.table, run.test, cfg.threads);
  std::cout << "activation=" << cfg.activation
            << " conv_params=" << model.conv_param_count()
            << " final_epoch_loss=" << medgnn::format_double(report.final_train_loss())
            << '\n';
  std::cout << "train_loss=" << medgnn::format_double(on_train.loss)
            << " train_accuracy=" << medgnn::format_double(on_train.accuracy) << '\n';
  std::cout << "test_loss=" << medgnn::format_double(on_test.loss)
            << " test_accuracy=" << medgnn::format_double(on_test.accuracy) << '\n';
  std::cout << "checkpoint=" << (out / "checkpoint.txt").string() << '\n';
  return 0;
}

int cmd_eval(const medgnn::ExperimentConfig& cfg, const std::string& checkpoint_path,
             const std::string& data_path) {
  std::ifstream ck(checkpoint_path);
  if (!ck) throw medgnn::IoError("cannot open checkpoint: " + checkpoint_path);
  medgnn::ModelParams model = medgnn::load_checkpoint(ck);

  std::ifstream ds(data_path);
  if (!ds) throw medgnn::IoError("cannot open dataset: " + data_path);
  medgnn::Dataset data = medgnn::load_dataset(ds);

  // Graph artifacts come from the config's graph section; the checkpoint
  // stores only shapes and parameters. For authorship runs, point graph.path
  // at the WAN edge list written by gen-data or build-wan.
  if (cfg.graph.kind == "edge-list" && cfg.graph.path.empty())
    throw medgnn::ConfigError("eval: config needs a graph section with a path");
  medgnn::Graph graph = medgnn::load_experiment_graph(cfg);
  if (model.readout.in_dim % graph.n_nodes != 0)
    throw medgnn::ShapeError("eval: checkpoint readout dim does not divide by graph size");
  medgnn::ShiftMatrix shift = medgnn::normalized_adjacency(graph);
  medgnn::NeighborhoodTable table = medgnn::build_neighborhood_table(
      graph, model.activation.required_hops(), cfg.neighborhood_direction);

  medgnn::EvalResult r = medgnn::evaluate(model, shift, table, data, cfg.threads);
  std::cout << "loss=" << medgnn::format_double(r.loss)
            << " accuracy=" << medgnn::format_double(r.accuracy) << '\n';
  return 0;
}

int cmd_compare(const medgnn::ExperimentConfig& cfg) {
  medgnn::ExperimentResult result = medgnn::run_rounds(cfg, &std::cout);
  std::cout << "activation  conv_params  mean_accuracy  std_accuracy\n";
  for (const auto& s : result.summaries)
    std::cout << s.activation << "  " << s.conv_params << "  " << s.mean_test_accuracy
              << "  " << s.std_test_accuracy << '\n';
  std::cout << "results written to " << cfg.out_dir << '\n';
  return 0;
}

int cmd_build_wan(const medgnn::ExperimentConfig& cfg) {
  if (cfg.corpus.dir.empty() || cfg.corpus.function_words.empty() ||
      cfg.corpus.target_author.empty())
    throw medgnn::ConfigError("build-wan: config needs corpus.dir, corpus.function_words "
                              "and corpus.target_author");
  medgnn::Corpus corpus = medgnn::load_corpus(cfg.corpus.dir);
  medgnn::WanSpec spec;
  spec.function_words = medgnn::load_function_words_file(cfg.corpus.function_words);
  spec.window = cfg.corpus.window;
  spec.normalize = cfg.corpus.normalize;
  medgnn::Graph wan =
      medgnn::build_wan(corpus.texts[corpus.author_index(cfg.corpus.target_author)], spec);

  const fs::path out = cfg.out_dir;
  std::ostringstream edges;
  medgnn::save_edge_list(edges, wan);
  medgnn::write_file_atomic(out / "wan.edges", edges.str());
  std::ostringstream nodes;
  for (const auto& w : spec.function_words) nodes << w << '\n';
  medgnn::write_file_atomic(out / "wan.nodes", nodes.str());
  std::cout << "wrote " << (out / "wan.edges").string() << " (" << wan.n_nodes
            << " nodes, " << wan.edges.size() << " arcs)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph neural network engine with median activation functions"};
  app.require_subcommand(1);

  std::string config_path;
  CliOverrides ov;
  std::uint64_t seed_flag = 0;
  std::string activation_flag, out_flag;
  int threads_flag = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed_flag, "override config seed");
    sub->add_option("--activation", activation_flag,
                    "override activation (relu | static-med:<r> | dyn-med:<R>)");
    sub->add_option("--out", out_flag, "override output directory");
    sub->add_option("--threads", threads_flag, "override worker thread count");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "generate and write dataset files");
  add_common(gen);
  CLI::App* tr = app.add_subcommand("train", "train a single model");
  add_common(tr);
  CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset file");
  add_common(ev);
  std::string checkpoint_path, data_path;
  ev->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  ev->add_option("--data", data_path, "dataset file")->required();
  CLI::App* cmp = app.add_subcommand("compare", "run the multi-round architecture comparison");
  add_common(cmp);
  CLI::App* bw = app.add_subcommand("build-wan", "build a word adjacency network from a corpus");
  add_common(bw);

  try {
    app.parse(argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed")) ov.seed = seed_flag;
    if (sub->count("--activation")) ov.activation = activation_flag;
    if (sub->count("--out")) ov.out = out_flag;
    if (sub->count("--threads")) ov.threads = threads_flag;
    const medgnn::ExperimentConfig cfg = load_config(config_path, ov);
    if (gen->parsed()) return cmd_gen_data(cfg);
    if (tr->parsed()) return cmd_train(cfg);
    if (ev->parsed()) return cmd_eval(cfg, checkpoint_path, data_path);
    if (cmp->parsed()) return cmd_compare(cfg);
    if (bw->parsed()) return cmd_build_wan(cfg);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);  // prints usage; nonzero for errors
  } catch (const medgnn::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const medgnn::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const medgnn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
