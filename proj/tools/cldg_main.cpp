// cldg: contrastive representation learning on continuous-time dynamic
// graphs, with timespan views (plain mode) and diffusion-augmented views
// (cldgpp mode), plus linear-probe evaluation and temporal-consistency
// anomaly detection.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "cldg/anomaly.hpp"
#include "cldg/evaluation.hpp"
#include "cldg/trainer.hpp"

namespace {

using namespace cldg;

// Every output file leads with the tool version and a digest of the resolved
// config, so artifacts are traceable to the run that made them.
void write_header(std::ostream& out, const std::string& config_text) {
  out << "# cldg " << kVersion << " config=" << hex64(fnv1a64(config_text)) << "\n";
}

void echo_config(const std::string& config_text) {
  std::istringstream iss(config_text);
  std::string line;
  std::cerr << "# resolved config (cldg " << kVersion << ")\n";
  while (std::getline(iss, line)) std::cerr << "#   " << line << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}

std::string node_label(const TemporalGraph& g, Index node) {
  if (!g.node_names.empty()) return g.node_names[static_cast<std::size_t>(node)];
  return std::to_string(node);
}

// Flags shared by every training-family subcommand.
struct TrainFlags {
  TrainConfig cfg;
  std::string strategy = "sequential";
  std::string mode = "cldg";
  std::string diffusion = "ppr";
  std::string diffusion_mode = "auto";

  // Options whose explicit presence matters (diffusion settings are only
  // legal in cldgpp mode).
  std::vector<CLI::Option*> diffusion_opts;

  void add_to(CLI::App& cmd, bool with_training) {
    cmd.add_option("--strategy", strategy, "View sampling strategy: sequential|high|low|random")
        ->capture_default_str();
    cmd.add_option("--s", cfg.sampler.s, "Number of timespans the time range is split into")
        ->capture_default_str();
    cmd.add_option("--v", cfg.sampler.v, "Number of views per epoch")->capture_default_str();
    cmd.add_option("--seed", cfg.seed, "Master RNG seed")->capture_default_str();
    if (!with_training) return;
    cmd.add_option("--mode", mode, "Contrast mode: cldg|cldgpp")->capture_default_str();
    cmd.add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
    cmd.add_option("--batch-size", cfg.batch_size, "Contrast batch size")->capture_default_str();
    cmd.add_option("--lr", cfg.lr, "Learning rate")->capture_default_str();
    cmd.add_option("--weight-decay", cfg.weight_decay, "L2 penalty added to gradients")
        ->capture_default_str();
    cmd.add_option("--tau", cfg.tau, "Contrast temperature")->capture_default_str();
    cmd.add_option("--d-hidden", cfg.d_hidden, "Encoder hidden width")->capture_default_str();
    cmd.add_option("--d-out", cfg.d_out, "Projection width")->capture_default_str();
    cmd.add_option("--feature-dim", cfg.feature_dim,
                   "Degree-bucket width when the graph has no features")
        ->capture_default_str();
    cmd.add_option("--node-cap", cfg.node_cap, "Max nodes per view before neighbor sampling")
        ->capture_default_str();
    cmd.add_option("--neighbor-fanout", cfg.neighbor_fanout,
                   "Neighbors kept per node when a view is capped")
        ->capture_default_str();
    cmd.add_option("--batch-retries", cfg.batch_retries,
                   "View redraws allowed when no node is active everywhere")
        ->capture_default_str();
    cmd.add_option("--threads", cfg.threads, "Worker threads for row-parallel diffusion")
        ->capture_default_str();
    diffusion_opts = {
        cmd.add_option("--diffusion", diffusion, "Diffusion kind: ppr|heat (cldgpp only)")
            ->capture_default_str(),
        cmd.add_option("--alpha", cfg.diffusion.alpha, "Restart probability (ppr)")
            ->capture_default_str(),
        cmd.add_option("--t", cfg.diffusion.t, "Diffusion time (heat)")->capture_default_str(),
        cmd.add_option("--diffusion-mode", diffusion_mode, "auto|exact|approx")
            ->capture_default_str(),
        cmd.add_option("--topk", cfg.diffusion.topk, "Entries kept per diffusion row")
            ->capture_default_str(),
        cmd.add_option("--taylor-terms", cfg.diffusion.taylor_terms,
                       "Heat series terms (0 = derive from tol)")
            ->capture_default_str(),
        cmd.add_option("--tol", cfg.diffusion.tol, "Diffusion convergence/truncation tolerance")
            ->capture_default_str(),
        cmd.add_option("--exact-cap", cfg.diffusion.exact_cap,
                       "Max nodes for the dense diffusion path")
            ->capture_default_str(),
        cmd.add_option("--w-gg", cfg.w_global_global, "Weight of the global-global term")
            ->capture_default_str(),
        cmd.add_option("--w-lg", cfg.w_local_global, "Weight of the local-global term")
            ->capture_default_str(),
    };
    cmd.add_option("--w-ll", cfg.w_local_local, "Weight of the local-local term")
        ->capture_default_str();
  }

  TrainConfig resolve(bool with_training) const {
    TrainConfig out = cfg;
    out.sampler.strategy = strategy_from_string(strategy);
    if (!with_training) return out;
    out.mode = contrast_mode_from_string(mode);
    out.diffusion.kind = diffusion_kind_from_string(diffusion);
    if (diffusion_mode == "auto")
      out.diffusion.mode = DiffusionMode::Auto;
    else if (diffusion_mode == "exact")
      out.diffusion.mode = DiffusionMode::Exact;
    else if (diffusion_mode == "approx")
      out.diffusion.mode = DiffusionMode::Approximate;
    else
      throw UsageError("unknown diffusion mode '" + diffusion_mode +
                       "' (expected auto|exact|approx)");
    if (out.mode == ContrastMode::Cldg) {
      for (const auto* opt : diffusion_opts) {
        if (opt->count() > 0)
          throw UsageError("option " + opt->get_name() +
                           " requires --mode cldgpp (plain mode has no diffusion views)");
      }
    }
    return out;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"contrastive learning on continuous-time dynamic graphs"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse an edge list into a graph container");
  std::string in_edges, in_features, in_labels, ingest_out;
  ingest->add_option("--edges", in_edges, "Edge list: src dst ts per line")->required();
  ingest->add_option("--features", in_features, "Optional feature CSV, one row per node");
  ingest->add_option("--labels", in_labels, "Optional labels: node class per line");
  ingest->add_option("--out", ingest_out, "Output graph container")->required();

  // sample-views
  auto* sample = app.add_subcommand("sample-views", "Dump sampled windows as TSV");
  std::string sample_graph, sample_out;
  Index sample_draws = 1;
  TrainFlags sample_flags;
  sample->add_option("--graph", sample_graph, "Graph container")->required();
  sample->add_option("--out", sample_out, "Output TSV (default stdout)");
  sample->add_option("--draws", sample_draws, "Number of epoch draws to dump")
      ->capture_default_str();
  sample_flags.add_to(*sample, /*with_training=*/false);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train encoders and write a checkpoint");
  std::string train_graph, train_out, train_metrics;
  TrainFlags train_flags;
  train_cmd->add_option("--graph", train_graph, "Graph container")->required();
  train_cmd->add_option("--out", train_out, "Output checkpoint")->required();
  train_cmd->add_option("--metrics", train_metrics, "Per-epoch TSV: epoch, loss, step_ms");
  train_flags.add_to(*train_cmd, /*with_training=*/true);

  // embed
  auto* embed = app.add_subcommand("embed", "Write per-node embeddings as TSV");
  std::string embed_graph, embed_model, embed_out;
  Index embed_s = 4;
  embed->add_option("--graph", embed_graph, "Graph container")->required();
  embed->add_option("--model", embed_model, "Checkpoint")->required();
  embed->add_option("--out", embed_out, "Output TSV")->required();
  embed->add_option("--s", embed_s, "Inference grid slices")->capture_default_str();

  // classify
  auto* classify = app.add_subcommand("classify", "Linear-probe node classification");
  std::string cls_graph, cls_model, cls_pred;
  Index cls_s = 4;
  std::uint64_t cls_seed = 1;
  classify->add_option("--graph", cls_graph, "Graph container (labels required)")->required();
  classify->add_option("--model", cls_model, "Checkpoint")->required();
  classify->add_option("--pred", cls_pred, "Optional per-node prediction TSV");
  classify->add_option("--s", cls_s, "Inference grid slices")->capture_default_str();
  classify->add_option("--seed", cls_seed, "Split shuffle seed")->capture_default_str();

  // inject-anomalies
  auto* inject = app.add_subcommand("inject-anomalies", "Write an anomaly-injected copy");
  std::string inj_graph, inj_out, inj_truth;
  InjectionConfig inj_cfg;
  inject->add_option("--graph", inj_graph, "Graph container")->required();
  inject->add_option("--out", inj_out, "Injected graph container")->required();
  inject->add_option("--truth", inj_truth, "Optional truth TSV: node, flag");
  inject->add_option("--cliques", inj_cfg.structural_cliques, "Structural clique count")
      ->capture_default_str();
  inject->add_option("--clique-size", inj_cfg.clique_size, "Nodes per clique")
      ->capture_default_str();
  inject->add_option("--attrs", inj_cfg.attribute_count, "Attribute anomaly count")
      ->capture_default_str();
  inject->add_option("--k", inj_cfg.candidate_k, "Farthest-feature candidate pool")
      ->capture_default_str();
  inject->add_option("--spans", inj_cfg.spans, "Timespan slices for attribute overrides")
      ->capture_default_str();
  inject->add_option("--feature-dim", inj_cfg.feature_dim,
                     "Degree-bucket width if features must be materialized")
      ->capture_default_str();
  inject->add_option("--seed", inj_cfg.seed, "Injection seed")->capture_default_str();

  // detect
  auto* detect = app.add_subcommand("detect", "Score temporal consistency per node");
  std::string det_graph, det_model, det_out, det_truth;
  Index det_s = 4;
  bool det_static = false;
  detect->add_option("--graph", det_graph, "Graph container")->required();
  detect->add_option("--model", det_model, "Checkpoint")->required();
  detect->add_option("--out", det_out, "Scores TSV: node, score, flag")->required();
  detect->add_option("--truth", det_truth, "Truth TSV for AUC (default: container labels)");
  detect->add_option("--s", det_s, "Inference grid slices")->capture_default_str();
  detect->add_flag("--static-features", det_static,
                   "Collapse span overrides to their across-span mean");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the parse error
    return 1;
  }

  if (*ingest) {
    TemporalGraph g = ingest_edge_list(
        in_edges,
        in_features.empty() ? std::nullopt : std::optional<std::filesystem::path>(in_features),
        in_labels.empty() ? std::nullopt : std::optional<std::filesystem::path>(in_labels));
    save_graph(g, ingest_out);
    std::cerr << "ingested " << g.num_nodes << " nodes, " << g.edges.size() << " edges -> "
              << ingest_out << "\n";
    return 0;
  }

  if (*sample) {
    TrainConfig cfg = sample_flags.resolve(false);
    TemporalGraph g = load_graph(sample_graph);
    validate_sampler(cfg.sampler, g);
    const std::string config_text = cfg.canonical_string();
    echo_config(config_text);
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!sample_out.empty()) {
      file = open_out(sample_out);
      out = &file;
    }
    write_header(*out, config_text);
    *out << "draw\tview\tcenter\tlo\thi\tnodes\tedges\n";
    for (Index d = 0; d < sample_draws; ++d) {
      Rng rng = Rng::derive(cfg.seed, {0x73616d706cull, static_cast<std::uint64_t>(d + 1), 0});
      ViewSet vs = sample_views(g, cfg.sampler, rng);
      for (std::size_t i = 0; i < vs.views.size(); ++i) {
        const auto& view = vs.views[i];
        *out << d + 1 << "\t" << i << "\t" << view.center << "\t" << view.lo << "\t" << view.hi
             << "\t" << view.active_nodes.size() << "\t" << view.num_edges << "\n";
      }
    }
    return 0;
  }

  if (*train_cmd) {
    TrainConfig cfg = train_flags.resolve(true);
    TemporalGraph g = load_graph(train_graph);
    const std::string config_text = cfg.canonical_string();
    echo_config(config_text);
    TrainResult result = train(g, cfg);
    save_checkpoint(result.params, config_text, train_out);
    if (!train_metrics.empty()) {
      auto out = open_out(train_metrics);
      write_header(out, config_text);
      out << "epoch\tloss\tstep_ms\n";
      out.precision(17);
      for (const auto& e : result.log)
        out << e.epoch << "\t" << e.loss << "\t" << e.step_ms << "\n";
    }
    std::cerr << "trained " << cfg.epochs << " epochs (final loss "
              << result.log.back().loss << ") -> " << train_out << "\n";
    return 0;
  }

  if (*embed) {
    TemporalGraph g = load_graph(embed_graph);
    auto [params, config_text] = load_checkpoint(embed_model);
    EmbeddingResult emb = final_embeddings(g, params, embed_s);
    auto out = open_out(embed_out);
    write_header(out, config_text);
    out.precision(17);
    for (Index i = 0; i < g.num_nodes; ++i) {
      out << node_label(g, i) << "\t" << int(emb.flags[static_cast<std::size_t>(i)]);
      for (Index j = 0; j < emb.embeddings.cols(); ++j) out << "\t" << emb.embeddings(i, j);
      out << "\n";
    }
    std::cerr << "wrote " << g.num_nodes << " embeddings -> " << embed_out << "\n";
    return 0;
  }

  if (*classify) {
    TemporalGraph g = load_graph(cls_graph);
    if (!g.labels) throw DataError("classify: graph container has no labels");
    auto [params, config_text] = load_checkpoint(cls_model);
    EmbeddingResult emb = final_embeddings(g, params, cls_s);
    SplitSpec spec;
    spec.seed = cls_seed;
    ProbeResult probe = linear_probe(emb.embeddings, *g.labels, spec);
    std::cout << "accuracy=" << probe.accuracy << " weighted_f1=" << probe.weighted_f1 << "\n";
    if (!cls_pred.empty()) {
      auto out = open_out(cls_pred);
      write_header(out, config_text);
      out << "node\tpredicted\n";
      for (std::size_t i = 0; i < probe.test_nodes.size(); ++i)
        out << node_label(g, probe.test_nodes[i]) << "\t" << probe.test_pred[i] << "\n";
    }
    return 0;
  }

  if (*inject) {
    TemporalGraph g = load_graph(inj_graph);
    InjectionResult result = inject_anomalies(g, inj_cfg);
    save_graph(result.graph, inj_out);
    if (!inj_truth.empty()) {
      auto out = open_out(inj_truth);
      out << "node\tanomaly\n";
      for (Index i = 0; i < result.graph.num_nodes; ++i)
        out << node_label(result.graph, i) << "\t"
            << int(result.truth[static_cast<std::size_t>(i)]) << "\n";
    }
    Index total = 0;
    for (auto t : result.truth) total += t;
    std::cerr << "injected " << total << " anomalous nodes -> " << inj_out << "\n";
    return 0;
  }

  if (*detect) {
    TemporalGraph g = load_graph(det_graph);
    if (det_static && g.span_features) {
      g.features = static_fallback_features(g);
      g.span_features.reset();
    }
    auto [params, config_text] = load_checkpoint(det_model);
    AnomalyScores scores = anomaly_scores(g, params, det_s);
    auto out = open_out(det_out);
    write_header(out, config_text);
    out << "node\tscore\tflag\n";
    out.precision(17);
    for (Index i = 0; i < g.num_nodes; ++i)
      out << node_label(g, i) << "\t" << scores.score[static_cast<std::size_t>(i)] << "\t"
          << int(scores.flags[static_cast<std::size_t>(i)]) << "\n";

    std::vector<std::uint8_t> truth;
    if (!det_truth.empty()) {
      std::ifstream tin(det_truth);
      if (!tin) throw DataError("cannot open truth file: " + det_truth);
      truth.assign(static_cast<std::size_t>(g.num_nodes), 0);
      std::string line;
      std::size_t row = 0;
      bool header_skipped = false;
      while (std::getline(tin, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream iss(line);
        std::string node, flag;
        iss >> node >> flag;
        if (!header_skipped && flag == "anomaly") {
          header_skipped = true;
          continue;
        }
        if (row >= truth.size()) throw DataError("truth file has more rows than nodes");
        truth[row++] = flag == "0" ? 0 : 1;
      }
      if (row != truth.size()) throw DataError("truth file has fewer rows than nodes");
    } else if (g.labels) {
      truth.assign(g.labels->begin(), g.labels->end());
    }
    if (!truth.empty()) std::cout << "auc=" << auc(scores.score, truth) << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const cldg::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const cldg::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const cldg::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
}
