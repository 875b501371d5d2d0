// aeval: batch evaluation of programming-assignment submissions by test-based
// partitioning, pairwise structural similarity, graph clustering and
// similarity-based partial marks.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "aeval/aeval.hpp"

namespace {

using namespace aeval;

int default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

PairScoreMap read_pair_scores(const std::filesystem::path& path) {
  PairScoreMap scores;
  const auto lines = nonblank_lines(read_text_file(path));
  for (const std::string& line : lines) {
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw Error(path.string() + ": expected 'id,id,score' got '" + line + "'");
    const double value = parse_double_strict(fields[2], path.string());
    check_unit_interval(value, path.string() + " pair (" + fields[0] + "," + fields[1] + ")");
    const PairKey key = make_pair_key(fields[0], fields[1]);
    auto [it, inserted] = scores.emplace(key, value);
    if (!inserted && it->second != value)
      throw Error(path.string() + ": conflicting scores for pair (" + key.first + "," +
                  key.second + ")");
  }
  if (scores.empty()) throw Error(path.string() + ": no pairs");
  return scores;
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "winnow") return EstimatorKind::Winnow;
  if (name == "rubric") return EstimatorKind::Rubric;
  if (name == "external") return EstimatorKind::External;
  throw Error("unknown estimator '" + name + "' (expected winnow, rubric or external)");
}

void add_evaluate(CLI::App& app) {
  auto* cmd = app.add_subcommand("evaluate", "Run the full evaluation pipeline on a corpus");
  auto corpus = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto cfg = std::make_shared<EvaluateConfig>();
  auto estimator_name = std::make_shared<std::string>("winnow");
  auto w_structural = std::make_shared<double>(0.6);
  auto features = std::make_shared<std::string>();
  auto outcomes = std::make_shared<std::string>();

  cmd->add_option("corpus", *corpus, "Corpus directory (contains manifest.json)")->required();
  cmd->add_option("--out", *out, "Output directory for artifacts")->required();
  cmd->add_option("--seed", cfg->seed, "Random seed (default 0)");
  cmd->add_option("--cap", cfg->cap, "Max gold-standard sample size K (default 720)");
  cmd->add_option("--estimator", *estimator_name, "winnow | rubric | external (default winnow)");
  cmd->add_option("--kgram", cfg->winnow.k, "Winnowing gram size (default 5)");
  cmd->add_option("--window", cfg->winnow.w, "Winnowing window size (default 4)");
  cmd->add_option("--adapter", cfg->adapter_command,
                  "External estimator command (gets two file paths, prints one score)");
  cmd->add_option("--features", *features, "Feature vector CSV for the rubric estimator");
  cmd->add_option("--w-structural", *w_structural,
                  "Weight of structural similarity in marks (default 0.6)");
  cmd->add_option("--full-marks", cfg->model.full_marks, "Marks for gold solutions (default 10)");
  cmd->add_option("--jobs", cfg->jobs, "Parallel workers (default: hardware threads)");
  cmd->add_flag("--stub", cfg->runner.stub_mode,
                "Read test outcomes from outcomes.csv instead of executing submissions");
  cmd->add_option("--outcomes", *outcomes, "Stub outcomes file (default <corpus>/outcomes.csv)");
  cmd->add_option("--compile-cmd", cfg->runner.compile_command,
                  "Compile template with {src} {bin} {workdir}; empty skips compilation");
  cmd->add_option("--run-cmd", cfg->runner.run_command,
                  "Run template with {src} {bin} {workdir} (default '{bin}')");
  cmd->add_option("--review-fraction", cfg->review_fraction,
                  "Clusters smaller than this share of the sample are flagged (default 0.02)");
  cfg->jobs = default_jobs();

  cmd->callback([corpus, out, cfg, estimator_name, w_structural, features, outcomes] {
    cfg->estimator = parse_estimator(*estimator_name);
    cfg->model.weight_structural = *w_structural;
    cfg->model.weight_tests = 1.0 - *w_structural;
    cfg->out_dir = *out;
    if (!features->empty()) cfg->feature_vectors_path = *features;
    if (!outcomes->empty()) cfg->runner.stub_outcomes_path = *outcomes;
    const EvaluateResult result = evaluate(*corpus, *cfg);

    std::cout << "gold: " << result.partition.gold.size()
              << "  incorrect: " << result.partition.incorrect.size() << "\n";
    if (result.clustering) {
      std::cout << "approaches: " << result.clustering->clusters.size()
                << "  (modularity " << format_fixed(result.clustering->modularity, 6) << ")\n";
      for (size_t i = 0; i < result.clustering->clusters.size(); ++i)
        std::cout << "  cluster " << i << ": size " << result.clustering->clusters[i].size()
                  << ", representative " << result.representatives.reps[i] << "\n";
    }
    std::cout << "artifacts written to " << cfg->out_dir.string() << "\n";
  });
}

void add_cluster(CLI::App& app) {
  auto* cmd = app.add_subcommand("cluster", "Cluster a similarity graph edge list");
  auto edge_list = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto seed = std::make_shared<uint64_t>(0);
  auto review_fraction = std::make_shared<double>(0.02);
  cmd->add_option("edge-list", *edge_list, "Edge list CSV (id,id,weight)")->required();
  cmd->add_option("--out", *out, "Clustering JSON output path")->required();
  cmd->add_option("--seed", *seed, "Random seed (default 0)");
  cmd->add_option("--review-fraction", *review_fraction,
                  "Clusters smaller than this share are flagged (default 0.02)");

  cmd->callback([edge_list, out, seed, review_fraction] {
    const SimilarityGraph g = import_edge_list(*edge_list);
    const Clustering c = louvain(g, *seed);
    const Representatives reps = pick_representatives(c, *seed);
    write_text_file(*out, detail::clustering_json(c, reps, *review_fraction, g.size()));
    std::cout << "clusters: " << c.clusters.size() << "  modularity: "
              << format_fixed(c.modularity, 6) << "\n";
    for (size_t i = 0; i < c.clusters.size(); ++i)
      std::cout << "  cluster " << i << ": size " << c.clusters[i].size() << ", representative "
                << reps.reps[i] << "\n";
  });
}

void add_estimate_k(CLI::App& app) {
  auto* cmd = app.add_subcommand("estimate-k", "Estimate the maximum required graph size");
  auto edge_list = std::make_shared<std::string>();
  auto sizes_text = std::make_shared<std::string>();
  auto trace_path = std::make_shared<std::string>();
  auto cfg = std::make_shared<KEstimateConfig>();
  cmd->add_option("edge-list", *edge_list, "Edge list CSV (id,id,weight)")->required();
  cmd->add_option("--sizes", *sizes_text, "Descending candidate sizes, e.g. 800,700,600")
      ->required();
  cmd->add_option("--reps", cfg->repetitions, "Repetitions per size (default 5)");
  cmd->add_option("--seed", cfg->seed, "Random seed (default 0)");
  cmd->add_option("--jobs", cfg->jobs, "Parallel workers (default: hardware threads)");
  cmd->add_option("--trace", *trace_path, "Write the per-repetition trace CSV here");
  cfg->jobs = default_jobs();

  cmd->callback([edge_list, sizes_text, trace_path, cfg] {
    const SimilarityGraph g = import_edge_list(*edge_list);
    std::vector<size_t> sizes;
    for (const std::string& part : split_csv_line(*sizes_text))
      sizes.push_back(static_cast<size_t>(parse_int_strict(part, "--sizes")));
    const KEstimate est = estimate_k(g, sizes, *cfg);
    std::cout << "K = " << est.k << "\n";
    std::string trace = "k,repetition,agrees,num_clusters\n";
    for (const auto& row : est.trace)
      trace += std::to_string(row.candidate_size) + "," + std::to_string(row.repetition) + "," +
               (row.agrees ? "1" : "0") + "," + std::to_string(row.num_clusters) + "\n";
    if (trace_path->empty())
      std::cout << trace;
    else
      write_text_file(*trace_path, trace);
  });
}

void add_inflate(CLI::App& app) {
  auto* cmd = app.add_subcommand("inflate", "Inflate a graph by repeated graph join");
  auto edge_list = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto factor = std::make_shared<size_t>(3);
  cmd->add_option("edge-list", *edge_list, "Edge list CSV (id,id,weight)")->required();
  cmd->add_option("--out", *out, "Inflated edge list output path")->required();
  cmd->add_option("--factor,--inflate-factor", *factor, "Copies per node (default 3)");

  cmd->callback([edge_list, out, factor] {
    const SimilarityGraph g = import_edge_list(*edge_list);
    const auto [inflated, mapping] = graph_join_inflate(g, *factor);
    export_edge_list(inflated, std::filesystem::path(*out));
    std::cout << "inflated " << g.size() << " -> " << inflated.size() << " nodes ("
              << inflated.edge_count() << " edges)\n";
  });
}

void add_similarity(CLI::App& app) {
  auto* cmd = app.add_subcommand("similarity", "Score one pair of source files");
  auto file_a = std::make_shared<std::string>();
  auto file_b = std::make_shared<std::string>();
  auto params = std::make_shared<WinnowParams>();
  auto adapter = std::make_shared<std::string>();
  cmd->add_option("fileA", *file_a, "First source file")->required();
  cmd->add_option("fileB", *file_b, "Second source file")->required();
  cmd->add_option("--kgram", params->k, "Winnowing gram size (default 5)");
  cmd->add_option("--window", params->w, "Winnowing window size (default 4)");
  cmd->add_option("--adapter", *adapter, "External estimator command instead of winnowing");

  cmd->callback([file_a, file_b, params, adapter] {
    double score = 0.0;
    if (adapter->empty()) {
      score = similarity_winnow(read_text_file(*file_a), read_text_file(*file_b), *params);
    } else {
      const ExternalEstimator est(*adapter, ".", std::filesystem::temp_directory_path());
      const Submission a{std::filesystem::path(*file_a).filename().string(),
                         read_text_file(*file_a), *file_a};
      const Submission b{std::filesystem::path(*file_b).filename().string(),
                         read_text_file(*file_b), *file_b};
      score = est.score(a, b);
    }
    std::cout << format_fixed(score, 6) << "\n";
  });
}

void add_compare_estimators(CLI::App& app) {
  auto* cmd = app.add_subcommand("compare-estimators",
                                 "Compare estimated pair scores against ground truth");
  auto est_path = std::make_shared<std::string>();
  auto truth_path = std::make_shared<std::string>();
  cmd->add_option("estimated", *est_path, "Estimated scores CSV (id,id,score)")->required();
  cmd->add_option("truth", *truth_path, "Ground truth CSV (id,id,score)")->required();

  cmd->callback([est_path, truth_path] {
    const EstimatorMetrics m =
        compare_estimators(read_pair_scores(*est_path), read_pair_scores(*truth_path));
    std::cout << "MAE: " << format_fixed(m.mae, 6) << "\n";
    std::cout << "EV:  "
              << (m.explained_variance ? format_fixed(*m.explained_variance, 6)
                                       : std::string("undefined (constant truth)"))
              << "\n";
    std::cout << "SC:  "
              << (m.spearman ? format_fixed(*m.spearman, 6)
                             : std::string("undefined (too few or constant ranks)"))
              << "\n";
  });
}

void add_report(CLI::App& app) {
  auto* cmd = app.add_subcommand("report", "Summarize an evaluation output directory");
  auto out_dir = std::make_shared<std::string>();
  auto threshold = std::make_shared<double>(0.2);
  cmd->add_option("outdir", *out_dir, "Directory written by evaluate")->required();
  cmd->add_option("--low-similarity", *threshold,
                  "Flag assignments with a best score below this (default 0.2)");
  cmd->callback([out_dir, threshold] { std::cout << render_report(*out_dir, *threshold); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"approach-aware evaluation of programming-assignment submissions"};
  app.require_subcommand(1);
  add_evaluate(app);
  add_cluster(app);
  add_estimate_k(app);
  add_inflate(app);
  add_similarity(app);
  add_compare_estimators(app);
  add_report(app);

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const aeval::StageError& e) {
    std::cerr << "aeval: error " << e.what() << "\n";
    return 1;
  } catch (const aeval::Error& e) {
    std::cerr << "aeval: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "aeval: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
