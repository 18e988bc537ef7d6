// Command-line front end: sampling, embedding, two-sample tests, and the
// Monte Carlo / classification experiments.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rdpg/config.hpp"
#include "rdpg/embed.hpp"
#include "rdpg/errors.hpp"
#include "rdpg/harness.hpp"
#include "rdpg/io.hpp"
#include "rdpg/model.hpp"
#include "rdpg/testing.hpp"

namespace {

struct KernelOptions {
  std::string name = "gaussian";
  double sigma = 0.5;
  double c = 1.0;
  double beta = 0.5;
  double q = 1.0;

  void attach(CLI::App* app) {
    app->add_option("--kernel", name, "gaussian | gaussian-median | imq | energy")
        ->check(CLI::IsMember({"gaussian", "gaussian-median", "imq", "energy"}))
        ->capture_default_str();
    app->add_option("--sigma", sigma, "Gaussian bandwidth")->capture_default_str();
    app->add_option("--c", c, "inverse multiquadric offset")->capture_default_str();
    app->add_option("--beta", beta, "inverse multiquadric exponent")->capture_default_str();
    app->add_option("--q", q, "energy exponent in (0, 2)")->capture_default_str();
  }

  // `x`, `y` feed the median heuristic when requested.
  rdpg::KernelSpec build(const Eigen::MatrixXd* x = nullptr,
                         const Eigen::MatrixXd* y = nullptr) const {
    if (name == "gaussian") return rdpg::KernelSpec::gaussian(sigma);
    if (name == "imq") return rdpg::KernelSpec::inverse_multiquadric(c, beta);
    if (name == "energy") return rdpg::KernelSpec::energy(q);
    if (!x || !y) throw rdpg::Error("gaussian-median is not available for this command");
    return rdpg::KernelSpec::gaussian(rdpg::median_pairwise_distance(*x, *y));
  }
};

// Writes to `path`, or stdout when empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw rdpg::Error("cannot write " + path);
  write(out);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rdpg::Error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

// Maps label strings to indices in sorted order.
std::vector<int> encode_labels(const std::vector<std::string>& names,
                               std::vector<std::string>& vocabulary) {
  vocabulary = names;
  std::sort(vocabulary.begin(), vocabulary.end());
  vocabulary.erase(std::unique(vocabulary.begin(), vocabulary.end()), vocabulary.end());
  std::vector<int> out;
  for (const auto& n : names) {
    out.push_back(static_cast<int>(
        std::lower_bound(vocabulary.begin(), vocabulary.end(), n) - vocabulary.begin()));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric two-sample testing for random dot product graphs"};
  app.require_subcommand(1);

  // sample
  auto* sample = app.add_subcommand("sample", "Sample an RDPG from a latent distribution config");
  std::string dist_path, graph_out, latent_out;
  std::size_t sample_n = 100;
  double sample_alpha = 1.0;
  std::uint64_t sample_seed = 0;
  sample->add_option("config", dist_path, "latent distribution JSON")->required();
  sample->add_option("--n", sample_n, "vertex count")->capture_default_str();
  sample->add_option("--sparsity", sample_alpha, "sparsity factor in (0, 1]")
      ->capture_default_str();
  sample->add_option("--seed", sample_seed)->capture_default_str();
  sample->add_option("-o,--out", graph_out, "edge list output (default stdout)");
  sample->add_option("--latent-out", latent_out, "write latent positions CSV");

  // embed
  auto* embed = app.add_subcommand("embed", "Adjacency spectral embedding of an edge list");
  std::string embed_in, embed_out;
  int embed_d = 2;
  embed->add_option("graph", embed_in, "edge list")->required();
  embed->add_option("--d", embed_d, "embedding dimension")->capture_default_str();
  embed->add_option("-o,--out", embed_out, "CSV output (default stdout)");

  // test
  auto* test = app.add_subcommand("test", "Two-sample test between two edge lists");
  std::string test_a, test_b, test_out, variant = "identity";
  rdpg::TestConfig cfg;
  KernelOptions test_kernel;
  std::optional<double> sparsity_a, sparsity_b;
  test->add_option("graph_a", test_a)->required();
  test->add_option("graph_b", test_b)->required();
  test->add_option("--d", cfg.dimension, "embedding dimension")->capture_default_str();
  test->add_option("--variant", variant, "identity | scaling | projection | sparse")
      ->check(CLI::IsMember({"identity", "scaling", "projection", "sparse"}))
      ->capture_default_str();
  test_kernel.attach(test);
  test->add_option("--B", cfg.permutations, "permutation count")->capture_default_str();
  test->add_option("--alpha", cfg.alpha_level, "significance level")->capture_default_str();
  test->add_option("--seed", cfg.seed)->capture_default_str();
  test->add_option("--sparsity-a", sparsity_a, "known sparsity factor of graph A");
  test->add_option("--sparsity-b", sparsity_b, "known sparsity factor of graph B");
  test->add_option("--floor", cfg.projection_floor, "minimum row norm for projection")
      ->capture_default_str();
  test->add_option("-o,--out", test_out, "report output (default stdout)");

  // simulate-power
  auto* power = app.add_subcommand("simulate-power", "Monte Carlo power table from a config");
  std::string power_cfg, power_out;
  std::optional<unsigned> power_threads;
  power->add_option("config", power_cfg, "experiment JSON")->required();
  power->add_option("-o,--out", power_out,
                    "CSV output; rerunning with the same file resumes finished cells");
  power->add_option("--threads", power_threads, "worker threads (0 = all cores)");

  // dissim
  auto* dissim = app.add_subcommand("dissim", "Pairwise U-statistic dissimilarities");
  std::string manifest, dissim_out, labels_out;
  int dissim_d = 2;
  KernelOptions dissim_kernel;
  dissim->add_option("manifest", manifest,
                     "one graph per line: '<edge list path> [label]'; relative paths "
                     "resolve against the manifest directory")
      ->required();
  dissim->add_option("--d", dissim_d, "embedding dimension")->capture_default_str();
  dissim_kernel.attach(dissim);
  dissim->add_option("-o,--out", dissim_out, "matrix CSV output (default stdout)");
  dissim->add_option("--labels-out", labels_out, "write manifest labels, one per line");
  bool dissim_raw = false;
  dissim->add_flag("--raw", dissim_raw, "export raw U values instead of max(U, 0)");

  // classify
  auto* classify = app.add_subcommand("classify", "k-NN cross-validated accuracy");
  std::string matrix_in, labels_in, classify_out;
  int knn_k = 1, knn_folds = 10;
  std::uint64_t knn_seed = 0;
  classify->add_option("matrix", matrix_in, "dissimilarity matrix CSV")->required();
  classify->add_option("--labels", labels_in, "labels file, one per line")->required();
  classify->add_option("--k", knn_k)->capture_default_str();
  classify->add_option("--folds", knn_folds)->capture_default_str();
  classify->add_option("--seed", knn_seed)->capture_default_str();
  classify->add_option("-o,--out", classify_out, "report output (default stdout)");

  // w-compare
  auto* wcompare = app.add_subcommand("w-compare", "Sample vs population rotation differences");
  std::string wc_cfg, wc_out;
  wcompare->add_option("config", wc_cfg, "w-compare JSON")->required();
  wcompare->add_option("-o,--out", wc_out, "CSV output (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      const auto dist = rdpg::distribution_from_json(rdpg::load_json(dist_path));
      rdpg::Engine rng = rdpg::make_stream(sample_seed);
      const auto x = rdpg::sample_latent(dist, sample_n, rng);
      const auto g = rdpg::sample_rdpg(x.positions, sample_alpha, rng);
      emit(graph_out, [&](std::ostream& o) { rdpg::write_edge_list(o, g); });
      if (!latent_out.empty()) rdpg::write_matrix_csv(latent_out, x.positions);
    } else if (*embed) {
      const auto e = rdpg::ase(rdpg::read_edge_list(embed_in), embed_d);
      emit(embed_out, [&](std::ostream& o) { rdpg::write_embedding_csv(o, e); });
    } else if (*test) {
      cfg.variant = rdpg::parse_variant(variant);
      cfg.sparsity_a = sparsity_a;
      cfg.sparsity_b = sparsity_b;
      const auto a = rdpg::read_edge_list(test_a);
      const auto b = rdpg::read_edge_list(test_b);
      if (static_cast<std::size_t>(cfg.dimension) > std::min(a.size(), b.size())) {
        throw rdpg::DimensionError("--d exceeds the number of vertices");
      }
      const auto xa = rdpg::ase(a, cfg.dimension).positions;
      const auto xb = rdpg::ase(b, cfg.dimension).positions;
      cfg.kernel = test_kernel.build(&xa, &xb);
      const auto report = rdpg::two_sample_test(xa, xb, cfg);
      emit(test_out, [&](std::ostream& o) { o << report.to_json() << '\n'; });
    } else if (*power) {
      auto config = rdpg::experiment_from_json(rdpg::load_json(power_cfg));
      if (power_threads) config.threads = *power_threads;
      std::optional<std::filesystem::path> path;
      if (!power_out.empty() && power_out != "-") path = power_out;
      const auto table = rdpg::run_power_experiment(config, path);
      if (!path) table.write_csv(std::cout);
    } else if (*dissim) {
      const std::filesystem::path base = std::filesystem::path(manifest).parent_path();
      std::vector<rdpg::Graph> graphs;
      std::vector<std::string> labels;
      for (const auto& line : read_lines(manifest)) {
        std::istringstream fields(line);
        std::string path, label;
        fields >> path >> label;
        std::filesystem::path p(path);
        if (p.is_relative()) p = base / p;
        graphs.push_back(rdpg::read_edge_list(p));
        labels.push_back(label);
      }
      const auto d = rdpg::pairwise_dissimilarity(graphs, dissim_d, dissim_kernel.build());
      emit(dissim_out, [&](std::ostream& o) {
        rdpg::write_matrix_csv(o, dissim_raw ? d.statistic : d.dissimilarity());
      });
      if (!labels_out.empty()) {
        std::ofstream o(labels_out);
        for (const auto& l : labels) o << l << '\n';
      }
    } else if (*classify) {
      const auto matrix = rdpg::read_matrix_csv(matrix_in);
      std::vector<std::string> vocabulary;
      const auto labels = encode_labels(read_lines(labels_in), vocabulary);
      const auto report = rdpg::knn_classify(matrix, labels, knn_k, knn_folds, knn_seed);
      nlohmann::ordered_json j;
      j["accuracy"] = report.accuracy;
      j["fold_accuracy"] = report.fold_accuracy;
      j["k"] = knn_k;
      j["folds"] = knn_folds;
      j["seed"] = knn_seed;
      j["labels"] = vocabulary;
      emit(classify_out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    } else if (*wcompare) {
      const auto config = rdpg::wcompare_from_json(rdpg::load_json(wc_cfg));
      const auto rows = rdpg::w_comparison_experiment(config);
      emit(wc_out, [&](std::ostream& o) { rdpg::write_wcompare_csv(o, rows); });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
