#include "rdpg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rdpg/config.hpp"
#include "rdpg/embed.hpp"
#include "rdpg/errors.hpp"
#include "rdpg/io.hpp"
#include "rdpg/parallel.hpp"
#include "rdpg/random.hpp"

namespace rdpg {

std::pair<LatentDistribution, LatentDistribution> ModelFamily::at(double sweep) const {
  switch (kind) {
    case Kind::sbm_two_block: {
      const auto block = [&](double eps) {
        Eigen::MatrixXd b(2, 2);
        b << within + eps, between, between, within + eps;
        return LatentDistribution{sbm_to_latent(b, block_weights)};
      };
      return {block(0.0), block(sweep)};
    }
    case Kind::uniform_scaling: {
      const auto d = static_cast<std::size_t>(box_dim);
      return {UniformBox{std::vector<double>(d, sweep), std::vector<double>(d, f_upper)},
              UniformBox{std::vector<double>(d, 0.0), std::vector<double>(d, g_upper)}};
    }
    case Kind::fixed_pair:
      if (!f || !g) throw Error("fixed_pair family needs both F and G");
      return {*f, *g};
  }
  throw Error("unknown model family");
}

void ExperimentConfig::validate() const {
  if (replicates < 1) throw Error("replicate count must be >= 1");
  if (sweep.empty() || n_grid.empty()) throw Error("experiment grids must be nonempty");
  if (!(m_ratio > 0.0)) throw Error("m_ratio must be positive");
  for (int n : n_grid) {
    if (n < 2 || std::lround(m_ratio * n) < 2) throw Error("graph sizes must be >= 2");
  }
  test.validate();
}

void PowerTable::write_csv(std::ostream& out) const {
  if (!config.empty()) out << "# config: " << config << '\n';
  out << "n,m,sweep,arm,replicates,rejections,power,se\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.m << ',' << format_double(r.sweep) << ',' << r.arm << ','
        << r.replicates << ',' << r.rejections << ',' << format_double(r.power) << ','
        << format_double(r.standard_error) << '\n';
  }
}

namespace {

PowerRow make_row(int n, int m, double sweep, const char* arm, int replicates,
                  int rejections) {
  PowerRow row{n, m, sweep, arm, replicates, rejections};
  row.power = static_cast<double>(rejections) / replicates;
  row.standard_error = std::sqrt(row.power * (1.0 - row.power) / replicates);
  return row;
}

using CellKey = std::tuple<int, double, std::string>;

std::map<CellKey, PowerRow> read_finished_cells(const std::filesystem::path& path,
                                                const std::string& config) {
  std::map<CellKey, PowerRow> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  std::size_t lineno = 0;
  bool matched = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("# config: ", 0) == 0) {
      if (line.substr(10) != config) {
        throw Error(path.string() + " was written for a different configuration");
      }
      matched = true;
      continue;
    }
    if (line.empty() || line.rfind("n,", 0) == 0) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 8) throw ParseError(path.string() + ": bad power row", lineno);
    try {
      PowerRow row = make_row(std::stoi(cells[0]), std::stoi(cells[1]), std::stod(cells[2]),
                              cells[3].c_str(), std::stoi(cells[4]), std::stoi(cells[5]));
      done.emplace(CellKey{row.n, row.sweep, row.arm}, row);
    } catch (const std::logic_error&) {
      throw ParseError(path.string() + ": bad power row", lineno);
    }
  }
  if (!done.empty() && !matched) {
    throw Error(path.string() + " has no configuration header; refusing to resume");
  }
  return done;
}

}  // namespace

PowerTable run_power_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& output) {
  config.validate();
  PowerTable table;
  table.config = experiment_to_json(config).dump();

  std::map<CellKey, PowerRow> finished;
  bool need_header = true;
  if (output && std::filesystem::exists(*output)) {
    finished = read_finished_cells(*output, table.config);
    need_header = false;
  }

  for (std::size_t in = 0; in < config.n_grid.size(); ++in) {
    for (std::size_t is = 0; is < config.sweep.size(); ++is) {
      const int n = config.n_grid[in];
      const int m = static_cast<int>(std::lround(config.m_ratio * n));
      const double sweep = config.sweep[is];
      const auto hit = finished.find({n, sweep, "estimated"});
      const bool have_latent =
          !config.oracle_arm || finished.count({n, sweep, "latent"}) != 0;
      if (hit != finished.end() && have_latent) {
        table.rows.push_back(hit->second);
        if (config.oracle_arm) table.rows.push_back(finished.at({n, sweep, "latent"}));
        continue;
      }

      const auto [f, g] = config.family.at(sweep);
      const double alpha_a = config.test.variant == Variant::sparse ? *config.test.sparsity_a : 1.0;
      const double alpha_b = config.test.variant == Variant::sparse ? *config.test.sparsity_b : 1.0;
      TestConfig latent_test = config.test;
      if (latent_test.variant == Variant::sparse) latent_test.variant = Variant::identity;

      const auto reps = static_cast<std::size_t>(config.replicates);
      std::vector<char> reject(reps, 0), reject_latent(reps, 0);
      parallel_for(reps, config.threads, [&](std::size_t r) {
        Engine rng = make_stream(config.seed, {in, is, r});
        const LatentSample x = sample_latent(f, static_cast<std::size_t>(n), rng);
        const LatentSample y = sample_latent(g, static_cast<std::size_t>(m), rng);
        const Graph a = sample_rdpg(x.positions, alpha_a, rng);
        const Graph b = sample_rdpg(y.positions, alpha_b, rng);
        TestConfig test = config.test;
        test.seed = derive_seed(config.seed, {in, is, r, 1});
        reject[r] = two_sample_test(a, b, test).reject;
        if (config.oracle_arm) {
          TestConfig lt = latent_test;
          lt.seed = test.seed;
          reject_latent[r] = two_sample_test(x.positions, y.positions, lt).reject;
        }
      });

      const auto count = [](const std::vector<char>& v) {
        return static_cast<int>(std::count(v.begin(), v.end(), 1));
      };
      std::vector<PowerRow> cell{
          make_row(n, m, sweep, "estimated", config.replicates, count(reject))};
      if (config.oracle_arm) {
        cell.push_back(
            make_row(n, m, sweep, "latent", config.replicates, count(reject_latent)));
      }
      if (output) {
        std::ofstream out(*output, std::ios::app);
        if (!out) throw Error("cannot write " + output->string());
        PowerTable chunk{cell, need_header ? table.config : std::string()};
        std::ostringstream text;
        chunk.write_csv(text);
        std::string s = text.str();
        if (!need_header) s = s.substr(s.find('\n') + 1);  // drop column header
        out << s;
        need_header = false;
      }
      table.rows.insert(table.rows.end(), cell.begin(), cell.end());
    }
  }
  return table;
}

Eigen::MatrixXd population_rotation(const LatentDistribution& dist,
                                    std::size_t samples, std::uint64_t seed) {
  Eigen::MatrixXd moment;
  Eigen::VectorXd mean;
  if (!second_moment(dist, moment) || !first_moment(dist, mean)) {
    Engine rng = make_stream(seed, {0x77300000ULL});
    const Eigen::MatrixXd x = sample_latent(dist, samples, rng).positions;
    moment = x.transpose() * x / static_cast<double>(x.rows());
    mean = x.colwise().mean().transpose();
    // Rows lie in the unit ball, so sampling error is O(N^{-1/2}).
    return population_rotation(moment, mean, 4.0 / std::sqrt(static_cast<double>(samples)));
  }
  return population_rotation(moment, mean);
}

std::vector<WCompareRow> w_comparison_experiment(const WCompareConfig& config) {
  validate(config.f);
  validate(config.g);
  if (dimension(config.f) != dimension(config.g)) {
    throw DimensionError("w-compare: F and G differ in dimension");
  }
  if (config.replicates < 1 || config.n_grid.empty()) {
    throw Error("w-compare: need replicates >= 1 and a nonempty n grid");
  }
  const Eigen::MatrixXd t1 =
      population_rotation(config.f, config.surrogate_samples, derive_seed(config.seed, {1}));
  const Eigen::MatrixXd t2 =
      population_rotation(config.g, config.surrogate_samples, derive_seed(config.seed, {2}));
  const Eigen::MatrixXd w0 = t2 * t1.transpose();

  std::vector<WCompareRow> rows;
  for (std::size_t in = 0; in < config.n_grid.size(); ++in) {
    const int n = config.n_grid[in];
    const int m = config.same_graph ? n : static_cast<int>(std::lround(config.m_ratio * n));
    const auto reps = static_cast<std::size_t>(config.replicates);
    std::vector<WCompareRow> cell(reps);
    parallel_for(reps, config.threads, [&](std::size_t r) {
      Engine rng = make_stream(config.seed, {in, r});
      const Eigen::MatrixXd x =
          sample_latent(config.f, static_cast<std::size_t>(n), rng).positions;
      const Graph a = sample_rdpg(x, 1.0, rng);
      Eigen::MatrixXd y;
      Graph b;
      if (config.same_graph) {
        y = x;
        b = a;
      } else {
        y = sample_latent(config.g, static_cast<std::size_t>(m), rng).positions;
        b = sample_rdpg(y, 1.0, rng);
      }
      const Eigen::MatrixXd xhat = ase(a, config.dimension).positions;
      const Eigen::MatrixXd yhat = ase(b, config.dimension).positions;
      const double u_hat = u_statistic(config.kernel, xhat, yhat);
      const Eigen::MatrixXd wnm = second_moment_rotation(y) * second_moment_rotation(x).transpose();
      const double scale = n + m;
      cell[r] = WCompareRow{n, m, static_cast<int>(r),
                            scale * (u_hat - u_statistic(config.kernel, x, y * wnm)),
                            scale * (u_hat - u_statistic(config.kernel, x, y * w0))};
    });
    rows.insert(rows.end(), cell.begin(), cell.end());
  }
  return rows;
}

void write_wcompare_csv(std::ostream& out, const std::vector<WCompareRow>& rows) {
  out << "n,m,replicate,delta_sample_rotation,delta_population_rotation\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.m << ',' << r.replicate << ',' << format_double(r.delta_sample)
        << ',' << format_double(r.delta_population) << '\n';
  }
}

Eigen::MatrixXd DissimilarityMatrix::dissimilarity() const {
  return statistic.cwiseMax(0.0);
}

DissimilarityMatrix pairwise_dissimilarity(const std::vector<Graph>& graphs, int d,
                                           const KernelSpec& spec, unsigned threads) {
  if (graphs.size() < 2) throw Error("pairwise_dissimilarity: need at least 2 graphs");
  const std::size_t count = graphs.size();
  std::vector<Eigen::MatrixXd> embedded(count);
  parallel_for(count, threads, [&](std::size_t g) {
    if (graphs[g].size() < static_cast<std::size_t>(std::max(d, 2))) {
      throw InsufficientSampleError("graph " + std::to_string(g) +
                                    ": fewer vertices than max(d, 2)");
    }
    try {
      embedded[g] = ase(graphs[g], d).positions;
    } catch (const Error& e) {
      throw Error("graph " + std::to_string(g) + ": " + e.what());
    }
  });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t g = 0; g < count; ++g) {
    for (std::size_t h = g + 1; h < count; ++h) pairs.emplace_back(g, h);
  }
  DissimilarityMatrix out;
  out.statistic = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count),
                                        static_cast<Eigen::Index>(count));
  parallel_for(pairs.size(), threads, [&](std::size_t p) {
    const auto [g, h] = pairs[p];
    const double u = u_statistic(spec, embedded[g], embedded[h]);
    out.statistic(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(h)) = u;
    out.statistic(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(g)) = u;
  });
  return out;
}

KnnReport knn_classify(const Eigen::MatrixXd& dissimilarity, const std::vector<int>& labels,
                       int k, int folds, std::uint64_t seed) {
  const auto total = static_cast<std::size_t>(dissimilarity.rows());
  if (dissimilarity.cols() != dissimilarity.rows()) {
    throw DimensionError("knn_classify: dissimilarity must be square");
  }
  if (labels.size() != total) throw DimensionError("knn_classify: label count mismatch");
  if (k < 1) throw Error("knn_classify: k must be >= 1");
  if (folds < 2) throw Error("knn_classify: need at least 2 folds");
  for (int l : labels) {
    if (l < 0) throw Error("knn_classify: labels must be nonnegative");
  }

  // Stratified assignment: shuffle each class, then deal round-robin with an
  // offset carried across classes so fold sizes stay balanced.
  KnnReport report;
  report.fold_of.assign(total, 0);
  Engine rng = make_stream(seed, {0x6b6e6eULL});
  const int num_labels = *std::max_element(labels.begin(), labels.end()) + 1;
  std::size_t dealt = 0;
  for (int label = 0; label < num_labels; ++label) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < total; ++i) {
      if (labels[i] == label) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i : members) report.fold_of[i] = static_cast<int>(dealt++ % folds);
  }

  std::vector<std::size_t> fold_size(static_cast<std::size_t>(folds), 0);
  for (int f : report.fold_of) ++fold_size[static_cast<std::size_t>(f)];
  for (std::size_t f = 0; f < fold_size.size(); ++f) {
    if (fold_size[f] > 0 && total - fold_size[f] < static_cast<std::size_t>(k)) {
      throw Error("knn_classify: k exceeds the smallest training fold");
    }
  }

  report.predictions.assign(total, -1);
  std::vector<int> correct(static_cast<std::size_t>(folds), 0);
  for (std::size_t i = 0; i < total; ++i) {
    const int fold = report.fold_of[i];
    std::vector<std::size_t> train;
    for (std::size_t j = 0; j < total; ++j) {
      if (report.fold_of[j] != fold) train.push_back(j);
    }
    const auto di = [&](std::size_t j) {
      return dissimilarity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    std::partial_sort(train.begin(), train.begin() + k, train.end(),
                      [&](std::size_t a, std::size_t b) {
                        return di(a) != di(b) ? di(a) < di(b) : a < b;
                      });
    std::vector<int> votes(static_cast<std::size_t>(num_labels), 0);
    std::vector<double> spread(static_cast<std::size_t>(num_labels), 0.0);
    for (int t = 0; t < k; ++t) {
      const auto j = train[static_cast<std::size_t>(t)];
      ++votes[static_cast<std::size_t>(labels[j])];
      spread[static_cast<std::size_t>(labels[j])] += di(j);
    }
    int best = -1;
    for (int l = 0; l < num_labels; ++l) {
      const auto li = static_cast<std::size_t>(l);
      if (votes[li] == 0) continue;
      if (best < 0) {
        best = l;
        continue;
      }
      const auto bi = static_cast<std::size_t>(best);
      if (votes[li] > votes[bi] || (votes[li] == votes[bi] && spread[li] < spread[bi])) {
        best = l;
      }
    }
    report.predictions[i] = best;
    if (best == labels[i]) ++correct[static_cast<std::size_t>(fold)];
  }

  int all_correct = 0;
  for (int f = 0; f < folds; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    all_correct += correct[fi];
    report.fold_accuracy.push_back(
        fold_size[fi] ? static_cast<double>(correct[fi]) / static_cast<double>(fold_size[fi])
                      : 0.0);
  }
  report.accuracy = static_cast<double>(all_correct) / static_cast<double>(total);
  return report;
}

}  // namespace rdpg
