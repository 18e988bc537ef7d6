#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "rdpg/errors.hpp"
#include "rdpg/harness.hpp"

using namespace rdpg;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small_experiment() {
  ExperimentConfig c;
  c.sweep = {0.0, 0.1};
  c.n_grid = {40, 60};
  c.replicates = 6;
  c.test.permutations = 30;
  c.oracle_arm = true;
  c.seed = 99;
  return c;
}

std::vector<Graph> sample_graphs(const LatentDistribution& f, int count, std::size_t n,
                                 Engine& rng) {
  std::vector<Graph> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(sample_rdpg(sample_latent(f, n, rng).positions, 1.0, rng));
  }
  return out;
}

}  // namespace

TEST_CASE("model families") {
  ModelFamily fam;
  auto [f, g] = fam.at(0.1);
  Eigen::MatrixXd mf, mg;
  REQUIRE(second_moment(f, mf));
  REQUIRE(second_moment(g, mg));
  const auto& pg = std::get<PointMassMixture>(g);
  CHECK((pg.atoms * pg.atoms.transpose() - oracle::two_block(0.1)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(pg.weights == std::vector<double>{0.4, 0.6});

  fam.kind = ModelFamily::Kind::uniform_scaling;
  auto [uf, ug] = fam.at(0.2);
  CHECK(std::get<UniformBox>(uf).lower == std::vector<double>{0.2, 0.2});
  CHECK(std::get<UniformBox>(ug).upper[1] == doctest::Approx(0.5773502691896258));

  fam.kind = ModelFamily::Kind::fixed_pair;
  CHECK_THROWS_AS(fam.at(0.0), Error);
}

TEST_CASE("experiment validation") {
  ExperimentConfig c;
  c.replicates = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.n_grid = {1};
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.sweep.clear();
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("power table basics") {
  auto c = small_experiment();
  c.replicates = 1;
  c.oracle_arm = false;
  const auto t = run_power_experiment(c);
  REQUIRE(t.rows.size() == 4);
  for (const auto& r : t.rows) {
    CHECK((r.power == 0.0 || r.power == 1.0));
    CHECK(r.standard_error == 0.0);
    CHECK(r.replicates == 1);
    CHECK(r.m == r.n);
    CHECK(r.arm == "estimated");
  }
}

TEST_CASE("power table is reproducible and independent of threading") {
  auto c = small_experiment();
  c.threads = 1;
  const auto a = run_power_experiment(c);
  c.threads = 3;
  const auto b = run_power_experiment(c);
  std::ostringstream sa, sb;
  a.write_csv(sa);
  b.write_csv(sb);
  // The config echo includes no thread count, so the text matches exactly.
  CHECK(sa.str() == sb.str());
  REQUIRE(a.rows.size() == 8);
  CHECK(a.rows[0].arm == "estimated");
  CHECK(a.rows[1].arm == "latent");
  for (const auto& r : a.rows) {
    CHECK(r.standard_error ==
          doctest::Approx(std::sqrt(r.power * (1.0 - r.power) / r.replicates)));
  }
  CHECK(sa.str().rfind("# config: ", 0) == 0);
  CHECK(sa.str().find("\nn,m,sweep,arm,replicates,rejections,power,se\n") != std::string::npos);
}

TEST_CASE("interrupted power runs resume to the same table") {
  const auto dir = std::filesystem::temp_directory_path() / "rdpg_resume_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto full_path = dir / "full.csv";
  const auto part_path = dir / "part.csv";
  const auto c = small_experiment();
  const auto full = run_power_experiment(c, full_path);
  const std::string text = slurp(full_path);

  // Keep the header lines and the first finished cell (two rows).
  std::istringstream lines(text);
  std::ofstream part(part_path);
  std::string line;
  for (int i = 0; i < 4 && std::getline(lines, line); ++i) part << line << '\n';
  part.close();

  const auto resumed = run_power_experiment(c, part_path);
  CHECK(slurp(part_path) == text);
  REQUIRE(resumed.rows.size() == full.rows.size());
  for (std::size_t i = 0; i < full.rows.size(); ++i) {
    CHECK(resumed.rows[i].rejections == full.rows[i].rejections);
  }

  auto other = c;
  other.seed = 100;
  CHECK_THROWS_AS(run_power_experiment(other, full_path), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("rejection frequency under the null stays near the level") {
  ExperimentConfig c;
  c.sweep = {0.0};
  c.n_grid = {200};
  c.replicates = 200;
  c.test.permutations = 100;
  c.seed = 2024;
  const auto t = run_power_experiment(c);
  CHECK(t.rows[0].power >= 0.01);
  CHECK(t.rows[0].power <= 0.11);
}

TEST_CASE("power grows with n and with the effect size") {
  ExperimentConfig c;
  c.sweep = {0.02, 0.05, 0.1};
  c.n_grid = {100, 200};
  c.replicates = 50;
  c.test.permutations = 100;
  c.seed = 7;
  const auto t = run_power_experiment(c);
  auto power = [&](int n, double eps) -> const PowerRow& {
    return *std::find_if(t.rows.begin(), t.rows.end(),
                         [&](const PowerRow& r) { return r.n == n && r.sweep == eps; });
  };
  auto not_below = [](const PowerRow& hi, const PowerRow& lo) {
    return hi.power + 2.0 * std::hypot(hi.standard_error, lo.standard_error) >= lo.power;
  };
  for (double eps : c.sweep) CHECK(not_below(power(200, eps), power(100, eps)));
  for (int n : c.n_grid) {
    CHECK(not_below(power(n, 0.05), power(n, 0.02)));
    CHECK(not_below(power(n, 0.1), power(n, 0.05)));
  }
  CHECK(power(200, 0.1).power > power(100, 0.02).power);
}

TEST_CASE("w comparison with a shared graph") {
  const auto f = sbm_to_latent(oracle::two_block(0.0), {0.4, 0.6});
  WCompareConfig c{f, f};
  c.n_grid = {80};
  c.replicates = 5;
  c.same_graph = true;
  c.seed = 3;
  const auto rows = w_comparison_experiment(c);
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) {
    CHECK(r.m == r.n);
    CHECK(r.delta_sample == doctest::Approx(r.delta_population).epsilon(1e-12));
  }
  std::ostringstream out;
  write_wcompare_csv(out, rows);
  CHECK(out.str().rfind("n,m,replicate,delta_sample_rotation,delta_population_rotation\n", 0) ==
        0);
  const auto again = w_comparison_experiment(c);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(again[i].delta_sample == rows[i].delta_sample);
}

TEST_CASE("population rotation from a surrogate sample") {
  LogitNormalMixture l{{Eigen::Vector2d(0, 0), Eigen::Vector2d(4, 4)},
                       {Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity()},
                       {0.4, 0.6}};
  const Eigen::MatrixXd a = population_rotation(l, 100000, 1);
  const Eigen::MatrixXd b = population_rotation(l, 100000, 2);
  CHECK((a.transpose() * a - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a - b).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("pairwise dissimilarity") {
  Engine rng = make_stream(11);
  const auto f = sbm_to_latent(oracle::two_block(0.0), {0.4, 0.6});
  const auto graphs = sample_graphs(f, 3, 80, rng);
  const auto kernel = KernelSpec::gaussian(0.5);
  const auto d = pairwise_dissimilarity(graphs, 2, kernel);
  for (int i = 0; i < 3; ++i) {
    CHECK(d.statistic(i, i) == 0.0);
    for (int j = 0; j < 3; ++j) {
      CHECK(d.statistic(i, j) == d.statistic(j, i));
      if (i != j) {
        CHECK(d.statistic(i, j) ==
              doctest::Approx(u_statistic(kernel, ase(graphs[std::size_t(i)], 2).positions,
                                          ase(graphs[std::size_t(j)], 2).positions))
                  .epsilon(1e-12));
      }
    }
  }
  CHECK(d.dissimilarity().minCoeff() >= 0.0);

  const auto twin = pairwise_dissimilarity({graphs[0], graphs[0]}, 2, kernel);
  CHECK(twin.statistic(0, 1) <= 0.0);
  CHECK(twin.dissimilarity()(0, 1) == 0.0);

  std::vector<Graph> bad{graphs[0], Graph(1)};
  CHECK_THROWS_WITH_AS(pairwise_dissimilarity(bad, 2, kernel), doctest::Contains("graph 1"),
                       Error);
  CHECK_THROWS_AS(pairwise_dissimilarity({graphs[0]}, 2, kernel), Error);
}

TEST_CASE("cross-model dissimilarities exceed within-model ones") {
  Engine rng = make_stream(12);
  const auto f = sbm_to_latent(oracle::two_block(0.0), {0.4, 0.6});
  const auto g = sbm_to_latent(oracle::two_block(0.1), {0.4, 0.6});
  int separated = 0;
  for (int r = 0; r < 20; ++r) {
    auto graphs = sample_graphs(f, 2, 500, rng);
    graphs.push_back(sample_graphs(g, 1, 500, rng)[0]);
    const auto d = pairwise_dissimilarity(graphs, 2, KernelSpec::gaussian(0.5));
    separated += std::min(d.statistic(0, 2), d.statistic(1, 2)) > d.statistic(0, 1);
  }
  CHECK(separated == 20);
}

TEST_CASE("k nearest neighbours") {
  SUBCASE("well separated classes are classified perfectly") {
    const int n = 20;
    Eigen::MatrixXd d(n, n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[std::size_t(i)] = i % 2;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d(i, j) = i == j ? 0.0 : (labels[std::size_t(i)] == labels[std::size_t(j)] ? 0.1 : 1.0);
    const auto r = knn_classify(d, labels, 3, 5, 1);
    CHECK(r.accuracy == 1.0);
    CHECK(r.fold_accuracy.size() == 5);
    // Stratified folds: each fold holds two of each class.
    for (int f = 0; f < 5; ++f) {
      int counts[2] = {0, 0};
      for (int i = 0; i < n; ++i) counts[labels[std::size_t(i)]] += r.fold_of[std::size_t(i)] == f;
      CHECK(counts[0] == 2);
      CHECK(counts[1] == 2);
    }
  }
  SUBCASE("uninformative dissimilarity gives chance accuracy") {
    const int n = 40;
    const Eigen::MatrixXd d = Eigen::MatrixXd::Ones(n, n) - Eigen::MatrixXd::Identity(n, n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[std::size_t(i)] = i % 2;
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) mean += knn_classify(d, labels, 1, 10, seed).accuracy;
    mean /= 50.0;
    CHECK(mean > 0.3);
    CHECK(mean < 0.7);
  }
  SUBCASE("vote ties go to the closer label") {
    // Item 0 has neighbours 1 (label 1, distance 0.2) and 2 (label 0, distance 0.3).
    Eigen::MatrixXd d(4, 4);
    d << 0.0, 0.2, 0.3, 0.9,
         0.2, 0.0, 0.5, 0.5,
         0.3, 0.5, 0.0, 0.5,
         0.9, 0.5, 0.5, 0.0;
    const std::vector<int> labels{0, 1, 0, 1};
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto r = knn_classify(d, labels, 2, 2, seed);
      // Folds hold one item of each class, so item 0 trains on item 2 and
      // on whichever of 1 and 3 is not in its fold.
      if (r.fold_of[1] != r.fold_of[0]) {
        CHECK(r.predictions[0] == 1);
        ++hits;
      } else {
        CHECK(r.predictions[0] == 0);
      }
    }
    CHECK(hits > 0);
  }
  SUBCASE("errors") {
    const Eigen::MatrixXd d = Eigen::MatrixXd::Zero(4, 4);
    CHECK_THROWS_AS(knn_classify(d, {0, 1, 0, 1}, 3, 2, 0), Error);
    CHECK_THROWS_AS(knn_classify(d, {0, 1, 0}, 1, 2, 0), DimensionError);
    CHECK_THROWS_AS(knn_classify(Eigen::MatrixXd::Zero(4, 3), {0, 1, 0, 1}, 1, 2, 0),
                    DimensionError);
    CHECK_THROWS_AS(knn_classify(d, {0, 1, 0, 1}, 1, 1, 0), Error);
  }
}
