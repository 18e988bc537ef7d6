#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "rdpg/errors.hpp"
#include "rdpg/testing.hpp"

using namespace rdpg;

TEST_CASE("variant names round-trip") {
  for (Variant v : {Variant::identity, Variant::scaling, Variant::projection, Variant::sparse}) {
    CHECK(parse_variant(to_string(v)) == v);
  }
  CHECK_THROWS_AS(parse_variant("bogus"), Error);
}

TEST_CASE("config validation") {
  TestConfig c;
  CHECK_NOTHROW(c.validate());
  c.permutations = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TestConfig{};
  c.alpha_level = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TestConfig{};
  c.variant = Variant::sparse;
  CHECK_THROWS_AS(c.validate(), Error);
  c.sparsity_a = 0.5;
  c.sparsity_b = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c.sparsity_b = 1.0;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("preprocessing examples") {
  Eigen::MatrixXd x(2, 2);
  x << 3, 4, 0, 0.5;
  SUBCASE("scaling") {
    double s = 0.0;
    const auto y = preprocess(x, Variant::scaling, std::nullopt, 1e-6, &s);
    CHECK(s == doctest::Approx(std::sqrt(25.25 / 2.0)));
    CHECK(y.squaredNorm() / 2.0 == doctest::Approx(1.0));
    CHECK_THROWS_AS(preprocess(Eigen::MatrixXd::Zero(3, 2), Variant::scaling), DegenerateRowError);
  }
  SUBCASE("projection") {
    const auto y = preprocess(x, Variant::projection);
    CHECK(y(0, 0) == doctest::Approx(0.6));
    CHECK(y(0, 1) == doctest::Approx(0.8));
    CHECK(y(1, 1) == doctest::Approx(1.0));
    Eigen::MatrixXd z = x;
    z.row(1).setZero();
    try {
      preprocess(z, Variant::projection);
      FAIL("expected DegenerateRowError");
    } catch (const DegenerateRowError& e) {
      CHECK(e.rows() == std::vector<std::size_t>{1});
    }
  }
  SUBCASE("sparse") {
    double s = 0.0;
    const auto y = preprocess(x, Variant::sparse, 0.25, 1e-6, &s);
    CHECK(s == 0.5);
    CHECK(y(0, 1) == 8.0);
    CHECK_THROWS_AS(preprocess(x, Variant::sparse), Error);
  }
  CHECK(preprocess(x, Variant::identity) == x);
}

TEST_CASE("pooled statistic matches the direct U statistic") {
  std::mt19937_64 rng(1);
  const KernelSpec kernels[] = {KernelSpec::gaussian(0.5),
                                KernelSpec::inverse_multiquadric(1.0, 0.5),
                                KernelSpec::energy(1.0)};
  for (const auto& k : kernels) {
    const Eigen::MatrixXd pooled = oracle::random_matrix(rng, 23, 2, 0.0, 1.0);
    const int n = 10;
    const PooledStatistic stat(k, pooled, n);
    CHECK(std::abs(stat.observed() - u_statistic(k, pooled.topRows(n), pooled.bottomRows(13))) <
          1e-12);
    for (int t = 0; t < 20; ++t) {
      std::vector<int> perm(23);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Eigen::MatrixXd x(n, 2), y(13, 2);
      for (int i = 0; i < n; ++i) x.row(i) = pooled.row(perm[std::size_t(i)]);
      for (int i = n; i < 23; ++i) y.row(i - n) = pooled.row(perm[std::size_t(i)]);
      CHECK(std::abs(stat(std::span<const int>(perm.data(), std::size_t(n))) -
                     oracle::u_statistic(k, x, y)) < 1e-12);
    }
  }
}

TEST_CASE("permutation null") {
  const auto k = KernelSpec::gaussian(0.5);
  SUBCASE("identical points give a flat null and p = 1") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(10, 2, 0.3);
    TestConfig c;
    c.permutations = 50;
    const auto r = two_sample_test(x, x, c);
    CHECK(r.statistic == 0.0);
    for (double u : r.null_statistics) CHECK(u == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK_FALSE(r.reject);
  }
  SUBCASE("reproducible and seed dependent") {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd pooled = oracle::random_matrix(rng, 30, 2);
    const auto a = permutation_null(pooled, 15, 15, k, 40, 9);
    CHECK(a == permutation_null(pooled, 15, 15, k, 40, 9));
    CHECK(a != permutation_null(pooled, 15, 15, k, 40, 10));
    // Prefix property: permutation b depends only on (seed, b).
    const auto shorter = permutation_null(pooled, 15, 15, k, 10, 9);
    CHECK(std::equal(shorter.begin(), shorter.end(), a.begin()));
  }
  SUBCASE("null statistics average to about zero") {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd pooled = oracle::random_matrix(rng, 60, 2, 0.0, 1.0);
    const auto null = permutation_null(pooled, 30, 30, k, 2000, 4);
    double mean = 0.0, sq = 0.0;
    for (double u : null) mean += u;
    mean /= double(null.size());
    for (double u : null) sq += (u - mean) * (u - mean);
    const double se = std::sqrt(sq / double(null.size() - 1) / double(null.size()));
    CHECK(std::abs(mean) < 4.0 * se);
  }
  CHECK_THROWS_AS(permutation_null(Eigen::MatrixXd::Zero(5, 2), 2, 2, k, 10, 0), DimensionError);
  CHECK_THROWS_AS(permutation_null(Eigen::MatrixXd::Zero(5, 2), 1, 4, k, 10, 0),
                  InsufficientSampleError);
}

TEST_CASE("p value") {
  const std::vector<double> null{0.1, 0.2, 0.3, 0.4};
  CHECK(p_value(0.25, null) == doctest::Approx(3.0 / 5.0));
  CHECK(p_value(0.5, null) == doctest::Approx(1.0 / 5.0));
  CHECK(p_value(0.1, null) == 1.0);
  CHECK(p_value(0.3, null) == doctest::Approx(3.0 / 5.0));
  CHECK_THROWS_AS(p_value(0.0, std::vector<double>{}), Error);
}

TEST_CASE("report fields and invariants") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = oracle::random_matrix(rng, 20, 2, 0.0, 0.5);
  const Eigen::MatrixXd y = oracle::random_matrix(rng, 30, 2, 0.2, 0.7);
  TestConfig c;
  c.permutations = 99;
  c.seed = 17;
  const auto r = two_sample_test(x, y, c);
  CHECK(r.n == 20);
  CHECK(r.m == 30);
  CHECK(r.rho == doctest::Approx(0.6));
  CHECK(r.scaled_statistic == doctest::Approx(50.0 * r.statistic));
  CHECK(r.null_statistics.size() == 99);
  CHECK(r.p_value >= 1.0 / 100.0);
  CHECK(r.p_value <= 1.0);
  CHECK(r.reject == (r.p_value <= c.alpha_level));
  CHECK(std::abs(r.statistic - u_statistic(c.kernel, x, y)) < 1e-12);
  CHECK(r.kernel == "gaussian(sigma=0.5)");

  // Same seed, same report; the null sample follows the documented stream.
  const auto again = two_sample_test(x, y, c);
  CHECK(again.null_statistics == r.null_statistics);
  Eigen::MatrixXd pooled(50, 2);
  pooled << x, y;
  CHECK(permutation_null(pooled, 20, 30, c.kernel, 99, derive_seed(17, {0x6e756c6c})) ==
        r.null_statistics);

  const auto j = nlohmann::json::parse(r.to_json());
  for (const char* key : {"statistic", "scaled_statistic", "p_value", "reject", "alpha", "n",
                          "m", "rho", "variant", "kernel", "B", "seed"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["statistic"].get<double>() == r.statistic);
  CHECK_FALSE(j.contains("scale_x"));
}

TEST_CASE("variant invariances are exact") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd x = oracle::random_matrix(rng, 25, 3, 0.05, 0.5);
    const Eigen::MatrixXd y = oracle::random_matrix(rng, 20, 3, 0.05, 0.5);
    TestConfig c;
    c.permutations = 30;
    c.seed = std::uint64_t(t);

    c.variant = Variant::scaling;
    const auto base = two_sample_test(x, y, c);
    const auto scaled = two_sample_test(2.5 * x, 0.3 * y, c);
    CHECK(std::abs(base.statistic - scaled.statistic) < 1e-12);
    CHECK(base.p_value == scaled.p_value);
    CHECK(*scaled.scale_x == doctest::Approx(2.5 * *base.scale_x));

    c.variant = Variant::projection;
    Eigen::VectorXd cx(25), cy(20);
    for (auto* v : {&cx, &cy})
      for (Eigen::Index i = 0; i < v->size(); ++i) (*v)(i) = 0.2 + double((i * 7 + t) % 11) / 5.0;
    const auto p0 = two_sample_test(x, y, c);
    const auto p1 = two_sample_test(cx.asDiagonal() * x, cy.asDiagonal() * y, c);
    CHECK(std::abs(p0.statistic - p1.statistic) < 1e-12);

    c.variant = Variant::identity;
    const Eigen::MatrixXd q = oracle::random_orthogonal(rng, 3);
    const auto i0 = two_sample_test(x, y, c);
    const auto i1 = two_sample_test(x * q, y * q, c);
    CHECK(std::abs(i0.statistic - i1.statistic) < 1e-12);

    c.variant = Variant::sparse;
    c.sparsity_a = 0.5;
    c.sparsity_b = 0.25;
    const auto s0 = two_sample_test(x * std::sqrt(0.5), y * 0.5, c);
    CHECK(std::abs(s0.statistic - i0.statistic) < 1e-12);
    CHECK(*s0.scale_y == 0.5);
  }
}

TEST_CASE("graph pipeline") {
  Engine rng = make_stream(6);
  const auto f = sbm_to_latent(oracle::two_block(0.0), {0.4, 0.6});
  const auto a = sample_rdpg(sample_latent(f, 100, rng).positions, 1.0, rng);
  const auto b = sample_rdpg(sample_latent(f, 120, rng).positions, 1.0, rng);
  TestConfig c;
  c.permutations = 50;
  const auto r = two_sample_test(a, b, c);
  CHECK(r.n == 100);
  CHECK(r.m == 120);
  CHECK(r.statistic == doctest::Approx(u_statistic(c.kernel, ase(a, 2).positions,
                                                   ase(b, 2).positions)));
  c.dimension = 101;
  CHECK_THROWS_AS(two_sample_test(a, b, c), DimensionError);
  c.dimension = 2;
  CHECK_THROWS_AS(two_sample_test(Graph(), b, c), InsufficientSampleError);
}
