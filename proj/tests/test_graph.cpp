#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "kmp/error.hpp"
#include "kmp/graph.hpp"
#include "kmp/kernel.hpp"
#include "test_support.hpp"

using namespace kmp;

namespace {

Matrix two_blobs(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  Matrix x(40, 1);
  for (Index p = 0; p < 40; ++p) x(p, 0) = (p < 20 ? 0.0 : 100.0) + noise(rng);
  return x;
}

void check_graph_invariants(const SimilarityGraph& g) {
  const Index n = g.weights.rows();
  CHECK((g.weights - g.weights.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.weights.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.weights.minCoeff() >= 0.0);
  CHECK((g.laplacian * Vector::Ones(n)).cwiseAbs().maxCoeff() <= 1e-10);
  const auto [lo, hi] = eigen_range(g.laplacian);
  CHECK(lo >= -1e-8 * std::max(hi, 1e-300));
}

}  // namespace

TEST_CASE("gmm with one component is the sample mean") {
  const Matrix x = test::random_matrix(30, 4, 1);
  const auto c = fit_gmm(x, 1, 5);
  CHECK(std::all_of(c.labels.begin(), c.labels.end(), [](int l) { return l == 0; }));
  CHECK((c.means.row(0) - x.colwise().mean()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(c.mixing(0) == doctest::Approx(1.0));
}

TEST_CASE("gmm separates two distant blobs") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto c = fit_gmm(two_blobs(seed), 2, seed);
    for (Index p = 1; p < 20; ++p) CHECK(c.labels[static_cast<std::size_t>(p)] == c.labels[0]);
    for (Index p = 21; p < 40; ++p) CHECK(c.labels[static_cast<std::size_t>(p)] == c.labels[20]);
    CHECK(c.labels[0] != c.labels[20]);
    CHECK(c.mixing.sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("gmm with G = N gives every point its own cluster") {
  Matrix x(6, 2);
  for (Index p = 0; p < 6; ++p) x.row(p) << 10.0 * p, -7.0 * p * p;
  const auto c = fit_gmm(x, 6, 3);
  const std::set<int> distinct(c.labels.begin(), c.labels.end());
  CHECK(distinct.size() == 6);
}

TEST_CASE("gmm is deterministic and validates G") {
  const Matrix x = test::random_matrix(50, 3, 2);
  const auto a = fit_gmm(x, 4, 11);
  const auto b = fit_gmm(x, 4, 11);
  CHECK(a.labels == b.labels);
  CHECK((a.means.array() == b.means.array()).all());
  CHECK(a.log_likelihood == b.log_likelihood);
  CHECK_THROWS_AS(fit_gmm(x, 51, 1), ArgumentError);
  CHECK_THROWS_AS(fit_gmm(x, 0, 1), ArgumentError);
  CHECK(a.variances.minCoeff() >= 1e-6);
}

TEST_CASE("omp: exact single atom") {
  const Matrix dict = test::random_matrix(8, 12, 3);
  const SparseCode code = omp(dict.col(5), dict, 1);
  REQUIRE(code.support.size() == 1);
  CHECK(code.support[0] == 5);
  CHECK(code.coefficients[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(code.residual_norm <= 1e-12);
}

TEST_CASE("omp: zero target gives an empty code") {
  const Matrix dict = test::random_matrix(8, 12, 4);
  const SparseCode code = omp(Vector::Zero(8), dict, 3);
  CHECK(code.support.empty());
  CHECK(code.residual_norm == 0.0);
}

TEST_CASE("omp: ties go to the lowest column index") {
  Matrix dict(2, 3);
  dict << 0.0, 1.0, 2.0,  //
      1.0, 0.0, 0.0;
  Vector target(2);
  target << 3.0, 0.0;
  const SparseCode code = omp(target, dict, 1);
  REQUIRE(code.support.size() == 1);
  CHECK(code.support[0] == 1);
  CHECK(code.coefficients[0] == doctest::Approx(3.0));
}

TEST_CASE("omp: 3-sparse recovery over a 32x64 Gaussian dictionary") {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Matrix dict = test::random_matrix(32, 64, 1000 + seed);
    for (Index j = 0; j < 64; ++j) dict.col(j).normalize();
    std::mt19937_64 rng(seed);
    std::vector<Index> cols(64);
    std::iota(cols.begin(), cols.end(), Index{0});
    std::shuffle(cols.begin(), cols.end(), rng);
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    Vector beta = Vector::Zero(64);
    for (int s = 0; s < 3; ++s) beta(cols[static_cast<std::size_t>(s)]) = (rng() & 1 ? 1.0 : -1.0) * mag(rng);
    const Vector target = dict * beta;

    const SparseCode code = omp(target, dict, 3, 0.0);
    for (std::size_t h = 1; h < code.residual_history.size(); ++h)
      CHECK(code.residual_history[h] <= code.residual_history[h - 1] * (1.0 + 1e-12));
    CHECK(std::abs(code.residual_norm - (target - [&] {
                     Vector r = Vector::Zero(32);
                     for (std::size_t s = 0; s < code.support.size(); ++s) r += code.coefficients[s] * dict.col(code.support[s]);
                     return r;
                   }()).norm()) <= 1e-10);

    std::set<Index> want(cols.begin(), cols.begin() + 3);
    std::set<Index> got(code.support.begin(), code.support.end());
    if (want == got) {
      ++exact;
      for (std::size_t s = 0; s < code.support.size(); ++s)
        CHECK(std::abs(code.coefficients[s] - beta(code.support[s])) <= 1e-8);
    }
  }
  CHECK(exact >= 95);
}

TEST_CASE("omp: argument errors") {
  Matrix dict = test::random_matrix(4, 5, 1);
  CHECK_THROWS_AS(omp(Vector::Ones(4), dict, 6), ArgumentError);
  CHECK_THROWS_AS(omp(Vector::Ones(4), dict, 0), ArgumentError);
  CHECK_THROWS_AS(omp(Vector::Ones(3), dict, 2), DimensionError);
  dict.col(2).setZero();
  CHECK_THROWS_AS(omp(Vector::Ones(4), dict, 2), ArgumentError);
}

TEST_CASE("omp: unnormalised columns are un-scaled on output") {
  Matrix dict(3, 2);
  dict << 10.0, 0.0,  //
      0.0, 0.5,       //
      0.0, 0.0;
  Vector target(3);
  target << 20.0, 1.0, 0.0;
  const SparseCode code = omp(target, dict, 2);
  REQUIRE(code.support.size() == 2);
  CHECK(code.support[0] == 0);
  CHECK(code.coefficients[0] == doctest::Approx(2.0));
  CHECK(code.coefficients[1] == doctest::Approx(2.0));
  CHECK(code.residual_norm <= 1e-12);
}

TEST_CASE("l1 graph: collinear points {0,1,2}") {
  Matrix x(3, 1);
  x << 0.0, 1.0, 2.0;
  ClusterAssignment one;
  one.clusters = 1;
  one.labels = {0, 0, 0};
  const SimilarityGraph g = build_l1_graph(x, one, {2, 1e-7});
  // Hand solution: sample 0 is the zero vector (empty code, never an atom);
  // sample 1 = 0.5 * sample 2 and sample 2 = 2 * sample 1 (data atoms win the
  // tie against the identity atom). Symmetrised weight (0.5 + 2) / 2.
  Matrix expected = Matrix::Zero(3, 3);
  expected(1, 2) = expected(2, 1) = 1.25;
  CHECK((g.weights - expected).cwiseAbs().maxCoeff() <= 1e-12);
  check_graph_invariants(g);
}

TEST_CASE("l1 graph: a sample spanned by two neighbours weights both") {
  Matrix x(3, 2);
  x << 1.0, 0.0,  //
      1.0, 1.0,   //
      0.0, 1.0;
  ClusterAssignment one;
  one.clusters = 1;
  one.labels = {0, 0, 0};
  const Matrix raw = l1_coefficients(x, one, {2, 1e-7});
  CHECK(raw(1, 0) == doctest::Approx(1.0));
  CHECK(raw(1, 2) == doctest::Approx(1.0));
}

TEST_CASE("l1 graph: singleton cluster gives a zero row") {
  const Matrix x = test::random_matrix(6, 3, 8);
  ClusterAssignment c;
  c.clusters = 2;
  c.labels = {0, 0, 0, 0, 0, 1};
  const SimilarityGraph g = build_l1_graph(x, c, {3, 1e-7});
  CHECK(g.weights.row(5).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.weights.col(5).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.degree(5) == 0.0);
  check_graph_invariants(g);
}

TEST_CASE("l1 graph: cross-cluster weights are exactly zero and invariants hold") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = test::random_matrix(40, 5, 200 + seed);
    const auto clusters = fit_gmm(x, 3, seed);
    const GraphBuildOptions opt{4, 1e-7};
    const Matrix raw = l1_coefficients(x, clusters, opt);
    const SimilarityGraph g = build_l1_graph(x, clusters, opt);
    for (Index p = 0; p < 40; ++p)
      for (Index q = 0; q < 40; ++q)
        if (clusters.labels[static_cast<std::size_t>(p)] != clusters.labels[static_cast<std::size_t>(q)]) {
          CHECK(raw(p, q) == 0.0);
          CHECK(g.weights(p, q) == 0.0);
        }
    CHECK(g.weights.maxCoeff() > 0.0);
    check_graph_invariants(g);
  }
}

TEST_CASE("degree and laplacian") {
  SUBCASE("empty graph") {
    const SimilarityGraph g = degree_and_laplacian(Matrix::Zero(3, 3));
    CHECK(g.degree.isZero());
    CHECK(g.laplacian.isZero());
  }
  SUBCASE("two nodes") {
    Matrix w(2, 2);
    w << 0, 3, 3, 0;
    const SimilarityGraph g = degree_and_laplacian(w);
    CHECK(g.degree(0) == 3.0);
    CHECK(g.degree(1) == 3.0);
    Matrix l(2, 2);
    l << 3, -3, -3, 3;
    CHECK(g.laplacian == l);
  }
  SUBCASE("path graph on 3 nodes") {
    Matrix w(3, 3);
    w << 0, 1, 0, 1, 0, 1, 0, 1, 0;
    const SimilarityGraph g = degree_and_laplacian(w);
    // det(L - x I) = -x (x - 1)(x - 3)
    Eigen::SelfAdjointEigenSolver<Matrix> es(g.laplacian);
    CHECK(es.eigenvalues()(0) == doctest::Approx(0.0));
    CHECK(es.eigenvalues()(1) == doctest::Approx(1.0));
    CHECK(es.eigenvalues()(2) == doctest::Approx(3.0));
  }
  SUBCASE("asymmetric input") {
    Matrix w(2, 2);
    w << 0, 1, 2, 0;
    CHECK_THROWS_AS(degree_and_laplacian(w), ArgumentError);
  }
}
