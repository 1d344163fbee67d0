#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "kmp/error.hpp"
#include "kmp/eval.hpp"
#include "kmp/kernel.hpp"
#include "test_support.hpp"

using namespace kmp;

namespace {

std::vector<std::string> blob_labels(Index per_class) {
  std::vector<std::string> l;
  for (Index p = 0; p < 2 * per_class; ++p) l.push_back(p < per_class ? "a" : "b");
  return l;
}

Matrix two_blobs_2d(Index per_class, std::uint64_t seed) {
  Matrix x = test::random_matrix(2 * per_class, 2, seed, 0.3);
  x.bottomRows(per_class).array() += 10.0;
  return x;
}

}  // namespace

TEST_CASE("knn: self match is perfect") {
  const Matrix x = test::random_matrix(30, 4, 1);
  std::vector<std::string> labels;
  for (int p = 0; p < 30; ++p) labels.push_back(std::to_string(p % 4));
  const EvalResult r = knn_classify(x, labels, x, labels, 1);
  CHECK(r.accuracy == 1.0);
  CHECK(r.classes.size() == 4);
}

TEST_CASE("knn: single class") {
  const Matrix x = test::random_matrix(10, 2, 2);
  const std::vector<std::string> labels(10, "only");
  const EvalResult r = knn_classify(x, labels, test::random_matrix(5, 2, 3), std::vector<std::string>(5, "only"), 3);
  CHECK(r.accuracy == 1.0);
}

TEST_CASE("knn: separated blobs") {
  const EvalResult r = knn_classify(two_blobs_2d(20, 4), blob_labels(20), two_blobs_2d(20, 5), blob_labels(20), 3);
  CHECK(r.accuracy == 1.0);
  CHECK(r.per_class == std::vector<double>{1.0, 1.0});
  CHECK(r.confusion[0][0] == 20);
  CHECK(r.confusion[1][1] == 20);
}

TEST_CASE("knn: vote ties resolve to the smallest label") {
  Matrix train(2, 1);
  train << -1.0, 1.0;
  Matrix test(1, 1);
  test << 0.5;
  const EvalResult r = knn_classify(train, {"z", "a"}, test, {"a"}, 2);
  CHECK(r.predictions[0] == "a");
  const EvalResult r2 = knn_classify(train, {"a", "z"}, test, {"a"}, 2);
  CHECK(r2.predictions[0] == "a");
}

TEST_CASE("knn: confusion bookkeeping") {
  Matrix train(3, 1);
  train << 0.0, 10.0, 20.0;
  Matrix test(4, 1);
  test << 0.1, 10.1, 19.9, 9.0;
  const EvalResult r = knn_classify(train, {"a", "b", "c"}, test, {"a", "b", "c", "a"}, 1);
  CHECK(r.accuracy == doctest::Approx(0.75));
  long total = 0, diag = 0;
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    for (std::size_t j = 0; j < r.classes.size(); ++j) total += r.confusion[i][j];
    diag += r.confusion[i][i];
  }
  CHECK(r.accuracy == doctest::Approx(static_cast<double>(diag) / static_cast<double>(total)));
  CHECK(r.per_class[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(knn_classify(train, {"a", "b", "c"}, test, {"a", "b", "c", "a"}, 4), ArgumentError);
}

TEST_CASE("knn: invariant under a joint orthogonal transform") {
  const Matrix train = test::random_matrix(40, 3, 6);
  const Matrix probe = test::random_matrix(25, 3, 7);
  std::vector<std::string> tl, pl;
  for (int p = 0; p < 40; ++p) tl.push_back(train(p, 0) > 0 ? "pos" : "neg");
  for (int p = 0; p < 25; ++p) pl.push_back(probe(p, 1) > 0 ? "pos" : "neg");
  const Matrix q = Eigen::HouseholderQR<Matrix>(test::random_matrix(3, 3, 8)).householderQ();
  const EvalResult a = knn_classify(train, tl, probe, pl, 3);
  const EvalResult b = knn_classify(train * q, tl, probe * q, pl, 3);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.predictions == b.predictions);
}

TEST_CASE("arithmetic and geometric mean baselines") {
  const Matrix k1 = rbf_gram(test::random_matrix(5, 2, 1), 1.0);
  const Matrix k2 = rbf_gram(test::random_matrix(5, 2, 2), 1.0);
  const std::vector<Matrix> one = {k1};
  CHECK((baseline_am(one).array() == k1.array()).all());
  CHECK((baseline_gm(one).array() == k1.array()).all());
  const std::vector<Matrix> same = {k1, k1};
  CHECK((baseline_am(same) - k1).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((baseline_gm(same) - k1).cwiseAbs().maxCoeff() <= 1e-15);

  const std::vector<Matrix> pair = {k1, k2};
  CHECK((baseline_am(pair).array() == fuse(pair, std::vector<double>{0.5, 0.5}).array()).all());
  CHECK((baseline_am(pair) - 0.5 * (k1 + k2)).cwiseAbs().maxCoeff() <= 1e-15);

  Matrix a = Matrix::Constant(2, 2, 0.2);
  Matrix b = Matrix::Constant(2, 2, 0.8);
  const std::vector<Matrix> ab = {a, b};
  CHECK(baseline_gm(ab)(0, 1) == doctest::Approx(0.4).epsilon(1e-15));
  const Matrix gm = baseline_gm(pair);
  CHECK((gm - gm.transpose()).cwiseAbs().maxCoeff() == 0.0);

  b(0, 1) = 0.0;
  const std::vector<Matrix> bad = {a, b};
  CHECK_THROWS_AS(baseline_gm(bad), UnsupportedError);
}

TEST_CASE("synthetic data") {
  SyntheticOptions opt;
  opt.classes = 3;
  opt.per_class = 100;
  opt.view_dims = {5, 9};
  opt.noise = 0.2;
  opt.seed = 4;
  const MultiviewDataset ds = make_synthetic(opt);
  CHECK(ds.n_samples() == 300);
  CHECK(ds.view_dims() == std::vector<Index>{5, 9});
  std::map<std::string, int> counts;
  for (const auto& l : *ds.labels) ++counts[l];
  CHECK(counts.size() == 3);
  for (const auto& [l, c] : counts) CHECK(c == 100);

  const MultiviewDataset again = make_synthetic(opt);
  CHECK((again.views[1].array() == ds.views[1].array()).all());

  opt.noise = 0.0;
  const MultiviewDataset clean = make_synthetic(opt);
  for (Index p = 0; p < 300; ++p) CHECK(clean.views[0].row(p) == clean.views[0].row((p / 100) * 100));

  CHECK_THROWS_AS(make_synthetic({1, 10, {2}, 0.1, {}, 0}), ArgumentError);
  CHECK_THROWS_AS(make_synthetic({3, 1, {2}, 0.1, {}, 0}), ArgumentError);
}

TEST_CASE("small synthetic noise keeps raw 1-NN accurate") {
  SyntheticOptions opt;
  opt.classes = 3;
  opt.per_class = 60;
  opt.view_dims = {10, 10};
  opt.noise = 0.05 * std::sqrt(3.0);  // 5% of the centre spacing
  opt.seed = 8;
  const auto ds = make_synthetic(opt);
  const auto [train, test] = split(ds, 0.5, 8);
  const EvalResult r = knn_classify(train.views[0], *train.labels, test.views[0], *test.labels, 1);
  CHECK(r.accuracy >= 0.95);
}

TEST_CASE("stratified folds") {
  std::vector<std::string> labels;
  for (int p = 0; p < 23; ++p) labels.push_back(p % 3 == 0 ? "x" : "y");
  const auto folds = stratified_folds(labels, 4, 1);
  std::map<int, int> x_per_fold;
  for (std::size_t p = 0; p < labels.size(); ++p)
    if (labels[p] == "x") ++x_per_fold[folds[p]];
  for (const auto& [f, c] : x_per_fold) CHECK(c == 2);
  CHECK(folds == stratified_folds(labels, 4, 1));
  CHECK_THROWS_AS(stratified_folds(labels, 9, 1), StratificationError);
  CHECK_NOTHROW(stratified_folds({"a", "a", "b", "b"}, 2, 0));
}

TEST_CASE("grid search") {
  SyntheticOptions opt;
  opt.classes = 3;
  opt.per_class = 10;
  opt.view_dims = {4, 4};
  opt.noise = 0.3;
  opt.seed = 2;
  const auto ds = make_synthetic(opt);
  FitConfig base;
  base.dim = 3;
  base.max_atoms = 3;
  base.max_iters = 10;

  SUBCASE("single point grid") {
    ParameterGrid grid;
    grid.clusters = {3};
    grid.max_atoms = {3};
    const auto res = grid_search(ds, grid, base, 2, 5);
    REQUIRE(res.table.size() == 1);
    CHECK(res.best.clusters == 3);
    CHECK(res.best_mean == res.table[0].mean_accuracy);
    CHECK(res.table[0].fold_accuracy.size() == 2);
  }
  SUBCASE("a degenerate cluster count loses") {
    ParameterGrid grid;
    grid.clusters = {15, 3};  // 15 = every training sample alone: empty graph
    grid.max_atoms = {3};
    const auto res = grid_search(ds, grid, base, 2, 5);
    REQUIRE(res.table.size() == 2);
    CHECK(res.best.clusters == 3);
    CHECK_FALSE(res.table[0].error.empty());
  }
  SUBCASE("deterministic") {
    ParameterGrid grid;
    grid.r = {2.0, 5.0};
    grid.clusters = {3};
    grid.max_atoms = {3};
    const auto a = grid_search(ds, grid, base, 3, 9);
    const auto b = grid_search(ds, grid, base, 3, 9);
    for (std::size_t i = 0; i < a.table.size(); ++i) CHECK(a.table[i].fold_accuracy == b.table[i].fold_accuracy);
  }
  SUBCASE("too few members per class") { CHECK_THROWS_AS(grid_search(ds, ParameterGrid{}, base, 11, 1), StratificationError); }
}

TEST_CASE("grid search runs on a four-sample two-class set") {
  Matrix v(4, 2);
  v << 0.0, 0.1, 0.2, 0.0, 5.0, 5.1, 5.2, 4.9;
  const auto ds = make_dataset({v}, std::vector<std::string>{"a", "a", "b", "b"});
  FitConfig base;
  base.dim = 1;
  ParameterGrid grid;
  grid.clusters = {1};
  grid.max_atoms = {1};
  const auto res = grid_search(ds, grid, base, 2, 0);
  CHECK(res.table.size() == 1);
}

TEST_CASE("compare report and plot coordinates") {
  SyntheticOptions opt;
  opt.per_class = 20;
  opt.view_dims = {5, 5};
  opt.noise = 0.3;
  opt.noise_scales = {1.0, 3.0};
  opt.seed = 3;
  const auto ds = make_synthetic(opt);
  const auto [train, test] = split(ds, 0.5, 3);
  FitConfig config;
  config.dim = 3;
  config.clusters = 3;
  config.max_atoms = 4;
  const auto rows = compare_methods(train, test, config, 1);
  std::vector<std::string> methods;
  for (const auto& r : rows) methods.push_back(r.method);
  CHECK(methods == std::vector<std::string>{"kmp", "am", "gm", "view1", "view2"});
  for (const auto& r : rows) {
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
    CHECK(r.dim == 3);
  }
  std::ostringstream out;
  write_report(out, rows);
  CHECK(out.str().rfind("method,d,accuracy,seconds\nkmp,3,", 0) == 0);

  const auto path = test::temp_dir() / "plot.csv";
  write_plot_coords(path, test::random_matrix(4, 3, 1), {"a", "b", "a", "b"});
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 5);
  CHECK_THROWS_AS(write_plot_coords(path, test::random_matrix(4, 1, 1), {"a", "b", "a", "b"}), ArgumentError);
}
