#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <set>

#include "kmp/data.hpp"
#include "kmp/error.hpp"
#include "test_support.hpp"

using namespace kmp;

namespace {

std::filesystem::path write_text(const std::string& name, const std::string& body) {
  const auto path = test::temp_dir() / name;
  std::ofstream(path) << body;
  return path;
}

MultiviewDataset labelled(Index n, std::uint64_t seed) {
  std::vector<std::string> labels;
  for (Index p = 0; p < n; ++p) labels.push_back(p % 2 ? "b" : "a");
  return make_dataset({test::random_matrix(n, 3, seed), test::random_matrix(n, 7, seed + 1)}, labels);
}

}  // namespace

TEST_CASE("load_views keeps argument order and shapes") {
  const auto ds_in = labelled(5, 1);
  const auto paths = save_views(ds_in, (test::temp_dir() / "load_order").string());
  const auto ds = load_views(paths);
  CHECK(ds.n_samples() == 5);
  CHECK(ds.n_views() == 2);
  CHECK(ds.view_dims() == std::vector<Index>{3, 7});
  CHECK_FALSE(ds.labels.has_value());
}

TEST_CASE("round trip through text files is exact") {
  const auto ds_in = labelled(9, 2);
  const auto prefix = (test::temp_dir() / "roundtrip").string();
  const auto paths = save_views(ds_in, prefix);
  const auto ds = load_views(paths, std::filesystem::path(prefix + "_labels.txt"));
  for (std::size_t i = 0; i < ds.n_views(); ++i) CHECK((ds.views[i].array() == ds_in.views[i].array()).all());
  CHECK(*ds.labels == *ds_in.labels);
}

TEST_CASE("header lines and whitespace are tolerated") {
  const auto path = write_text("header.csv", "# a, b\n1, 2\n 3 ,4\r\n\n");
  const Matrix m = read_matrix(path);
  CHECK(m.rows() == 2);
  CHECK(m(1, 0) == 3.0);
  CHECK(m(1, 1) == 4.0);
}

TEST_CASE("row count mismatch names both files") {
  const auto a = write_text("five.csv", "1\n2\n3\n4\n5\n");
  const auto b = write_text("six.csv", "1\n2\n3\n4\n5\n6\n");
  try {
    load_views({a, b});
    FAIL("expected a dimension error");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("five.csv") != std::string::npos);
    CHECK(msg.find("six.csv") != std::string::npos);
  }
}

TEST_CASE("NaN cells are rejected at their coordinates") {
  const auto path = write_text("nan.csv", "1,2\n3,NaN\n");
  try {
    read_matrix(path);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("row 2 column 2") != std::string::npos);
  }
}

TEST_CASE("unparseable cell reports row and column") {
  const auto path = write_text("bad.csv", "1,2\n3,x4\n");
  try {
    read_matrix(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("row 2 column 2") != std::string::npos);
  }
  CHECK_THROWS_AS(read_matrix(write_text("ragged.csv", "1,2\n3\n")), ParseError);
  CHECK_THROWS_AS(read_matrix(test::temp_dir() / "missing.csv"), IoError);
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(make_dataset({Matrix::Zero(1, 2)}), ValidationError);
  CHECK_THROWS_AS(make_dataset({}), ValidationError);
  CHECK_THROWS_AS(make_dataset({Matrix::Zero(3, 2), Matrix::Zero(4, 2)}), DimensionError);
  CHECK_THROWS_AS(make_dataset({Matrix::Zero(3, 0)}), ValidationError);
  Matrix inf = Matrix::Zero(3, 2);
  inf(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(make_dataset({inf}), ValidationError);
  CHECK_THROWS_AS(make_dataset({Matrix::Zero(3, 2)}, std::vector<std::string>{"a"}), DimensionError);
}

TEST_CASE("split partitions the samples deterministically") {
  const auto ds = labelled(10, 3);
  const auto [train, test] = split(ds, 0.5, 7);
  CHECK(train.n_samples() == 5);
  CHECK(test.n_samples() == 5);

  std::set<std::string> ids(train.sample_ids.begin(), train.sample_ids.end());
  for (const auto& id : test.sample_ids) CHECK(ids.insert(id).second);
  CHECK(ids.size() == 10);

  // Labels and every view follow the same rows.
  for (Index r = 0; r < train.n_samples(); ++r) {
    const auto original = std::stoi(train.sample_ids[static_cast<std::size_t>(r)]);
    CHECK((*train.labels)[static_cast<std::size_t>(r)] == (*ds.labels)[static_cast<std::size_t>(original)]);
    for (std::size_t i = 0; i < ds.n_views(); ++i) CHECK(train.views[i].row(r) == ds.views[i].row(original));
  }

  const auto [train2, test2] = split(ds, 0.5, 7);
  CHECK(train2.sample_ids == train.sample_ids);
  CHECK(test2.sample_ids == test.sample_ids);
  const auto [train3, test3] = split(ds, 0.5, 8);
  CHECK(train3.sample_ids != train.sample_ids);
}

TEST_CASE("split rejects bad fractions") {
  const auto ds = labelled(10, 4);
  CHECK_THROWS_AS(split(ds, 1.0, 1), ArgumentError);
  CHECK_THROWS_AS(split(ds, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(split(ds, 0.1, 1), ArgumentError);  // one training sample
}
