#include "kmp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>

#include "kmp/error.hpp"
#include "kmp/random.hpp"

namespace kmp {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string coordinates(const std::filesystem::path& path, std::size_t row, std::size_t col) {
  std::ostringstream out;
  out << path.string() << " row " << row << " column " << col;
  return out.str();
}

}  // namespace

std::vector<Index> MultiviewDataset::view_dims() const {
  std::vector<Index> dims;
  dims.reserve(views.size());
  for (const auto& v : views) dims.push_back(v.cols());
  return dims;
}

void MultiviewDataset::validate() const {
  if (views.empty()) throw ValidationError("dataset has no views");
  const Index n = views.front().rows();
  if (n < 2) throw ValidationError("dataset needs at least 2 samples, got " + std::to_string(n));
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& v = views[i];
    if (v.cols() < 1) throw ValidationError("view " + std::to_string(i + 1) + " has no feature columns");
    if (v.rows() != n) {
      throw DimensionError("view " + std::to_string(i + 1) + " has " + std::to_string(v.rows()) +
                           " rows, view 1 has " + std::to_string(n));
    }
    for (Index p = 0; p < v.rows(); ++p) {
      for (Index c = 0; c < v.cols(); ++c) {
        if (!std::isfinite(v(p, c))) {
          throw ValidationError("view " + std::to_string(i + 1) + " has non-finite value at row " +
                                std::to_string(p + 1) + " column " + std::to_string(c + 1));
        }
      }
    }
  }
  if (labels && static_cast<Index>(labels->size()) != n) {
    throw DimensionError("label count " + std::to_string(labels->size()) + " does not match " +
                         std::to_string(n) + " samples");
  }
  if (static_cast<Index>(sample_ids.size()) != n) {
    throw DimensionError("sample id count does not match sample count");
  }
}

MultiviewDataset MultiviewDataset::subset(const std::vector<Index>& indices) const {
  MultiviewDataset out;
  out.views.reserve(views.size());
  for (const auto& v : views) {
    Matrix part(static_cast<Index>(indices.size()), v.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) part.row(static_cast<Index>(r)) = v.row(indices[r]);
    out.views.push_back(std::move(part));
  }
  if (labels) {
    std::vector<std::string> part;
    part.reserve(indices.size());
    for (Index idx : indices) part.push_back((*labels)[static_cast<std::size_t>(idx)]);
    out.labels = std::move(part);
  }
  out.sample_ids.reserve(indices.size());
  for (Index idx : indices) out.sample_ids.push_back(sample_ids[static_cast<std::size_t>(idx)]);
  return out;
}

MultiviewDataset make_dataset(std::vector<Matrix> views, std::optional<std::vector<std::string>> labels) {
  MultiviewDataset ds;
  ds.views = std::move(views);
  ds.labels = std::move(labels);
  const Index n = ds.n_samples();
  ds.sample_ids.reserve(static_cast<std::size_t>(n));
  for (Index p = 0; p < n; ++p) ds.sample_ids.push_back(std::to_string(p));
  ds.validate();
  return ds;
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = body.find(',', start);
      const std::string_view cell =
          trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError("unparseable cell '" + std::string(cell) + "' at " +
                         coordinates(path, line_no, col + 1));
      }
      if (!std::isfinite(value)) {
        throw ValidationError("non-finite value at " + coordinates(path, line_no, col + 1));
      }
      values.push_back(value);
      ++col;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = col;
    } else if (col != cols) {
      throw ParseError(path.string() + " row " + std::to_string(line_no) + " has " + std::to_string(col) +
                       " columns, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(path.string() + " contains no data rows");

  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = values[r * cols + c];
  return m;
}

void write_matrix(const std::filesystem::path& path, const Matrix& matrix, const std::string& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  if (!header.empty()) out << '#' << header << '\n';
  char buf[64];
  for (Index r = 0; r < matrix.rows(); ++r) {
    for (Index c = 0; c < matrix.cols(); ++c) {
      if (c) out << ',';
      const auto res = std::to_chars(buf, buf + sizeof(buf), matrix(r, c), std::chars_format::general, 17);
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    labels.emplace_back(body);
  }
  return labels;
}

void write_labels(const std::filesystem::path& path, const std::vector<std::string>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& l : labels) out << l << '\n';
}

MultiviewDataset load_views(const std::vector<std::filesystem::path>& paths,
                            const std::optional<std::filesystem::path>& label_path) {
  if (paths.empty()) throw ArgumentError("at least one view file is required");
  std::vector<Matrix> views;
  views.reserve(paths.size());
  for (const auto& p : paths) {
    views.push_back(read_matrix(p));
    if (views.back().rows() != views.front().rows()) {
      throw DimensionError("row count mismatch: " + paths.front().string() + " has " +
                           std::to_string(views.front().rows()) + " rows, " + p.string() + " has " +
                           std::to_string(views.back().rows()));
    }
  }
  std::optional<std::vector<std::string>> labels;
  if (label_path) {
    labels = read_labels(*label_path);
    if (static_cast<Index>(labels->size()) != views.front().rows()) {
      throw DimensionError("label file " + label_path->string() + " has " + std::to_string(labels->size()) +
                           " labels, " + paths.front().string() + " has " +
                           std::to_string(views.front().rows()) + " rows");
    }
  }
  return make_dataset(std::move(views), std::move(labels));
}

std::vector<std::filesystem::path> save_views(const MultiviewDataset& dataset, const std::string& prefix) {
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < dataset.views.size(); ++i) {
    std::filesystem::path p = prefix + "_view" + std::to_string(i + 1) + ".csv";
    write_matrix(p, dataset.views[i]);
    paths.push_back(std::move(p));
  }
  if (dataset.labels) write_labels(prefix + "_labels.txt", *dataset.labels);
  return paths;
}

std::pair<MultiviewDataset, MultiviewDataset> split(const MultiviewDataset& dataset, double train_fraction,
                                                    std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("train fraction must lie in (0, 1)");
  }
  const Index n = dataset.n_samples();
  const auto n_train = static_cast<Index>(std::llround(static_cast<double>(n) * train_fraction));
  if (n_train < 2) throw ArgumentError("training part would hold fewer than 2 samples");
  if (n_train >= n) throw ArgumentError("test part would be empty");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(derive_seed(seed, Stream::split));
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Index> train(order.begin(), order.begin() + n_train);
  std::vector<Index> test(order.begin() + n_train, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {dataset.subset(train), dataset.subset(test)};
}

}  // namespace kmp
