#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kmp/types.hpp"

namespace kmp {

// Per-view feature matrices over a shared sample index.
//
// Samples are stored as ROWS: view i is an N x D_i matrix whose row p is the
// feature vector of sample p. (Column-sample layouts must be transposed before
// constructing a dataset.)
struct MultiviewDataset {
  std::vector<Matrix> views;
  std::optional<std::vector<std::string>> labels;
  std::vector<std::string> sample_ids;

  Index n_samples() const { return views.empty() ? 0 : views.front().rows(); }
  std::size_t n_views() const { return views.size(); }
  std::vector<Index> view_dims() const;

  // Throws DimensionError / ValidationError when an invariant is broken:
  // M >= 1, every D_i >= 1, equal row counts N >= 2, finite entries, and
  // label/id vectors of length N.
  void validate() const;

  // Rows `indices` of every view, with labels and ids carried along.
  MultiviewDataset subset(const std::vector<Index>& indices) const;
};

// Assigns ids "0", "1", ... when `sample_ids` is empty.
MultiviewDataset make_dataset(std::vector<Matrix> views,
                              std::optional<std::vector<std::string>> labels = std::nullopt);

// Delimited text I/O. Comma separated, one sample per line, optional header
// lines starting with '#'. Numbers are written with 17 significant digits so
// a write/read cycle reproduces every double exactly.
Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& matrix,
                  const std::string& header = {});
std::vector<std::string> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<std::string>& labels);

MultiviewDataset load_views(const std::vector<std::filesystem::path>& paths,
                            const std::optional<std::filesystem::path>& label_path = std::nullopt);

// Writes view i to `prefix_view{i+1}.csv` and labels (when present) to
// `prefix_labels.txt`. Returns the written view paths.
std::vector<std::filesystem::path> save_views(const MultiviewDataset& dataset,
                                              const std::string& prefix);

// Seeded random partition into (train, test). Requires fraction in (0, 1) and
// at least two samples on the training side.
std::pair<MultiviewDataset, MultiviewDataset> split(const MultiviewDataset& dataset,
                                                    double train_fraction, std::uint64_t seed);

}  // namespace kmp
