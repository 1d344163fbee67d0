#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "kmp/config.hpp"
#include "kmp/data.hpp"
#include "kmp/types.hpp"

namespace kmp {

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::string> classes;          // sorted
  std::vector<double> per_class;             // aligned with classes
  std::vector<std::vector<long>> confusion;  // [true][predicted], aligned with classes
  std::vector<std::string> predictions;
  double seconds = 0.0;
};

// Euclidean k-NN with majority vote. Equal distances resolve to the lower
// training index; vote ties resolve to the lexicographically smallest label.
EvalResult knn_classify(const Matrix& train_embed, const std::vector<std::string>& train_labels,
                        const Matrix& test_embed, const std::vector<std::string>& test_labels, int k = 1);

// (1/M) sum_i K_i
Matrix baseline_am(std::span<const Matrix> kernels);
// Entrywise (prod_i K_i)^(1/M); every entry must be positive.
Matrix baseline_gm(std::span<const Matrix> kernels);

struct SyntheticOptions {
  int classes = 3;
  int per_class = 100;
  std::vector<int> view_dims = {20, 20};
  double noise = 0.1;
  std::vector<double> noise_scales;  // per view multiplier on `noise`; empty means 1
  std::uint64_t seed = 0;
};

// Class centres on the unit circle in a 2-D latent space; view i is a fixed
// Gaussian linear map of the centre into D_i dimensions plus isotropic
// Gaussian noise. Samples are ordered class by class; labels are "0".."C-1".
MultiviewDataset make_synthetic(const SyntheticOptions& options);

struct MethodResult {
  std::string method;  // kmp, am, gm, view1, view2, ...
  int dim = 0;
  double accuracy = 0.0;
  double seconds = 0.0;
  Vector alpha;  // weights used by the method
};

enum class FixedFusion { arithmetic, geometric };

// Embeds with alpha frozen at uniform: the fused kernel is AM or GM of the
// per-view Grams, Laplacian and degree are the uniform fusions.
MethodResult evaluate_fixed_fusion(const MultiviewDataset& train, const MultiviewDataset& test,
                                   const FitConfig& config, FixedFusion fusion, int k);

MethodResult evaluate_kmp(const MultiviewDataset& train, const MultiviewDataset& test, const FitConfig& config,
                          int k);

// KMP, AM, GM and every single view on the same split.
std::vector<MethodResult> compare_methods(const MultiviewDataset& train, const MultiviewDataset& test,
                                          const FitConfig& config, int k);

// method,d,accuracy,seconds
void write_report(std::ostream& out, const std::vector<MethodResult>& rows);

// First two embedding coordinates plus the label, one sample per line.
void write_plot_coords(const std::filesystem::path& path, const Matrix& embedding,
                       const std::vector<std::string>& labels);

struct ParameterGrid {
  std::vector<double> r = {5.0};
  std::vector<int> clusters = {10};
  std::vector<int> max_atoms = {10};
  std::vector<double> sigma_scale = {1.0};
};

struct GridRow {
  FitConfig config;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  std::string error;  // non-empty when some fold failed; such rows are never selected
};

struct GridSearchResult {
  FitConfig best;
  double best_mean = 0.0;
  std::vector<GridRow> table;
};

// Stratified k-fold cross-validation over the grid (outer-to-inner order:
// r, clusters, max_atoms, sigma_scale). Highest mean accuracy wins; ties keep
// the earlier grid point.
GridSearchResult grid_search(const MultiviewDataset& dataset, const ParameterGrid& grid, const FitConfig& base,
                             int folds = 10, std::uint64_t seed = 0, int k = 1);

// Fold index per sample; throws StratificationError when a class has fewer
// members than folds.
std::vector<int> stratified_folds(const std::vector<std::string>& labels, int folds, std::uint64_t seed);

}  // namespace kmp
