#include "kmp/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

#include "kmp/error.hpp"
#include "kmp/kernel.hpp"
#include "kmp/model.hpp"
#include "kmp/optimizer.hpp"
#include "kmp/random.hpp"
#include "kmp/simd.hpp"

namespace kmp {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix geometric_mean(std::span<const Matrix> kernels) {
  const double inv = 1.0 / static_cast<double>(kernels.size());
  Matrix log_sum = Matrix::Zero(kernels.front().rows(), kernels.front().cols());
  Matrix zero_mask = Matrix::Zero(log_sum.rows(), log_sum.cols());
  for (const auto& k : kernels) {
    for (Index c = 0; c < k.cols(); ++c)
      for (Index r = 0; r < k.rows(); ++r) {
        if (k(r, c) > 0.0) {
          log_sum(r, c) += std::log(k(r, c));
        } else {
          zero_mask(r, c) = 1.0;
        }
      }
  }
  Matrix out = (log_sum * inv).array().exp().matrix();
  for (Index c = 0; c < out.cols(); ++c)
    for (Index r = 0; r < out.rows(); ++r)
      if (zero_mask(r, c) != 0.0) out(r, c) = 0.0;
  return out;
}

Matrix fixed_fusion(std::span<const Matrix> kernels, FixedFusion fusion) {
  if (fusion == FixedFusion::arithmetic) return baseline_am(kernels);
  // Test-to-train rows may underflow to zero far from the data; allow them here.
  return geometric_mean(kernels);
}

const std::vector<std::string>& labels_of(const MultiviewDataset& ds, const char* which) {
  if (!ds.labels) throw ArgumentError(std::string(which) + " set has no labels");
  return *ds.labels;
}

FitConfig single_view_config(const FitConfig& config, std::size_t view) {
  FitConfig c = config;
  c.sigmas.clear();
  if (!config.sigmas.empty()) c.sigmas.push_back(config.sigmas[view]);
  return c;
}

}  // namespace

EvalResult knn_classify(const Matrix& train_embed, const std::vector<std::string>& train_labels,
                        const Matrix& test_embed, const std::vector<std::string>& test_labels, int k) {
  const auto start = Clock::now();
  const Index n = train_embed.rows();
  if (k < 1) throw ArgumentError("k must be positive");
  if (k > n) throw ArgumentError("k = " + std::to_string(k) + " exceeds training size " + std::to_string(n));
  if (static_cast<Index>(train_labels.size()) != n) throw DimensionError("training labels do not match embedding rows");
  if (static_cast<Index>(test_labels.size()) != test_embed.rows()) throw DimensionError("test labels do not match embedding rows");
  if (train_embed.cols() != test_embed.cols()) throw DimensionError("train and test embeddings differ in dimension");

  std::vector<std::string> classes = train_labels;
  classes.insert(classes.end(), test_labels.begin(), test_labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  auto class_index = [&](const std::string& l) {
    return static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), l) - classes.begin());
  };

  EvalResult out;
  out.classes = classes;
  out.confusion.assign(classes.size(), std::vector<long>(classes.size(), 0));

  const Matrix train_t = train_embed.transpose();
  const Matrix test_t = test_embed.transpose();
  const auto dim = static_cast<std::size_t>(train_t.rows());
  std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n));
  for (Index t = 0; t < test_t.cols(); ++t) {
    for (Index p = 0; p < n; ++p) {
      dist[static_cast<std::size_t>(p)] = {
          simd::squared_distance({test_t.col(t).data(), dim}, {train_t.col(p).data(), dim}), p};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::map<std::string, int> votes;
    for (int j = 0; j < k; ++j) ++votes[train_labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(j)].second)]];
    const std::string* winner = nullptr;
    int best = -1;
    for (const auto& [label, count] : votes) {
      if (count > best) {
        best = count;
        winner = &label;
      }
    }
    out.predictions.push_back(*winner);
    ++out.confusion[class_index(test_labels[static_cast<std::size_t>(t)])][class_index(*winner)];
  }

  long correct = 0;
  long total = 0;
  out.per_class.assign(classes.size(), 0.0);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const long row = std::accumulate(out.confusion[c].begin(), out.confusion[c].end(), 0L);
    correct += out.confusion[c][c];
    total += row;
    out.per_class[c] = row ? static_cast<double>(out.confusion[c][c]) / static_cast<double>(row) : 0.0;
  }
  out.accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  out.seconds = seconds_since(start);
  return out;
}

Matrix baseline_am(std::span<const Matrix> kernels) {
  if (kernels.empty()) throw ArgumentError("nothing to fuse");
  const std::vector<double> uniform(kernels.size(), 1.0 / static_cast<double>(kernels.size()));
  return fuse(kernels, uniform);
}

Matrix baseline_gm(std::span<const Matrix> kernels) {
  if (kernels.empty()) throw ArgumentError("nothing to fuse");
  for (const auto& k : kernels) {
    if (k.rows() != kernels.front().rows() || k.cols() != kernels.front().cols()) {
      throw DimensionError("fused matrices differ in shape");
    }
    if (!(k.minCoeff() > 0.0)) throw UnsupportedError("geometric-mean fusion needs strictly positive Gram entries");
  }
  if (kernels.size() == 1) return kernels.front();
  Matrix out = geometric_mean(kernels);
  symmetrize(out);
  return out;
}

MultiviewDataset make_synthetic(const SyntheticOptions& options) {
  if (options.classes < 2) throw ArgumentError("need at least 2 classes");
  if (options.per_class < 2) throw ArgumentError("need at least 2 samples per class");
  if (options.view_dims.empty()) throw ArgumentError("need at least one view");
  if (!options.noise_scales.empty() && options.noise_scales.size() != options.view_dims.size()) {
    throw ArgumentError("noise scales must match the view count");
  }
  if (!(options.noise >= 0.0)) throw ArgumentError("noise must be nonnegative");

  std::mt19937_64 rng(derive_seed(options.seed, Stream::synthetic));
  std::normal_distribution<double> normal(0.0, 1.0);

  const Index n = static_cast<Index>(options.classes) * options.per_class;
  Matrix centres(options.classes, 2);
  for (int c = 0; c < options.classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * c / options.classes;
    centres(c, 0) = std::cos(angle);
    centres(c, 1) = std::sin(angle);
  }

  std::vector<Matrix> views;
  for (std::size_t i = 0; i < options.view_dims.size(); ++i) {
    const int dim = options.view_dims[i];
    if (dim < 1) throw ArgumentError("view dimensions must be positive");
    Matrix map(2, dim);
    for (Index r = 0; r < 2; ++r)
      for (Index c = 0; c < dim; ++c) map(r, c) = normal(rng);
    const double sigma = options.noise * (options.noise_scales.empty() ? 1.0 : options.noise_scales[i]);
    Matrix view(n, dim);
    for (Index p = 0; p < n; ++p) {
      view.row(p) = centres.row(p / options.per_class) * map;
      if (sigma > 0.0)
        for (Index c = 0; c < dim; ++c) view(p, c) += sigma * normal(rng);
    }
    views.push_back(std::move(view));
  }
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (Index p = 0; p < n; ++p) labels.push_back(std::to_string(p / options.per_class));
  return make_dataset(std::move(views), std::move(labels));
}

MethodResult evaluate_kmp(const MultiviewDataset& train, const MultiviewDataset& test, const FitConfig& config,
                          int k) {
  const auto start = Clock::now();
  const FitResult fitted = fit(train, config);
  const Matrix train_y = embed_train(fitted.model);
  const Matrix test_y = embed_oos(fitted.model, test.views);
  const EvalResult eval = knn_classify(train_y, labels_of(train, "training"), test_y, labels_of(test, "test"), k);
  return {"kmp", config.dim, eval.accuracy, seconds_since(start), fitted.model.alpha};
}

MethodResult evaluate_fixed_fusion(const MultiviewDataset& train, const MultiviewDataset& test,
                                   const FitConfig& config, FixedFusion fusion, int k) {
  const auto start = Clock::now();
  const ViewStructures views = build_view_structures(train, config);
  const std::size_t m = train.n_views();
  const Vector uniform = Vector::Constant(static_cast<Index>(m), 1.0 / static_cast<double>(m));

  const Matrix kernel =
      fusion == FixedFusion::arithmetic ? baseline_am(views.kernels.grams) : baseline_gm(views.kernels.grams);
  std::vector<Matrix> laplacians;
  Vector degree = Vector::Zero(train.n_samples());
  for (std::size_t i = 0; i < m; ++i) {
    laplacians.push_back(views.graphs[i].laplacian);
    degree += uniform(static_cast<Index>(i)) * views.graphs[i].degree;
  }
  const EigenSolution sol = solve_projection(kernel, fuse(laplacians, uniform), degree, config.dim, config.ridge);

  std::vector<Matrix> rows;
  for (std::size_t i = 0; i < m; ++i) rows.push_back(cross_gram(test.views[i], train.views[i], views.kernels.params[i]));
  const Matrix train_y = kernel * sol.eigenvectors;
  const Matrix test_y = fixed_fusion(rows, fusion) * sol.eigenvectors;
  const EvalResult eval = knn_classify(train_y, labels_of(train, "training"), test_y, labels_of(test, "test"), k);
  return {fusion == FixedFusion::arithmetic ? "am" : "gm", config.dim, eval.accuracy, seconds_since(start), uniform};
}

std::vector<MethodResult> compare_methods(const MultiviewDataset& train, const MultiviewDataset& test,
                                          const FitConfig& config, int k) {
  std::vector<MethodResult> rows;
  rows.push_back(evaluate_kmp(train, test, config, k));
  rows.push_back(evaluate_fixed_fusion(train, test, config, FixedFusion::arithmetic, k));
  rows.push_back(evaluate_fixed_fusion(train, test, config, FixedFusion::geometric, k));
  for (std::size_t i = 0; i < train.n_views(); ++i) {
    MultiviewDataset train_i = train;
    MultiviewDataset test_i = test;
    train_i.views = {train.views[i]};
    test_i.views = {test.views[i]};
    MethodResult r = evaluate_kmp(train_i, test_i, single_view_config(config, i), k);
    r.method = "view" + std::to_string(i + 1);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_report(std::ostream& out, const std::vector<MethodResult>& rows) {
  out << "method,d,accuracy,seconds\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.dim << ',' << r.accuracy << ',' << r.seconds << '\n';
  }
}

void write_plot_coords(const std::filesystem::path& path, const Matrix& embedding,
                       const std::vector<std::string>& labels) {
  if (embedding.cols() < 2) throw ArgumentError("plot coordinates need at least 2 embedding dimensions");
  if (static_cast<Index>(labels.size()) != embedding.rows()) throw DimensionError("label count does not match embedding");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "#x,y,label\n";
  for (Index p = 0; p < embedding.rows(); ++p) {
    out << embedding(p, 0) << ',' << embedding(p, 1) << ',' << labels[static_cast<std::size_t>(p)] << '\n';
  }
}

std::vector<int> stratified_folds(const std::vector<std::string>& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("need at least 2 folds");
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t p = 0; p < labels.size(); ++p) members[labels[p]].push_back(p);
  std::mt19937_64 rng(derive_seed(seed, Stream::folds));
  std::vector<int> fold(labels.size(), 0);
  for (auto& [label, idx] : members) {
    if (static_cast<int>(idx.size()) < folds) {
      throw StratificationError("class '" + label + "' has " + std::to_string(idx.size()) + " members, fewer than " +
                                std::to_string(folds) + " folds");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t j = 0; j < idx.size(); ++j) fold[idx[j]] = static_cast<int>(j % static_cast<std::size_t>(folds));
  }
  return fold;
}

GridSearchResult grid_search(const MultiviewDataset& dataset, const ParameterGrid& grid, const FitConfig& base,
                             int folds, std::uint64_t seed, int k) {
  if (grid.r.empty() || grid.clusters.empty() || grid.max_atoms.empty() || grid.sigma_scale.empty()) {
    throw ArgumentError("every grid axis needs at least one value");
  }
  const auto& labels = labels_of(dataset, "grid search");
  const std::vector<int> fold_of = stratified_folds(labels, folds, seed);

  std::vector<std::pair<MultiviewDataset, MultiviewDataset>> splits;
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> train_idx;
    std::vector<Index> test_idx;
    for (std::size_t p = 0; p < fold_of.size(); ++p) (fold_of[p] == f ? test_idx : train_idx).push_back(static_cast<Index>(p));
    splits.emplace_back(dataset.subset(train_idx), dataset.subset(test_idx));
  }

  GridSearchResult result;
  result.best_mean = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (double r : grid.r)
    for (int g : grid.clusters)
      for (int atoms : grid.max_atoms)
        for (double scale : grid.sigma_scale) {
          GridRow row;
          row.config = base;
          row.config.r = r;
          row.config.clusters = g;
          row.config.max_atoms = atoms;
          row.config.sigma_scale = scale;
          try {
            for (const auto& [train, test] : splits) {
              row.fold_accuracy.push_back(evaluate_kmp(train, test, row.config, k).accuracy);
            }
            row.mean_accuracy = std::accumulate(row.fold_accuracy.begin(), row.fold_accuracy.end(), 0.0) /
                                static_cast<double>(row.fold_accuracy.size());
            if (row.mean_accuracy > result.best_mean) {
              result.best_mean = row.mean_accuracy;
              result.best = row.config;
              found = true;
            }
          } catch (const Error& e) {
            row.error = e.what();
            row.mean_accuracy = std::numeric_limits<double>::quiet_NaN();
          }
          result.table.push_back(std::move(row));
        }
  if (!found) throw NumericError("every grid point failed: " + result.table.front().error);
  return result;
}

}  // namespace kmp
