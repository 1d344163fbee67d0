#include "kmp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kmp/error.hpp"
#include "kmp/simd.hpp"

namespace kmp {
namespace {

std::span<const double> column(const Matrix& m, Index c) {
  return {m.col(c).data(), static_cast<std::size_t>(m.rows())};
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ArgumentError("RBF bandwidth must be positive and finite, got " + std::to_string(sigma));
  }
}

void check_simplex(std::span<const double> weights, double tol, const char* what) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ArgumentError(std::string(what) + " has a negative or NaN entry");
    sum += w;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw ArgumentError(std::string(what) + " sums to " + std::to_string(sum) + ", not 1");
  }
}

}  // namespace

std::string_view kernel_kind_name(KernelKind kind) {
  return kind == KernelKind::rbf ? "rbf" : "linear";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "rbf") return KernelKind::rbf;
  if (name == "linear") return KernelKind::linear;
  throw ArgumentError("unknown kernel kind '" + std::string(name) + "'");
}

FusionWeights FusionWeights::uniform(std::size_t views) {
  FusionWeights w;
  w.alpha = Vector::Constant(static_cast<Index>(views), 1.0 / static_cast<double>(views));
  w.gamma = w.alpha;
  return w;
}

void FusionWeights::validate(double tol) const {
  check_simplex({alpha.data(), static_cast<std::size_t>(alpha.size())}, tol, "alpha");
  check_simplex({gamma.data(), static_cast<std::size_t>(gamma.size())}, tol, "gamma");
}

Matrix rbf_cross(const Matrix& queries, const Matrix& train, double sigma) {
  check_sigma(sigma);
  if (queries.cols() != train.cols()) {
    throw DimensionError("query dimension " + std::to_string(queries.cols()) + " does not match training dimension " +
                         std::to_string(train.cols()));
  }
  const Matrix qt = queries.transpose();
  const Matrix tt = train.transpose();
  const double scale = -1.0 / (2.0 * sigma * sigma);
  Matrix k(queries.rows(), train.rows());
  for (Index t = 0; t < queries.rows(); ++t) {
    for (Index p = 0; p < train.rows(); ++p) {
      k(t, p) = std::exp(scale * simd::squared_distance(column(qt, t), column(tt, p)));
    }
  }
  return k;
}

Matrix rbf_gram(const Matrix& view, double sigma) {
  check_sigma(sigma);
  const Matrix samples = view.transpose();
  const double scale = -1.0 / (2.0 * sigma * sigma);
  const Index n = view.rows();
  Matrix k(n, n);
  for (Index p = 0; p < n; ++p) {
    k(p, p) = 1.0;
    for (Index q = p + 1; q < n; ++q) {
      const double v = std::exp(scale * simd::squared_distance(column(samples, p), column(samples, q)));
      k(p, q) = v;
      k(q, p) = v;
    }
  }
  symmetrize(k);
  return k;
}

Matrix linear_gram(const Matrix& view) {
  Matrix k = view * view.transpose();
  symmetrize(k);
  return k;
}

Matrix linear_cross(const Matrix& queries, const Matrix& train) {
  if (queries.cols() != train.cols()) throw DimensionError("query and training dimensions differ");
  return queries * train.transpose();
}

Matrix gram(const Matrix& view, const KernelParams& params) {
  return params.kind == KernelKind::rbf ? rbf_gram(view, params.sigma) : linear_gram(view);
}

Matrix cross_gram(const Matrix& queries, const Matrix& train, const KernelParams& params) {
  return params.kind == KernelKind::rbf ? rbf_cross(queries, train, params.sigma) : linear_cross(queries, train);
}

double median_sigma(const Matrix& view) {
  const Index n = view.rows();
  if (n < 2) throw DegenerateDataError("median distance needs at least 2 samples");
  const Matrix samples = view.transpose();
  std::vector<double> distances;
  distances.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index p = 0; p < n; ++p)
    for (Index q = p + 1; q < n; ++q)
      distances.push_back(std::sqrt(simd::squared_distance(column(samples, p), column(samples, q))));

  const std::size_t mid = distances.size() / 2;
  std::nth_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(mid), distances.end());
  double median = distances[mid];
  if (distances.size() % 2 == 0) {
    const double lower = *std::max_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  if (!(median > 0.0)) {
    // Median can be zero with many duplicate rows; fall back to the mean of
    // the nonzero distances before declaring the data degenerate.
    double sum = 0.0;
    std::size_t count = 0;
    for (double d : distances)
      if (d > 0.0) sum += d, ++count;
    if (count == 0) throw DegenerateDataError("all rows are identical; no bandwidth can be derived");
    median = sum / static_cast<double>(count);
  }
  return median;
}

KernelSet build_kernel_set(const MultiviewDataset& dataset, const std::vector<std::optional<double>>& sigma_overrides,
                           double sigma_scale) {
  if (!sigma_overrides.empty() && sigma_overrides.size() != dataset.n_views()) {
    throw ArgumentError("expected " + std::to_string(dataset.n_views()) + " sigma overrides, got " +
                        std::to_string(sigma_overrides.size()));
  }
  if (!(sigma_scale > 0.0)) throw ArgumentError("sigma scale must be positive");
  KernelSet set;
  for (std::size_t i = 0; i < dataset.n_views(); ++i) {
    KernelParams params;
    params.kind = KernelKind::rbf;
    if (!sigma_overrides.empty() && sigma_overrides[i]) {
      params.sigma = *sigma_overrides[i];
    } else {
      params.sigma = median_sigma(dataset.views[i]) * sigma_scale;
    }
    set.grams.push_back(rbf_gram(dataset.views[i], params.sigma));
    set.params.push_back(params);
  }
  return set;
}

Matrix fuse_unnormalized(std::span<const Matrix> matrices, std::span<const double> weights) {
  if (matrices.empty()) throw ArgumentError("nothing to fuse");
  if (matrices.size() != weights.size()) {
    throw DimensionError("got " + std::to_string(matrices.size()) + " matrices but " +
                         std::to_string(weights.size()) + " weights");
  }
  const Index rows = matrices.front().rows();
  const Index cols = matrices.front().cols();
  for (const auto& m : matrices) {
    if (m.rows() != rows || m.cols() != cols) throw DimensionError("fused matrices differ in shape");
  }
  Matrix out = Matrix::Zero(rows, cols);
  const auto count = static_cast<std::size_t>(rows * cols);
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    if (weights[i] == 0.0) continue;
    simd::axpy(weights[i], {matrices[i].data(), count}, {out.data(), count});
  }
  return out;
}

Matrix fuse(std::span<const Matrix> matrices, std::span<const double> weights) {
  check_simplex(weights, 1e-9, "fusion weights");
  return fuse_unnormalized(matrices, weights);
}

Matrix fuse(std::span<const Matrix> matrices, const Vector& weights) {
  return fuse(matrices, std::span<const double>(weights.data(), static_cast<std::size_t>(weights.size())));
}

void symmetrize(Matrix& k) {
  const Index n = k.rows();
  for (Index p = 0; p < n; ++p) {
    for (Index q = p + 1; q < n; ++q) {
      const double avg = 0.5 * (k(p, q) + k(q, p));
      k(p, q) = avg;
      k(q, p) = avg;
    }
  }
}

double feature_map_identity_check(std::span<const Matrix> views, std::span<const KernelKind> kinds,
                                  const Vector& alpha) {
  if (views.size() != kinds.size() || static_cast<Index>(views.size()) != alpha.size()) {
    throw DimensionError("views, kernel kinds and weights must have equal counts");
  }
  for (KernelKind kind : kinds) {
    if (kind != KernelKind::linear) {
      throw UnsupportedError("feature map identity check needs explicit feature maps (linear kernels only)");
    }
  }
  check_simplex({alpha.data(), static_cast<std::size_t>(alpha.size())}, 1e-9, "alpha");

  std::vector<Matrix> grams;
  Index total_dim = 0;
  for (const auto& v : views) {
    grams.push_back(linear_gram(v));
    total_dim += v.cols();
  }
  const Matrix fused = fuse(grams, alpha);

  // phi(x) = [sqrt(a_1) x^1, ..., sqrt(a_M) x^M]
  const Index n = views.front().rows();
  Matrix phi(n, total_dim);
  Index offset = 0;
  for (std::size_t i = 0; i < views.size(); ++i) {
    phi.middleCols(offset, views[i].cols()) = std::sqrt(alpha(static_cast<Index>(i))) * views[i];
    offset += views[i].cols();
  }
  const Matrix inner = phi * phi.transpose();
  return (fused - inner).cwiseAbs().maxCoeff();
}

std::pair<double, double> eigen_range(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  const Vector& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

}  // namespace kmp
