#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kmp/data.hpp"
#include "kmp/types.hpp"

namespace kmp {

enum class KernelKind { rbf, linear };

std::string_view kernel_kind_name(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

struct KernelParams {
  KernelKind kind = KernelKind::rbf;
  double sigma = 1.0;  // ignored for linear kernels
};

// Per-view Gram matrices K_i with the parameters that produced them.
struct KernelSet {
  std::vector<Matrix> grams;
  std::vector<KernelParams> params;

  std::size_t size() const { return grams.size(); }
};

// Simplex weights: alpha fuses the views, gamma is the auxiliary vector of the
// relaxed weight problem.
struct FusionWeights {
  Vector alpha;
  Vector gamma;

  static FusionWeights uniform(std::size_t views);
  // Throws ArgumentError unless both vectors are nonnegative and sum to one
  // within `tol`.
  void validate(double tol = 1e-12) const;
};

// exp(-||x_p - x_q||^2 / (2 sigma^2)), rows are samples. Unit diagonal,
// exactly symmetric.
Matrix rbf_gram(const Matrix& view, double sigma);

// Kernel rows between `queries` (T x D) and `train` (N x D): T x N.
Matrix rbf_cross(const Matrix& queries, const Matrix& train, double sigma);

// X X^T, used where explicit feature maps are needed.
Matrix linear_gram(const Matrix& view);
Matrix linear_cross(const Matrix& queries, const Matrix& train);

Matrix gram(const Matrix& view, const KernelParams& params);
Matrix cross_gram(const Matrix& queries, const Matrix& train, const KernelParams& params);

// Median of all N(N-1)/2 pairwise Euclidean distances between rows (mean of
// the two middle values when the count is even).
double median_sigma(const Matrix& view);

// Gram per view. Missing sigma overrides fall back to median_sigma scaled by
// `sigma_scale`.
KernelSet build_kernel_set(const MultiviewDataset& dataset,
                           const std::vector<std::optional<double>>& sigma_overrides = {},
                           double sigma_scale = 1.0);

// sum_i w_i M_i for w on the probability simplex (checked to 1e-9).
Matrix fuse(std::span<const Matrix> matrices, std::span<const double> weights);
Matrix fuse(std::span<const Matrix> matrices, const Vector& weights);

// Weighted sum without the simplex check; `fuse` is this plus validation.
Matrix fuse_unnormalized(std::span<const Matrix> matrices, std::span<const double> weights);

// (K + K^T) / 2 in place.
void symmetrize(Matrix& k);

// max |(sum_i alpha_i K_i)_{pq} - <phi(x_p), phi(x_q)>| where phi stacks the
// sqrt(alpha_i)-scaled explicit feature vectors of every view. Only linear
// kernels have explicit maps here; any other kind raises UnsupportedError.
double feature_map_identity_check(std::span<const Matrix> views, std::span<const KernelKind> kinds,
                                  const Vector& alpha);

// Smallest and largest eigenvalue of a symmetric matrix.
std::pair<double, double> eigen_range(const Matrix& symmetric);

}  // namespace kmp
