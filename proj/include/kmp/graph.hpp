#pragma once

#include <cstdint>
#include <vector>

#include "kmp/types.hpp"

namespace kmp {

// Diagonal-covariance Gaussian mixture fitted to one view.
struct ClusterAssignment {
  std::vector<int> labels;  // argmax responsibility per sample, in [0, G)
  int clusters = 0;         // G
  Matrix means;             // G x D
  Matrix variances;         // G x D, floored
  Vector mixing;            // G, on the simplex
  double log_likelihood = 0.0;
  int iterations = 0;
};

struct GmmOptions {
  int max_iters = 100;
  double tol = 1e-6;             // absolute change in total log-likelihood
  double variance_floor = 1e-6;
};

// EM with k-means++ seeding. Deterministic for a given seed.
ClusterAssignment fit_gmm(const Matrix& view, int clusters, std::uint64_t seed, const GmmOptions& options = {});

// Result of orthogonal matching pursuit. Coefficients refer to the caller's
// (unnormalised) dictionary columns.
struct SparseCode {
  std::vector<Index> support;
  std::vector<double> coefficients;
  double residual_norm = 0.0;
  // Residual norm after each selected atom; entry 0 is ||target||.
  std::vector<double> residual_history;
};

// Greedy OMP: pick the unit-normalised column with the largest |correlation|
// with the residual (lowest index on ties), refit least squares on the
// support, and stop at `max_atoms` atoms or once the residual norm drops to
// `residual_tol`.
SparseCode omp(const Vector& target, const Matrix& dictionary, int max_atoms, double residual_tol = 1e-7);

// W symmetric nonnegative with zero diagonal, degree D_pp = sum_q W_pq (kept
// as a vector), L = D - W.
struct SimilarityGraph {
  Matrix weights;
  Vector degree;
  Matrix laplacian;

  Matrix degree_matrix() const { return degree.asDiagonal(); }
};

struct GraphBuildOptions {
  int max_atoms = 10;
  double residual_tol = 1e-7;
};

// l1-graph of one view: every sample is sparse-coded over the other members
// of its cluster augmented with the D x D identity; |coefficients| on data
// atoms fill its row of W, which is then symmetrised.
SimilarityGraph build_l1_graph(const Matrix& view, const ClusterAssignment& clusters,
                               const GraphBuildOptions& options);

// Raw (unsymmetrised) coefficient matrix, exposed for tests of the cluster
// restriction.
Matrix l1_coefficients(const Matrix& view, const ClusterAssignment& clusters, const GraphBuildOptions& options);

// Degree vector and Laplacian of a symmetric weight matrix.
SimilarityGraph degree_and_laplacian(const Matrix& weights);

}  // namespace kmp
