#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "kmp/config.hpp"
#include "kmp/data.hpp"
#include "kmp/eig.hpp"
#include "kmp/graph.hpp"
#include "kmp/kernel.hpp"
#include "kmp/model.hpp"

namespace kmp {

// Per-view traces under a fixed projection:
//   laplacian(i) = tr(P^T K_i L_i K_i P),  degree(i) = tr(P^T K_i D_i K_i P).
struct TraceTable {
  Vector laplacian;
  Vector degree;

  std::size_t size() const { return static_cast<std::size_t>(laplacian.size()); }
};

TraceTable compute_trace_table(const Matrix& projection, std::span<const Matrix> grams,
                               std::span<const SimilarityGraph> graphs);

// tr(P^T K_i L_k K_j P); with `use_degree` the Laplacian is replaced by the
// degree matrix of view k.
double cross_trace(const Matrix& projection, std::span<const Matrix> grams, std::span<const SimilarityGraph> graphs,
                   std::size_t i, std::size_t j, std::size_t k, bool use_degree = false);

// tr(P^T K L K P) / tr(P^T K D K P) with K, L, D fused under alpha.
double objective_f1(const Matrix& projection, std::span<const Matrix> grams, std::span<const SimilarityGraph> graphs,
                    const Vector& alpha);

// sum_i w_i L_iii / D_iii.
double objective_f3(const TraceTable& table, const Vector& weights);

// Closed-form minimiser of sum_i gamma_i^r L_iii / D_iii over the simplex:
//   gamma_i ∝ (D_iii / L_iii)^(1/(r-1)).
Vector update_gamma(const TraceTable& table, double r);

// alpha_i ∝ (gamma_i^r / L_iii)^(1/3), so alpha_i^3 L_iii ∝ gamma_i^r.
Vector update_alpha(const Vector& gamma, const TraceTable& table, double r);

struct IterationRecord {
  int iteration = 0;
  double f1 = 0.0;         // after the P-update
  double f1_before = 0.0;  // previous P under the current alpha (NaN on the first iteration)
  double f3 = 0.0;         // objective_f3 under the gamma computed from this P
  Vector alpha;            // weights used for this P-update
  Vector gamma;
};

struct FitReport {
  std::vector<IterationRecord> history;
  bool converged = false;
  int iterations_used = 0;
  int best_iteration = 0;
};

// Header iter,F1,F3,alpha_1,...,alpha_M then one line per iteration.
void write_fit_log(std::ostream& out, const FitReport& report);

// Per-view precomputation shared by fit and the baselines.
struct ViewStructures {
  KernelSet kernels;
  std::vector<SimilarityGraph> graphs;
};

ViewStructures build_view_structures(const MultiviewDataset& dataset, const FitConfig& config);

struct AlternationResult {
  Matrix projection;
  Vector alpha;
  Vector eigenvalues;
  FitReport report;
};

// Alternate P (generalised eigenproblem) and alpha (gamma -> alpha closed
// forms) from uniform alpha. Returns the iterate with the smallest F1.
AlternationResult alternate(std::span<const Matrix> grams, std::span<const SimilarityGraph> graphs,
                            const FitConfig& config);

// P for fixed fused matrices: the d smallest pairs of K L K p = lambda K D K p
// with p restricted to the span of kernel eigenvectors whose eigenvalue
// exceeds rank_tol times the largest. Residuals and shift refer to the
// reduced pencil. Throws DegenerateDataError when that span is thinner than d.
EigenSolution solve_projection(const Matrix& kernel, const Matrix& laplacian, const Vector& degree, int dim,
                               double ridge, double rank_tol = 1e-8);

struct FitResult {
  ProjectionModel model;
  FitReport report;
};

FitResult fit(const MultiviewDataset& dataset, const FitConfig& config);

}  // namespace kmp
