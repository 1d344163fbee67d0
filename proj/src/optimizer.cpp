#include "kmp/optimizer.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "kmp/eig.hpp"
#include "kmp/error.hpp"
#include "kmp/random.hpp"

namespace kmp {
namespace {

void check_views(std::span<const Matrix> grams, std::span<const SimilarityGraph> graphs) {
  if (grams.empty() || grams.size() != graphs.size()) {
    throw DimensionError("need one graph per kernel and at least one view");
  }
}

std::vector<Matrix> laplacians_of(std::span<const SimilarityGraph> graphs) {
  std::vector<Matrix> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(g.laplacian);
  return out;
}

Vector fused_degree(std::span<const SimilarityGraph> graphs, const Vector& alpha) {
  Vector d = Vector::Zero(graphs.front().degree.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) d += alpha(static_cast<Index>(i)) * graphs[i].degree;
  return d;
}

void check_table(const TraceTable& table) {
  for (Index i = 0; i < table.laplacian.size(); ++i) {
    if (!(table.degree(i) > 0.0)) {
      throw DegenerateTraceError("degree trace of view " + std::to_string(i + 1) + " is not positive");
    }
    if (!(table.laplacian(i) > 1e-14)) {
      throw DegenerateTraceError("Laplacian trace of view " + std::to_string(i + 1) +
                                 " vanishes; the weight update is undefined");
    }
  }
}

Vector normalise_logs(const Vector& logs) {
  const double top = logs.maxCoeff();
  Vector w = (logs.array() - top).exp().matrix();
  return w / w.sum();
}

}  // namespace

void FitConfig::validate() const {
  if (dim < 1) throw ArgumentError("embedding dimension must be positive");
  if (!(r > 1.0) || !std::isfinite(r)) throw ArgumentError("r must exceed 1");
  if (clusters < 1) throw ArgumentError("cluster count must be positive");
  if (max_atoms < 1) throw ArgumentError("max_atoms must be positive");
  if (!(residual_tol >= 0.0)) throw ArgumentError("residual tolerance must be nonnegative");
  if (!(sigma_scale > 0.0)) throw ArgumentError("sigma scale must be positive");
  for (const auto& s : sigmas)
    if (s && !(*s > 0.0)) throw ArgumentError("sigma overrides must be positive");
  if (!(ridge >= 0.0)) throw ArgumentError("ridge must be nonnegative");
  if (max_iters < 1) throw ArgumentError("max_iters must be positive");
  if (!(tol >= 0.0)) throw ArgumentError("tol must be nonnegative");
}

double cross_trace(const Matrix& projection, std::span<const Matrix> grams, std::span<const SimilarityGraph> graphs,
                   std::size_t i, std::size_t j, std::size_t k, bool use_degree) {
  const Matrix left = grams[i] * projection;
  const Matrix right = grams[j] * projection;
  if (use_degree) return (left.transpose() * graphs[k].degree.asDiagonal() * right).trace();
  return (left.transpose() * graphs[k].laplacian * right).trace();
}

TraceTable compute_trace_table(const Matrix& projection, std::span<const Matrix> grams,
                               std::span<const SimilarityGraph> graphs) {
  check_views(grams, graphs);
  TraceTable table;
  const auto m = static_cast<Index>(grams.size());
  table.laplacian.resize(m);
  table.degree.resize(m);
  for (Index i = 0; i < m; ++i) {
    const Matrix kp = grams[static_cast<std::size_t>(i)] * projection;
    const auto& g = graphs[static_cast<std::size_t>(i)];
    table.laplacian(i) = (kp.transpose() * g.laplacian * kp).trace();
    table.degree(i) = (kp.transpose() * g.degree.asDiagonal() * kp).trace();
  }
  return table;
}

double objective_f1(const Matrix& projection, std::span<const Matrix> grams, std::span<const SimilarityGraph> graphs,
                    const Vector& alpha) {
  check_views(grams, graphs);
  if (alpha.size() != static_cast<Index>(grams.size())) throw DimensionError("alpha length does not match view count");
  const Matrix kernel = fuse(grams, alpha);
  const Matrix laplacian = fuse(laplacians_of(graphs), alpha);
  const Vector degree = fused_degree(graphs, alpha);
  const Matrix kp = kernel * projection;
  const double numerator = (kp.transpose() * laplacian * kp).trace();
  const double denominator = (kp.transpose() * degree.asDiagonal() * kp).trace();
  if (!(denominator > 1e-14)) throw DegenerateObjectiveError("tr(P^T K D K P) vanishes");
  return numerator / denominator;
}

double objective_f3(const TraceTable& table, const Vector& weights) {
  if (weights.size() != table.laplacian.size()) throw DimensionError("weight length does not match trace table");
  double f3 = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    if (!(table.degree(i) > 0.0)) {
      throw DegenerateObjectiveError("degree trace of view " + std::to_string(i + 1) + " is not positive");
    }
    f3 += weights(i) * table.laplacian(i) / table.degree(i);
  }
  return f3;
}

Vector update_gamma(const TraceTable& table, double r) {
  if (!(r > 1.0)) throw ArgumentError("r must exceed 1");
  if (table.size() == 1) return Vector::Ones(1);
  check_table(table);
  const Vector logs = (table.degree.array().log() - table.laplacian.array().log()) / (r - 1.0);
  return normalise_logs(logs);
}

Vector update_alpha(const Vector& gamma, const TraceTable& table, double r) {
  if (!(r > 1.0)) throw ArgumentError("r must exceed 1");
  if (gamma.size() != table.laplacian.size()) throw DimensionError("gamma length does not match trace table");
  if (table.size() == 1) return Vector::Ones(1);
  check_table(table);
  const Vector logs = (r * gamma.array().log() - table.laplacian.array().log()) / 3.0;
  return normalise_logs(logs);
}

void write_fit_log(std::ostream& out, const FitReport& report) {
  const auto old_precision = out.precision(17);
  const Index m = report.history.empty() ? 0 : report.history.front().alpha.size();
  out << "iter,F1,F3";
  for (Index i = 0; i < m; ++i) out << ",alpha_" << i + 1;
  out << '\n';
  for (const auto& rec : report.history) {
    out << rec.iteration << ',' << rec.f1 << ',' << rec.f3;
    for (Index i = 0; i < rec.alpha.size(); ++i) out << ',' << rec.alpha(i);
    out << '\n';
  }
  out.precision(old_precision);
}

ViewStructures build_view_structures(const MultiviewDataset& dataset, const FitConfig& config) {
  dataset.validate();
  config.validate();
  if (config.clusters > dataset.n_samples()) {
    throw ArgumentError("cluster count " + std::to_string(config.clusters) + " exceeds sample count " +
                        std::to_string(dataset.n_samples()));
  }
  ViewStructures out;
  out.kernels = build_kernel_set(dataset, config.sigmas, config.sigma_scale);
  // One GMM stream shared by every view, so identical views get identical graphs.
  const std::uint64_t gmm_seed = derive_seed(config.seed, Stream::gmm);
  const GraphBuildOptions graph_options{config.max_atoms, config.residual_tol};
  for (const auto& view : dataset.views) {
    const ClusterAssignment clusters = fit_gmm(view, config.clusters, gmm_seed);
    out.graphs.push_back(build_l1_graph(view, clusters, graph_options));
  }
  return out;
}

EigenSolution solve_projection(const Matrix& kernel, const Matrix& laplacian, const Vector& degree, int dim,
                               double ridge, double rank_tol) {
  // Restrict p to the numerical range of K: null-space components leave K p
  // unchanged but would otherwise fill the bottom of the spectrum with 0/0
  // directions. With K = U S U^T and p = U_r S_r^{-1} z the pencil becomes
  // (U_r^T L U_r, U_r^T D U_r) in z.
  Eigen::SelfAdjointEigenSolver<Matrix> es(kernel);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition of the fused kernel failed");
  const Vector& s = es.eigenvalues();
  const double top = s.cwiseAbs().maxCoeff();
  Index first = 0;
  while (first < s.size() && !(s(first) > rank_tol * top)) ++first;
  const Index rank = s.size() - first;
  if (rank < dim) {
    throw DegenerateDataError("fused kernel has numerical rank " + std::to_string(rank) +
                              ", below the embedding dimension " + std::to_string(dim));
  }
  const Matrix u = es.eigenvectors().rightCols(rank);
  Matrix a = u.transpose() * laplacian * u;
  Matrix b = u.transpose() * degree.asDiagonal() * u;
  symmetrize(a);
  symmetrize(b);
  EigenSolution sol = solve_gep(a, b, dim, ridge);
  sol.eigenvectors = u * (s.tail(rank).cwiseInverse().asDiagonal() * sol.eigenvectors);
  // Re-sign in the original coordinates.
  for (Index j = 0; j < sol.eigenvectors.cols(); ++j) {
    Index at = 0;
    sol.eigenvectors.col(j).cwiseAbs().maxCoeff(&at);
    if (sol.eigenvectors(at, j) < 0.0) sol.eigenvectors.col(j) *= -1.0;
  }
  return sol;
}

AlternationResult alternate(std::span<const Matrix> grams, std::span<const SimilarityGraph> graphs,
                            const FitConfig& config) {
  check_views(grams, graphs);
  config.validate();
  const std::size_t m = grams.size();
  const std::vector<Matrix> laplacians = laplacians_of(graphs);

  AlternationResult best;
  double best_f1 = std::numeric_limits<double>::infinity();
  FitReport report;

  Vector alpha = Vector::Constant(static_cast<Index>(m), 1.0 / static_cast<double>(m));
  Matrix previous_projection;
  double previous_f1 = std::numeric_limits<double>::quiet_NaN();

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    IterationRecord rec;
    rec.iteration = iter;
    rec.alpha = alpha;
    rec.f1_before = previous_projection.size() ? objective_f1(previous_projection, grams, graphs, alpha)
                                               : std::numeric_limits<double>::quiet_NaN();

    const Matrix kernel = fuse(grams, alpha);
    const EigenSolution sol =
        solve_projection(kernel, fuse(laplacians, alpha), fused_degree(graphs, alpha), config.dim, config.ridge);
    const Matrix& projection = sol.eigenvectors;

    rec.f1 = objective_f1(projection, grams, graphs, alpha);
    if (!std::isfinite(rec.f1)) throw NumericError("F1 is not finite at iteration " + std::to_string(iter));

    const TraceTable table = compute_trace_table(projection, grams, graphs);
    rec.gamma = update_gamma(table, config.r);
    rec.f3 = objective_f3(table, rec.gamma);
    const Vector next_alpha = update_alpha(rec.gamma, table, config.r);

    if (rec.f1 < best_f1) {
      best_f1 = rec.f1;
      best.projection = projection;
      best.alpha = alpha;
      best.eigenvalues = sol.eigenvalues;
      report.best_iteration = iter;
    }
    report.history.push_back(rec);
    report.iterations_used = iter;

    const bool single_view = m == 1;
    const bool stalled = std::isfinite(previous_f1) &&
                         std::abs(rec.f1 - previous_f1) < config.tol * std::max(1.0, std::abs(rec.f1));
    if (single_view || stalled) {
      report.converged = true;
      break;
    }
    previous_f1 = rec.f1;
    previous_projection = projection;
    alpha = next_alpha;
  }
  best.report = std::move(report);
  return best;
}

FitResult fit(const MultiviewDataset& dataset, const FitConfig& config) {
  const ViewStructures views = build_view_structures(dataset, config);
  if (config.dim > dataset.n_samples()) throw ArgumentError("embedding dimension exceeds sample count");
  AlternationResult run = alternate(views.kernels.grams, views.graphs, config);

  FitResult out;
  out.model.projection = std::move(run.projection);
  out.model.alpha = std::move(run.alpha);
  out.model.kernels = views.kernels.params;
  out.model.train_views = dataset.views;
  out.model.eigenvalues = std::move(run.eigenvalues);
  out.model.config = config;
  out.model.validate();
  out.report = std::move(run.report);
  return out;
}

}  // namespace kmp
