#include "kmp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "kmp/error.hpp"
#include "kmp/simd.hpp"

namespace kmp {
namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::span<const double> column(const Matrix& m, Index c) {
  return {m.col(c).data(), static_cast<std::size_t>(m.rows())};
}

double log_sum_exp(const Eigen::Ref<const Vector>& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

// k-means++ seeding over the columns of `samples` (D x N).
std::vector<Index> kmeanspp(const Matrix& samples, int clusters, std::mt19937_64& rng) {
  const Index n = samples.cols();
  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(clusters));
  chosen.push_back(static_cast<Index>(rng() % static_cast<std::uint64_t>(n)));

  Vector nearest(n);
  for (Index p = 0; p < n; ++p) nearest(p) = simd::squared_distance(column(samples, p), column(samples, chosen[0]));

  while (static_cast<int>(chosen.size()) < clusters) {
    const double total = nearest.sum();
    Index pick = -1;
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      for (Index p = 0; p < n; ++p) {
        if (nearest(p) <= 0.0) continue;
        pick = p;
        u -= nearest(p);
        if (u < 0.0) break;
      }
    } else {
      // All remaining points coincide with a chosen centre.
      for (Index p = 0; p < n && pick < 0; ++p)
        if (std::find(chosen.begin(), chosen.end(), p) == chosen.end()) pick = p;
    }
    chosen.push_back(pick);
    for (Index p = 0; p < n; ++p)
      nearest(p) = std::min(nearest(p), simd::squared_distance(column(samples, p), column(samples, pick)));
  }
  return chosen;
}

}  // namespace

ClusterAssignment fit_gmm(const Matrix& view, int clusters, std::uint64_t seed, const GmmOptions& options) {
  const Index n = view.rows();
  const Index dim = view.cols();
  if (clusters < 1) throw ArgumentError("cluster count must be positive");
  if (clusters > n) {
    throw ArgumentError("cluster count " + std::to_string(clusters) + " exceeds sample count " + std::to_string(n));
  }
  const Matrix samples = view.transpose();  // D x N, one sample per column

  const Eigen::RowVectorXd global_mean = view.colwise().mean();
  Eigen::RowVectorXd global_var = (view.rowwise() - global_mean).array().square().colwise().mean();
  global_var = global_var.cwiseMax(options.variance_floor);

  std::mt19937_64 rng(seed);
  const std::vector<Index> seeds = kmeanspp(samples, clusters, rng);

  const Index g = clusters;
  ClusterAssignment out;
  out.clusters = clusters;
  out.means.resize(g, dim);
  out.variances.resize(g, dim);
  for (Index k = 0; k < g; ++k) {
    out.means.row(k) = view.row(seeds[static_cast<std::size_t>(k)]);
    out.variances.row(k) = global_var;
  }
  out.mixing = Vector::Constant(g, 1.0 / static_cast<double>(g));

  Matrix log_resp(n, g);
  Vector log_density(n);
  const double log_two_pi = std::log(2.0 * std::numbers::pi);

  auto e_step = [&]() {
    for (Index k = 0; k < g; ++k) {
      const double log_norm =
          std::log(out.mixing(k)) - 0.5 * (static_cast<double>(dim) * log_two_pi + out.variances.row(k).array().log().sum());
      for (Index p = 0; p < n; ++p) {
        const double mahal = ((view.row(p) - out.means.row(k)).array().square() / out.variances.row(k).array()).sum();
        log_resp(p, k) = log_norm - 0.5 * mahal;
      }
    }
    double total = 0.0;
    for (Index p = 0; p < n; ++p) {
      log_density(p) = log_sum_exp(log_resp.row(p).transpose());
      log_resp.row(p).array() -= log_density(p);
      total += log_density(p);
    }
    return total;
  };

  double previous = -std::numeric_limits<double>::infinity();
  double current = e_step();
  int iter = 0;
  for (; iter < options.max_iters; ++iter) {
    if (!std::isfinite(current)) {
      throw NumericError("GMM log-likelihood is not finite at EM iteration " + std::to_string(iter));
    }
    // M-step
    const Matrix resp = log_resp.array().exp().matrix();
    std::vector<Index> reseeded;
    for (Index k = 0; k < g; ++k) {
      const double weight = resp.col(k).sum();
      if (weight < 1e-10) {
        // Empty component: restart it on the worst-explained sample.
        Index worst = -1;
        for (Index p = 0; p < n; ++p) {
          if (std::find(reseeded.begin(), reseeded.end(), p) != reseeded.end()) continue;
          if (worst < 0 || log_density(p) < log_density(worst)) worst = p;
        }
        reseeded.push_back(worst);
        out.means.row(k) = view.row(worst);
        out.variances.row(k) = global_var;
        out.mixing(k) = 1.0 / static_cast<double>(n);
        continue;
      }
      const Eigen::RowVectorXd mean = (resp.col(k).transpose() * view) / weight;
      Eigen::RowVectorXd var = (resp.col(k).transpose() * (view.rowwise() - mean).array().square().matrix()) / weight;
      out.means.row(k) = mean;
      out.variances.row(k) = var.cwiseMax(options.variance_floor);
      out.mixing(k) = weight / static_cast<double>(n);
    }
    out.mixing /= out.mixing.sum();

    previous = current;
    current = e_step();
    if (std::abs(current - previous) < options.tol) {
      ++iter;
      break;
    }
  }
  if (!std::isfinite(current)) throw NumericError("GMM log-likelihood is not finite after EM");

  out.log_likelihood = current;
  out.iterations = iter;
  out.labels.resize(static_cast<std::size_t>(n));
  for (Index p = 0; p < n; ++p) {
    Index best = 0;
    for (Index k = 1; k < g; ++k)
      if (log_resp(p, k) > log_resp(p, best)) best = k;
    out.labels[static_cast<std::size_t>(p)] = static_cast<int>(best);
  }
  return out;
}

SparseCode omp(const Vector& target, const Matrix& dictionary, int max_atoms, double residual_tol) {
  const Index atoms = dictionary.cols();
  if (dictionary.rows() != target.size()) {
    throw DimensionError("target length " + std::to_string(target.size()) + " does not match dictionary rows " +
                         std::to_string(dictionary.rows()));
  }
  if (max_atoms < 1) throw ArgumentError("max_atoms must be positive");
  if (max_atoms > atoms) {
    throw ArgumentError("max_atoms " + std::to_string(max_atoms) + " exceeds dictionary size " + std::to_string(atoms));
  }
  if (residual_tol < 0.0) throw ArgumentError("residual tolerance must be nonnegative");

  Vector norms(atoms);
  Matrix normalized(dictionary.rows(), atoms);
  for (Index j = 0; j < atoms; ++j) {
    norms(j) = dictionary.col(j).norm();
    if (!(norms(j) > 0.0)) throw ArgumentError("dictionary column " + std::to_string(j) + " has zero norm");
    normalized.col(j) = dictionary.col(j) / norms(j);
  }

  SparseCode code;
  Vector residual = target;
  double residual_norm = residual.norm();
  code.residual_history.push_back(residual_norm);
  const double target_norm = residual_norm;

  std::vector<char> selected(static_cast<std::size_t>(atoms), 0);
  Vector solution;
  while (static_cast<int>(code.support.size()) < max_atoms && residual_norm > residual_tol) {
    Index best = -1;
    double best_corr = 0.0;
    for (Index j = 0; j < atoms; ++j) {
      if (selected[static_cast<std::size_t>(j)]) continue;
      const double c = std::abs(simd::dot(column(normalized, j), {residual.data(), static_cast<std::size_t>(residual.size())}));
      if (c > best_corr) {
        best_corr = c;
        best = j;
      }
    }
    // Residual is (numerically) orthogonal to every remaining atom.
    if (best < 0 || best_corr <= 1e-14 * target_norm) break;

    selected[static_cast<std::size_t>(best)] = 1;
    code.support.push_back(best);
    Matrix sub(dictionary.rows(), static_cast<Index>(code.support.size()));
    for (std::size_t s = 0; s < code.support.size(); ++s) sub.col(static_cast<Index>(s)) = normalized.col(code.support[s]);
    solution = sub.colPivHouseholderQr().solve(target);
    residual = target - sub * solution;
    residual_norm = residual.norm();
    code.residual_history.push_back(residual_norm);
  }

  code.coefficients.resize(code.support.size());
  Vector reconstruction = Vector::Zero(target.size());
  for (std::size_t s = 0; s < code.support.size(); ++s) {
    code.coefficients[s] = solution(static_cast<Index>(s)) / norms(code.support[s]);
    reconstruction += code.coefficients[s] * dictionary.col(code.support[s]);
  }
  code.residual_norm = (target - reconstruction).norm();
  return code;
}

Matrix l1_coefficients(const Matrix& view, const ClusterAssignment& clusters, const GraphBuildOptions& options) {
  const Index n = view.rows();
  const Index dim = view.cols();
  if (static_cast<Index>(clusters.labels.size()) != n) {
    throw DimensionError("cluster labels do not match the view's sample count");
  }
  if (options.max_atoms < 1) throw ArgumentError("max_atoms must be positive");

  std::vector<std::vector<Index>> members(static_cast<std::size_t>(std::max(clusters.clusters, 1)));
  for (Index p = 0; p < n; ++p) {
    const int label = clusters.labels[static_cast<std::size_t>(p)];
    if (label < 0 || label >= clusters.clusters) throw ArgumentError("cluster label out of range");
    members[static_cast<std::size_t>(label)].push_back(p);
  }
  Vector row_norms(n);
  for (Index p = 0; p < n; ++p) row_norms(p) = view.row(p).norm();

  Matrix coefficients = Matrix::Zero(n, n);
  for (Index p = 0; p < n; ++p) {
    // Zero-norm samples carry no direction and cannot serve as atoms.
    std::vector<Index> neighbours;
    for (Index q : members[static_cast<std::size_t>(clusters.labels[static_cast<std::size_t>(p)])])
      if (q != p && row_norms(q) > 0.0) neighbours.push_back(q);
    if (neighbours.empty()) continue;

    const auto data_atoms = static_cast<Index>(neighbours.size());
    Matrix dictionary(dim, data_atoms + dim);
    for (Index a = 0; a < data_atoms; ++a) dictionary.col(a) = view.row(neighbours[static_cast<std::size_t>(a)]).transpose();
    dictionary.rightCols(dim).setIdentity();

    const int budget = static_cast<int>(std::min<Index>(options.max_atoms, dictionary.cols()));
    const SparseCode code = omp(view.row(p).transpose(), dictionary, budget, options.residual_tol);
    for (std::size_t s = 0; s < code.support.size(); ++s) {
      const Index atom = code.support[s];
      if (atom < data_atoms) coefficients(p, neighbours[static_cast<std::size_t>(atom)]) = std::abs(code.coefficients[s]);
    }
  }
  return coefficients;
}

SimilarityGraph build_l1_graph(const Matrix& view, const ClusterAssignment& clusters, const GraphBuildOptions& options) {
  const Matrix raw = l1_coefficients(view, clusters, options);
  const Matrix weights = 0.5 * (raw + raw.transpose());
  return degree_and_laplacian(weights);
}

SimilarityGraph degree_and_laplacian(const Matrix& weights) {
  if (weights.rows() != weights.cols()) throw DimensionError("weight matrix must be square");
  const double asymmetry = (weights - weights.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-9) {
    throw ArgumentError("weight matrix is not symmetric (max deviation " + std::to_string(asymmetry) + ")");
  }
  SimilarityGraph graph;
  graph.weights = weights;
  graph.degree = weights.rowwise().sum();
  graph.laplacian = -weights;
  graph.laplacian.diagonal() += graph.degree;
  return graph;
}

}  // namespace kmp
