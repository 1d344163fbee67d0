#include "kmp/eig.hpp"

#include <cmath>
#include <string>

#include "kmp/error.hpp"

namespace kmp {
namespace {

void check_symmetric(const Matrix& m, const char* name) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw ArgumentError(std::string(name) + " is not symmetric");
  }
}

}  // namespace

EigenSolution solve_gep(const Matrix& a, const Matrix& b, Index d, double ridge) {
  const Index n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n) throw DimensionError("pencil matrices must be square and equal in size");
  if (d < 1 || d > n) {
    throw ArgumentError("requested " + std::to_string(d) + " eigenpairs from a problem of size " + std::to_string(n));
  }
  if (!(ridge >= 0.0)) throw ArgumentError("ridge must be nonnegative");
  check_symmetric(a, "A");
  check_symmetric(b, "B");

  EigenSolution out;
  out.shift = ridge * b.trace() / static_cast<double>(n);
  Matrix b_reg = b;
  b_reg.diagonal().array() += out.shift;

  Eigen::LLT<Matrix> chol(b_reg);
  if (chol.info() != Eigen::Success) {
    throw NumericError("Cholesky factorisation of the regularised B failed; increase the ridge (currently " +
                       std::to_string(ridge) + ")");
  }
  const auto lower = chol.matrixL();
  // C = L^{-1} A L^{-T}
  Matrix c = lower.solve(a);
  c = lower.solve(c.transpose()).transpose();
  c = 0.5 * (c + c.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> solver(c);
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");

  out.eigenvalues = solver.eigenvalues().head(d);
  out.eigenvectors = chol.matrixU().solve(solver.eigenvectors().leftCols(d));
  const double column_scale = 1.0 / std::sqrt(static_cast<double>(d));
  out.residuals.resize(d);
  for (Index j = 0; j < d; ++j) {
    auto p = out.eigenvectors.col(j);
    p *= column_scale;
    Index top = 0;
    p.cwiseAbs().maxCoeff(&top);
    if (p(top) < 0.0) p = -p;
    out.residuals(j) = (a * p - out.eigenvalues(j) * (b_reg * p)).norm();
  }
  return out;
}

}  // namespace kmp
