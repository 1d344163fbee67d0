#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace kmp {

// Hyperparameters of a KMP fit. Defaults: r = 5, ridge = 1e-8, tol = 1e-6,
// max_iters = 50.
struct FitConfig {
  int dim = 10;          // d, embedding dimension
  double r = 5.0;        // exponent of the relaxed weight problem, > 1
  int clusters = 10;     // G, GMM components per view
  int max_atoms = 10;    // OMP sparsity budget per sample
  double residual_tol = 1e-7;
  std::vector<std::optional<double>> sigmas;  // per-view RBF bandwidth overrides
  double sigma_scale = 1.0;                   // multiplier on the median-distance default
  double ridge = 1e-8;
  int max_iters = 50;
  double tol = 1e-6;
  std::uint64_t seed = 0;

  // Throws ArgumentError on the first invalid field.
  void validate() const;
};

}  // namespace kmp
