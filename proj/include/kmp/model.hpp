#pragma once

#include <filesystem>
#include <vector>

#include "kmp/config.hpp"
#include "kmp/kernel.hpp"
#include "kmp/types.hpp"

namespace kmp {

// Trained projection together with everything needed to embed unseen samples:
// the fused training kernel row of a query, times P.
struct ProjectionModel {
  static constexpr int kFormatVersion = 1;

  Matrix projection;                 // P, N x d
  Vector alpha;                      // view weights on the simplex
  std::vector<KernelParams> kernels; // per view
  std::vector<Matrix> train_views;   // per view, N x D_i
  Vector eigenvalues;                // d smallest eigenvalues behind P (diagnostic)
  FitConfig config;

  Index n_train() const { return projection.rows(); }
  Index dim() const { return projection.cols(); }
  std::size_t n_views() const { return train_views.size(); }

  void validate() const;
};

// Y = (sum_i alpha_i K_i) P over the training samples.
Matrix embed_train(const ProjectionModel& model);

// Fused kernel rows of the queries against the training samples, times P.
// `queries[i]` holds view i of every query (T x D_i).
Matrix embed_oos(const ProjectionModel& model, const std::vector<Matrix>& queries);
Vector embed_oos(const ProjectionModel& model, const std::vector<Vector>& sample);

// Container: 8-byte magic, little-endian u64 header length, JSON header,
// then for P and every training view a u64 byte count followed by the
// row-major little-endian float64 payload, then a u64 FNV-1a checksum of all
// preceding bytes.
void save_model(const ProjectionModel& model, const std::filesystem::path& path);
ProjectionModel load_model(const std::filesystem::path& path);

std::vector<unsigned char> serialize_model(const ProjectionModel& model);
ProjectionModel deserialize_model(const std::vector<unsigned char>& bytes);

}  // namespace kmp
