#pragma once

#include <cstdint>
#include <string>

#include "adaptrom/linalg.hpp"

namespace adaptrom {

enum class InnerProduct { velocity_h1, pressure_l2 };

const char* to_string(InnerProduct ip);
InnerProduct parse_inner_product(const std::string& tag);

/// Weighted POD basis on one reference space.
///
/// modes = snapshots * xi, and (modes_i, modes_j)_X = delta_ij.
struct PodBasis {
  std::uint64_t space_id = 0;
  InnerProduct inner = InnerProduct::velocity_h1;
  Matrix modes;        // one column per mode
  Vector eigenvalues;  // lambda_1 >= ... >= lambda_R > 0
  Vector spectrum;     // all eigenvalues of the weighted Gramian, clamped at 0
  Matrix xi;           // n x R snapshot-to-mode coefficients
  bool rank_deficient = false;

  int size() const { return static_cast<int>(modes.cols()); }
};

/// Method of snapshots: K_ij = sqrt(a_i a_j) (u_i, u_j)_X is
/// eigendecomposed and phi_k = lambda_k^{-1/2} sum_j sqrt(a_j) v_k^j u_j.
/// Modes with lambda_k <= 1e-12 lambda_1 are dropped, so the result may hold
/// fewer than `count` modes; rank_deficient is set when that happens. Each
/// mode's coefficient of largest magnitude is positive.
PodBasis compute_pod(const Matrix& snapshots, const Vector& weights, int count, const SparseMatrix& X,
                     InnerProduct inner, std::uint64_t space_id = 0);

/// sum_j a_j || u_j - sum_i (u_j, phi_i)_X phi_i ||_X^2 for X-orthonormal modes.
double pod_projection_error(const Matrix& snapshots, const Vector& weights, const Matrix& modes,
                            const SparseMatrix& X);

/// The leading `count` modes of a basis.
PodBasis truncate(const PodBasis& basis, int count);

}  // namespace adaptrom
