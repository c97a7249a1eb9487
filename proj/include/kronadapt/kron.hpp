#ifndef KRONADAPT_KRON_HPP
#define KRONADAPT_KRON_HPP

#include <vector>

#include "kronadapt/types.hpp"

namespace kronadapt {

// Component design triple (r1, r2, r) for a d_out x d_in layer, plus the
// scaling knob alpha. A layer update is W0 + lambda * sum_i B_i kron A_i with
// A_i of shape r1 x (d_in/r2) and B_i of shape (d_out/r1) x r2.
struct KronConfig {
  Index r1 = 1;
  Index r2 = 1;
  Index r = 1;
  Index d_in = 1;
  Index d_out = 1;
  double alpha = 1.0;

  Index a_rows() const { return r1; }
  Index a_cols() const { return d_in / r2; }
  Index b_rows() const { return d_out / r1; }
  Index b_cols() const { return r2; }
  // Shape of the reshaped layer matrix: columns enumerate the block grid.
  Index kt_rows() const { return a_rows() * a_cols(); }
  Index kt_cols() const { return b_rows() * b_cols(); }

  // Throws ConfigError unless r1 | d_out, r2 | d_in, all sizes >= 1, alpha > 0.
  void validate() const;
};

struct KronComponentPair {
  Matrix a;  // r1 x (d_in/r2)
  Matrix b;  // (d_out/r1) x r2
};

struct KSVDResult {
  Vector sigmas;                        // descending, length == numerical rank
  std::vector<KronComponentPair> pairs; // same length as sigmas
};

// Tiles k (d_out x d_in) into an (d_out/r1) x r2 grid of r1 x (d_in/r2)
// blocks and lays each block out, column-major, as one column of the result.
// Columns enumerate the grid column-major as well, so for a single Kronecker
// product kreshape(B kron A) == vec(A) vec(B)^T. Pure entry permutation.
Matrix kreshape(const Eigen::Ref<const Matrix>& k, const KronConfig& cfg);

// Exact inverse of kreshape (bit-for-bit).
Matrix inverse_kreshape(const Eigen::Ref<const Matrix>& kt, const KronConfig& cfg);

// Materializes b kron a, block (i,j) = b(i,j) * a. Reference implementation
// for tests and small problems; the training path never calls it.
Matrix kron_product(const Eigen::Ref<const Matrix>& b, const Eigen::Ref<const Matrix>& a);
Matrix kron_product(const KronComponentPair& pair);

// (B kron A) x without materializing the product: reshape x column-major to
// X (a.cols x b.cols), return vec(A X B^T).
Vector kron_apply(const KronComponentPair& pair, const Eigen::Ref<const Vector>& x);

// Kronecker-product SVD of k under the (r1, r2) tiling: decomposes k into
// sum_i sigma_i B_i kron A_i with vec(A_i), vec(B_i) orthonormal families.
// Truncates at the numerical rank of kreshape(k) (tol < 0 -> default rule).
KSVDResult ksvd(const Eigen::Ref<const Matrix>& k, const KronConfig& cfg, double tol = -1.0);

// Trainable parameters: r * (r1 * d_in / r2 + (d_out / r1) * r2).
long long param_count(const KronConfig& cfg);

// Largest rank of the materialized update: min(r * r1 * r2, min(d_in, d_out)).
Index max_attainable_rank(const KronConfig& cfg);

}  // namespace kronadapt

#endif
