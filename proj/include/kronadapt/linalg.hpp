#ifndef KRONADAPT_LINALG_HPP
#define KRONADAPT_LINALG_HPP

#include "kronadapt/types.hpp"

namespace kronadapt {

struct SvdResult {
  Matrix u;         // rows x k, orthonormal columns
  Vector sigma;     // k descending, non-negative
  Matrix v;         // cols x k, orthonormal columns
  // k = min(rows, cols); reconstruction is u * sigma.asDiagonal() * v^T.
};

Matrix matmul(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b);

// Thin SVD with a deterministic sign convention: in every column of u the
// entry of largest magnitude (first such index on ties) is non-negative, and
// the matching column of v is flipped along with it.
SvdResult svd(const Eigen::Ref<const Matrix>& m);

double spectral_norm(const Eigen::Ref<const Matrix>& m);

// Number of singular values above tol; tol < 0 picks the default threshold
// sigma_1 * max(rows, cols) * 2^-52 used everywhere in this library.
Index numerical_rank(const Vector& sigma, Index rows, Index cols, double tol = -1.0);
Index numerical_rank(const Eigen::Ref<const Matrix>& m, double tol = -1.0);

// Given q (rows x cols, rows > cols) with orthonormal columns, returns a
// rows x (rows - cols) matrix p with p^T p = I and p^T q = 0.
// Throws PreconditionError if ||q^T q - I||_F > 1e-8.
Matrix orthonormal_complement(const Eigen::Ref<const Matrix>& q);

}  // namespace kronadapt

#endif
