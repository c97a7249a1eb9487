#include "kronadapt/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace kronadapt {

Matrix matmul(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream msg;
    msg << "matmul: inner dimensions differ (" << a.rows() << "x" << a.cols()
        << " times " << b.rows() << "x" << b.cols() << ")";
    throw ShapeError(msg.str());
  }
  return a * b;
}

SvdResult svd(const Eigen::Ref<const Matrix>& m) {
  if (m.rows() < 1 || m.cols() < 1)
    throw ShapeError("svd: matrix must be non-empty");
  Eigen::JacobiSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success)
    throw NumericalError("svd: Jacobi iteration failed to converge within Eigen's sweep cap");

  SvdResult out{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  for (Index j = 0; j < out.u.cols(); ++j) {
    Index imax = 0;
    double amax = -1.0;
    for (Index i = 0; i < out.u.rows(); ++i) {
      double a = std::abs(out.u(i, j));
      if (a > amax) {
        amax = a;
        imax = i;
      }
    }
    if (out.u(imax, j) < 0.0) {
      out.u.col(j) = -out.u.col(j);
      out.v.col(j) = -out.v.col(j);
    }
  }
  return out;
}

double spectral_norm(const Eigen::Ref<const Matrix>& m) {
  if (m.rows() < 1 || m.cols() < 1)
    throw ShapeError("spectral_norm: matrix must be non-empty");
  Eigen::JacobiSVD<Matrix> dec(m);
  if (dec.info() != Eigen::Success)
    throw NumericalError("spectral_norm: Jacobi iteration failed to converge");
  return dec.singularValues()(0);
}

Index numerical_rank(const Vector& sigma, Index rows, Index cols, double tol) {
  if (sigma.size() == 0) return 0;
  if (tol < 0.0) {
    const double eps = std::ldexp(1.0, -52);
    tol = sigma(0) * static_cast<double>(std::max(rows, cols)) * eps;
  }
  Index r = 0;
  while (r < sigma.size() && sigma(r) > tol) ++r;
  return r;
}

Index numerical_rank(const Eigen::Ref<const Matrix>& m, double tol) {
  return numerical_rank(svd(m).sigma, m.rows(), m.cols(), tol);
}

Matrix orthonormal_complement(const Eigen::Ref<const Matrix>& q) {
  if (q.rows() <= q.cols())
    throw ShapeError("orthonormal_complement: need strictly more rows than columns");
  const Matrix gram = q.transpose() * q;
  const double defect =
      (gram - Matrix::Identity(q.cols(), q.cols())).norm();
  if (defect > 1e-8) {
    std::ostringstream msg;
    msg << "orthonormal_complement: columns not orthonormal (||q^T q - I||_F = "
        << defect << ")";
    throw PreconditionError(msg.str());
  }
  Eigen::HouseholderQR<Matrix> qr(q);
  Matrix full = qr.householderQ() * Matrix::Identity(q.rows(), q.rows());
  return full.rightCols(q.rows() - q.cols());
}

}  // namespace kronadapt
