#include "kronadapt/kron.hpp"

#include <sstream>

#include "kronadapt/linalg.hpp"

namespace kronadapt {

void KronConfig::validate() const {
  std::ostringstream msg;
  if (r1 < 1 || r2 < 1 || r < 1 || d_in < 1 || d_out < 1) {
    msg << "KronConfig: all of r1, r2, r, d_in, d_out must be >= 1 (got r1=" << r1
        << " r2=" << r2 << " r=" << r << " d_in=" << d_in << " d_out=" << d_out << ")";
    throw ConfigError(msg.str());
  }
  if (d_out % r1 != 0) {
    msg << "KronConfig: r1=" << r1 << " does not divide d_out=" << d_out;
    throw ConfigError(msg.str());
  }
  if (d_in % r2 != 0) {
    msg << "KronConfig: r2=" << r2 << " does not divide d_in=" << d_in;
    throw ConfigError(msg.str());
  }
  if (!(alpha > 0.0)) {
    msg << "KronConfig: alpha must be positive (got " << alpha << ")";
    throw ConfigError(msg.str());
  }
}

namespace {

void check_layer_shape(const Eigen::Ref<const Matrix>& k, const KronConfig& cfg,
                       const char* op) {
  if (k.rows() != cfg.d_out || k.cols() != cfg.d_in) {
    std::ostringstream msg;
    msg << op << ": matrix is " << k.rows() << "x" << k.cols() << " but config says "
        << cfg.d_out << "x" << cfg.d_in;
    throw ShapeError(msg.str());
  }
}

}  // namespace

Matrix kreshape(const Eigen::Ref<const Matrix>& k, const KronConfig& cfg) {
  cfg.validate();
  check_layer_shape(k, cfg, "kreshape");
  const Index br = cfg.b_rows(), bc = cfg.b_cols();
  const Index ar = cfg.a_rows(), ac = cfg.a_cols();
  Matrix kt(cfg.kt_rows(), cfg.kt_cols());
  for (Index j = 0; j < bc; ++j)
    for (Index i = 0; i < br; ++i)
      kt.col(j * br + i).reshaped(ar, ac) = k.block(i * ar, j * ac, ar, ac);
  return kt;
}

Matrix inverse_kreshape(const Eigen::Ref<const Matrix>& kt, const KronConfig& cfg) {
  cfg.validate();
  if (kt.rows() != cfg.kt_rows() || kt.cols() != cfg.kt_cols()) {
    std::ostringstream msg;
    msg << "inverse_kreshape: matrix is " << kt.rows() << "x" << kt.cols()
        << " but config implies " << cfg.kt_rows() << "x" << cfg.kt_cols();
    throw ShapeError(msg.str());
  }
  const Index br = cfg.b_rows(), bc = cfg.b_cols();
  const Index ar = cfg.a_rows(), ac = cfg.a_cols();
  Matrix k(cfg.d_out, cfg.d_in);
  for (Index j = 0; j < bc; ++j)
    for (Index i = 0; i < br; ++i)
      k.block(i * ar, j * ac, ar, ac) = kt.col(j * br + i).reshaped(ar, ac);
  return k;
}

Matrix kron_product(const Eigen::Ref<const Matrix>& b, const Eigen::Ref<const Matrix>& a) {
  Matrix out(b.rows() * a.rows(), b.cols() * a.cols());
  for (Index j = 0; j < b.cols(); ++j)
    for (Index i = 0; i < b.rows(); ++i)
      out.block(i * a.rows(), j * a.cols(), a.rows(), a.cols()) = b(i, j) * a;
  return out;
}

Matrix kron_product(const KronComponentPair& pair) {
  return kron_product(pair.b, pair.a);
}

Vector kron_apply(const KronComponentPair& pair, const Eigen::Ref<const Vector>& x) {
  const Index ar = pair.a.rows(), ac = pair.a.cols();
  const Index br = pair.b.rows(), bc = pair.b.cols();
  if (x.size() != ac * bc) {
    std::ostringstream msg;
    msg << "kron_apply: input has length " << x.size() << ", factors expect "
        << ac * bc;
    throw ShapeError(msg.str());
  }
  Eigen::Map<const Matrix> xm(x.data(), ac, bc);
  Matrix t = pair.a * xm;             // ar x bc
  Matrix y = t * pair.b.transpose();  // ar x br
  return Eigen::Map<const Vector>(y.data(), ar * br);
}

KSVDResult ksvd(const Eigen::Ref<const Matrix>& k, const KronConfig& cfg, double tol) {
  const Matrix kt = kreshape(k, cfg);
  SvdResult dec = svd(kt);
  const Index rank = numerical_rank(dec.sigma, kt.rows(), kt.cols(), tol);

  KSVDResult out;
  out.sigmas = dec.sigma.head(rank);
  out.pairs.reserve(static_cast<size_t>(rank));
  for (Index i = 0; i < rank; ++i) {
    KronComponentPair p;
    p.a = dec.u.col(i).reshaped(cfg.a_rows(), cfg.a_cols());
    p.b = dec.v.col(i).reshaped(cfg.b_rows(), cfg.b_cols());
    out.pairs.push_back(std::move(p));
  }
  return out;
}

long long param_count(const KronConfig& cfg) {
  cfg.validate();
  const long long per =
      static_cast<long long>(cfg.a_rows()) * cfg.a_cols() +
      static_cast<long long>(cfg.b_rows()) * cfg.b_cols();
  return static_cast<long long>(cfg.r) * per;
}

Index max_attainable_rank(const KronConfig& cfg) {
  cfg.validate();
  const Index cap = std::min(cfg.d_in, cfg.d_out);
  const Index prod = cfg.r * cfg.r1 * cfg.r2;
  return std::min(prod, cap);
}

}  // namespace kronadapt
