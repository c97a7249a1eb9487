#include "kronadapt/align.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace kronadapt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// base^e for integer e >= 0 by repeated squaring; exact operation sequence,
// so results are reproducible across calls.
double ipow(double base, long e) {
  double out = 1.0, cur = base;
  while (e > 0) {
    if (e & 1) out *= cur;
    cur *= cur;
    e >>= 1;
  }
  return out;
}

// Orthonormalizes the columns of m via Householder QR, with each column
// flipped so the matching diagonal of R is positive.
Matrix orthonormal_columns(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  Matrix rdiag = qr.matrixQR().diagonal();
  for (Index j = 0; j < m.cols(); ++j)
    if (rdiag(j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

// Shared core of the two alignment metrics. perp may have zero columns (the
// "no complement" convention); factor is dim x r.
AlignmentValue align_against(const Matrix& perp, const Eigen::Ref<const Matrix>& factor,
                             Index r_star) {
  if (factor.cols() < r_star) return {1.0, true};
  SvdResult f = svd(factor);
  if (numerical_rank(f.sigma, factor.rows(), factor.cols()) < r_star) return {1.0, true};
  if (perp.cols() == 0) return {0.0, false};
  const double v = spectral_norm(perp.transpose() * f.u.leftCols(r_star));
  return {std::min(v, 1.0), false};
}

void check_r_star(const Eigen::Ref<const Matrix>& gtilde0, Index r_star) {
  if (r_star < 1) throw ParameterError("alignment: r_star must be >= 1");
  if (r_star > std::min(gtilde0.rows(), gtilde0.cols())) {
    std::ostringstream msg;
    msg << "alignment: r_star=" << r_star << " exceeds min dimension of the "
        << gtilde0.rows() << "x" << gtilde0.cols() << " reshaped gradient";
    throw ShapeError(msg.str());
  }
}

}  // namespace

SyntheticTask make_task(Rng& rng, const KronConfig& plant_cfg, Index n, Index r_star,
                        const TaskOptions& opts) {
  plant_cfg.validate();
  if (n < 1) throw ShapeError("make_task: need at least one sample");
  const Index m = plant_cfg.kt_rows();
  const Index q = plant_cfg.kt_cols();
  if (r_star < 1 || r_star > std::min(m, q)) {
    std::ostringstream msg;
    msg << "make_task: r_star=" << r_star << " must lie in [1, " << std::min(m, q)
        << "] for this tiling";
    throw ConfigError(msg.str());
  }
  Vector c = opts.strengths.size() ? opts.strengths : Vector::Ones(r_star);
  if (c.size() != r_star)
    throw ParameterError("make_task: strengths length must equal r_star");
  for (Index i = 0; i < c.size(); ++i) {
    if (!(c(i) > 0.0))
      throw ParameterError("make_task: strengths must be positive");
    if (i > 0 && c(i) > c(i - 1))
      throw ParameterError("make_task: strengths must be non-increasing");
  }
  if (opts.noise_std < 0.0)
    throw ParameterError("make_task: noise_std must be non-negative");
  if (opts.whiten && n < plant_cfg.d_in)
    throw ConfigError("make_task: whitening requires n >= d_in");

  SyntheticTask task;
  task.plant_config = plant_cfg;
  task.planted_rank = r_star;
  task.strengths = c;
  task.noise_std = opts.noise_std;
  task.whitened = opts.whiten;
  task.small_sample = n < plant_cfg.d_in;

  // Sampling order is part of the reproducibility contract:
  // w0, A factors, B factors, x, noise.
  task.w0 = sample_gaussian(rng, plant_cfg.d_out, plant_cfg.d_in,
                            1.0 / std::sqrt(static_cast<double>(plant_cfg.d_in)));
  const Matrix ma = orthonormal_columns(sample_gaussian(rng, m, r_star, 1.0));
  const Matrix mb = orthonormal_columns(sample_gaussian(rng, q, r_star, 1.0));

  task.delta = Matrix::Zero(plant_cfg.d_out, plant_cfg.d_in);
  for (Index i = 0; i < r_star; ++i) {
    const Matrix ai = ma.col(i).reshaped(plant_cfg.a_rows(), plant_cfg.a_cols());
    const Matrix bi = mb.col(i).reshaped(plant_cfg.b_rows(), plant_cfg.b_cols());
    task.delta += c(i) * kron_product(bi, ai);
  }

  Matrix x = sample_gaussian(rng, plant_cfg.d_in, n, 1.0);
  if (opts.whiten) {
    const Matrix qx = orthonormal_columns(x.transpose());  // n x d_in
    x = std::sqrt(static_cast<double>(n)) * qx.transpose();
  }
  task.x = std::move(x);
  task.y = (task.w0 + task.delta) * task.x;
  if (opts.noise_std > 0.0)
    task.y += sample_gaussian(rng, plant_cfg.d_out, n, opts.noise_std);
  return task;
}

Matrix full_ft_gradient(const SyntheticTask& task) {
  const double n = static_cast<double>(task.x.cols());
  return (task.y - task.w0 * task.x) * task.x.transpose() / n;
}

Matrix stacked_a(const KronAdapterState& state) {
  const Index m = state.config.kt_rows();
  Matrix out(m, static_cast<Index>(state.pairs.size()));
  for (size_t i = 0; i < state.pairs.size(); ++i)
    out.col(static_cast<Index>(i)) =
        Eigen::Map<const Vector>(state.pairs[i].a.data(), m);
  return out;
}

Matrix stacked_b(const KronAdapterState& state) {
  const Index q = state.config.kt_cols();
  Matrix out(q, static_cast<Index>(state.pairs.size()));
  for (size_t i = 0; i < state.pairs.size(); ++i)
    out.col(static_cast<Index>(i)) =
        Eigen::Map<const Vector>(state.pairs[i].b.data(), q);
  return out;
}

AlignmentValue alignment_A(const Eigen::Ref<const Matrix>& gtilde0,
                           const Eigen::Ref<const Matrix>& atilde, Index r_star) {
  check_r_star(gtilde0, r_star);
  if (atilde.rows() != gtilde0.rows())
    throw ShapeError("alignment_A: atilde rows must match gtilde0 rows");
  Matrix perp;
  if (r_star < gtilde0.rows())
    perp = orthonormal_complement(svd(gtilde0).u.leftCols(r_star));
  return align_against(perp, atilde, r_star);
}

AlignmentValue alignment_B(const Eigen::Ref<const Matrix>& gtilde0,
                           const Eigen::Ref<const Matrix>& btilde, Index r_star) {
  check_r_star(gtilde0, r_star);
  if (btilde.rows() != gtilde0.cols())
    throw ShapeError("alignment_B: btilde rows must match gtilde0 cols");
  Matrix perp;
  if (r_star < gtilde0.cols())
    perp = orthonormal_complement(svd(gtilde0).v.leftCols(r_star));
  return align_against(perp, btilde, r_star);
}

LinearDynamics::LinearDynamics(const SvdResult& g_svd, const Matrix& atilde0, double eta)
    : u_(g_svd.u), v_(g_svd.v), sigma_(g_svd.sigma), a0_(atilde0), eta_(eta) {
  if (!(eta > 0.0)) throw ParameterError("LinearDynamics: eta must be positive");
  if (u_.rows() != a0_.rows())
    throw ShapeError("LinearDynamics: atilde0 rows must match the SVD's left factor");
  proj_ = u_.transpose() * a0_;
}

Matrix LinearDynamics::atilde(long t) const {
  if (t < 0) throw ParameterError("LinearDynamics: t must be >= 0");
  Vector gain(sigma_.size());
  for (Index i = 0; i < sigma_.size(); ++i) {
    const double up = ipow(1.0 + eta_ * sigma_(i), t);
    const double dn = ipow(1.0 - eta_ * sigma_(i), t);
    gain(i) = 0.5 * (up + dn) - 1.0;
  }
  return a0_ + u_ * (gain.asDiagonal() * proj_);
}

Matrix LinearDynamics::btilde(long t) const {
  if (t < 0) throw ParameterError("LinearDynamics: t must be >= 0");
  Vector gain(sigma_.size());
  for (Index i = 0; i < sigma_.size(); ++i) {
    const double up = ipow(1.0 + eta_ * sigma_(i), t);
    const double dn = ipow(1.0 - eta_ * sigma_(i), t);
    gain(i) = 0.5 * (up - dn);
  }
  return v_ * (gain.asDiagonal() * proj_);
}

double linearization_error(const Eigen::Ref<const Matrix>& atilde,
                           const Eigen::Ref<const Matrix>& btilde,
                           const LinearDynamics& lin, long t) {
  const Matrix la = lin.atilde(t);
  const Matrix lb = lin.btilde(t);
  if (!la.allFinite() || !lb.allFinite()) return kNaN;
  Matrix stacked(atilde.rows() + btilde.rows(), atilde.cols());
  stacked.topRows(atilde.rows()) = atilde - la;
  stacked.bottomRows(btilde.rows()) = btilde - lb;
  return spectral_norm(stacked);
}

const char* regime_name(Regime regime) {
  switch (regime) {
    case Regime::RLtRStar: return "r_lt_rstar";
    case Regime::RStarLeRLt2RStar: return "rstar_le_r_lt_2rstar";
    case Regime::RGe2RStar: return "r_ge_2rstar";
  }
  return "unknown";
}

TheoryBounds theory_bounds_from_spectrum(double sigma1, double sigma_rstar, Index r_star,
                                         Index r1, Index r2, Index r, Index d_in,
                                         double theta, double xi, double eta,
                                         double a0_norm) {
  if (r1 < 1 || r2 < 1 || r < 1 || d_in < 1 || r_star < 1)
    throw ParameterError("theory_bounds: dimensions must be >= 1");
  if (!(theta > 0.0) || theta > 1.0)
    throw ParameterError("theory_bounds: theta must lie in (0, 1]");
  if (!(xi > 0.0) || xi > 1.0)
    throw ParameterError("theory_bounds: xi must lie in (0, 1]");
  if (!(eta > 0.0)) throw ParameterError("theory_bounds: eta must be positive");
  if (!(sigma1 > 0.0))
    throw DegenerateSpectrumError("theory_bounds: sigma_1 must be positive");
  if (!(sigma_rstar > 0.0))
    throw DegenerateSpectrumError("theory_bounds: sigma_{r*} vanishes, kappa undefined");

  TheoryBounds tb;
  tb.r_star = r_star;
  tb.sigma1 = sigma1;
  tb.sigma_rstar = sigma_rstar;
  tb.kappa = sigma1 / sigma_rstar;

  if (r < r_star) {
    tb.regime = Regime::RLtRStar;
    tb.alpha_bound = kNaN;
    tb.t_star_a = kNaN;
    tb.t_star_b = kNaN;
    tb.t_lin = kNaN;
    return tb;
  }

  const double rd = std::sqrt(static_cast<double>(r1) * static_cast<double>(d_in));
  const double sr2 = std::sqrt(static_cast<double>(r2));
  const double sr = std::sqrt(static_cast<double>(r));
  const double rr = static_cast<double>(r);

  double base, ratio, tsb;
  if (r < 2 * r_star) {
    tb.regime = Regime::RStarLeRLt2RStar;
    ratio = 24.0 * rr * rd / (theta * xi * sr2);
    base = 1.0 / ratio;
    tsb = 6.0 * rr * rd / (theta * xi * sr2 * eta * sigma_rstar);
  } else {
    tb.regime = Regime::RGe2RStar;
    ratio = 24.0 * rd / (theta * sr2);
    base = 1.0 / ratio;
    tsb = 6.0 * rr * rd / (theta * sr2 * eta * sigma_rstar);
  }

  tb.alpha_bound = std::pow(base, 1.5 * tb.kappa) *
                   std::sqrt(sigma1 * static_cast<double>(r2) /
                             (94.5 * sr * static_cast<double>(r1) *
                              static_cast<double>(d_in)));
  tb.t_star_a = std::log(ratio) / std::log1p(eta * sigma_rstar);
  tb.t_star_b = tsb;

  const double m = static_cast<double>(r1) * static_cast<double>(d_in) /
                   static_cast<double>(r2);
  const double a0 = a0_norm > 0.0 ? a0_norm : tb.alpha_bound * (std::sqrt(m) + sr);
  tb.t_lin = std::log(sigma1 / (10.5 * sr * a0 * a0)) / (3.0 * std::log1p(eta * sigma1));
  return tb;
}

TheoryBounds theory_bounds(const Eigen::Ref<const Matrix>& gtilde0, const KronConfig& cfg,
                           double theta, double xi, double eta, Index r_star,
                           double a0_norm) {
  cfg.validate();
  if (gtilde0.rows() != cfg.kt_rows() || gtilde0.cols() != cfg.kt_cols()) {
    std::ostringstream msg;
    msg << "theory_bounds: gtilde0 is " << gtilde0.rows() << "x" << gtilde0.cols()
        << " but the config tiling implies " << cfg.kt_rows() << "x" << cfg.kt_cols();
    throw ShapeError(msg.str());
  }
  SvdResult dec = svd(gtilde0);
  if (r_star <= 0) {
    r_star = numerical_rank(dec.sigma, gtilde0.rows(), gtilde0.cols());
    if (r_star == 0)
      throw DegenerateSpectrumError("theory_bounds: gtilde0 is numerically zero");
  }
  if (r_star > dec.sigma.size())
    throw ShapeError("theory_bounds: r_star exceeds min dimension of gtilde0");
  return theory_bounds_from_spectrum(dec.sigma(0), dec.sigma(r_star - 1), r_star,
                                     cfg.r1, cfg.r2, cfg.r, cfg.d_in, theta, xi, eta,
                                     a0_norm);
}

AlignmentTrace train_and_trace(const SyntheticTask& task, KronAdapterState state,
                               const TraceOptions& opts) {
  if (opts.steps < 0) throw ParameterError("train_and_trace: steps must be >= 0");
  if (!(opts.eta > 0.0)) throw ParameterError("train_and_trace: eta must be positive");
  const KronConfig& cfg = state.config;
  if (task.x.rows() != cfg.d_in || task.y.rows() != cfg.d_out)
    throw ShapeError("train_and_trace: task dimensions disagree with the adapter config");

  const Matrix gt0 = kreshape(full_ft_gradient(task), cfg);
  const SvdResult gs = svd(gt0);

  AlignmentTrace tr;
  tr.sigma1 = gs.sigma(0);
  const Index grank = numerical_rank(gs.sigma, gt0.rows(), gt0.cols());
  tr.degenerate_signal = (grank == 0);
  Index r_star = opts.r_star > 0 ? opts.r_star : grank;
  if (r_star > std::min(gt0.rows(), gt0.cols()))
    throw ShapeError("train_and_trace: r_star exceeds min dimension of the reshaped gradient");
  tr.r_star = r_star;
  tr.sigma_rstar = (r_star >= 1) ? gs.sigma(r_star - 1) : 0.0;

  const bool do_align = opts.record_alignment && !tr.degenerate_signal && r_star >= 1;
  Matrix uperp, vperp;
  if (do_align) {
    if (r_star < gt0.rows()) uperp = orthonormal_complement(gs.u.leftCols(r_star));
    if (r_star < gt0.cols()) vperp = orthonormal_complement(gs.v.leftCols(r_star));
  }

  const Matrix at0 = stacked_a(state);
  const Matrix bt0 = stacked_b(state);
  const bool do_lin = opts.record_linerr && !tr.degenerate_signal && bt0.isZero(0.0);
  std::optional<LinearDynamics> lin;
  double lin_bound = kNaN;
  if (do_lin) {
    lin.emplace(gs, at0, opts.eta);
    lin_bound = spectral_norm(at0);
  }

  tr.rows.reserve(static_cast<size_t>(opts.steps) + 1);
  for (long t = 0; t <= opts.steps; ++t) {
    FullGradResult g = gradients_full(state, task.x, task.y);

    TraceRow row;
    row.step = t;
    row.loss = g.loss;
    double sa = 0.0, sb = 0.0;
    for (const PairGrad& pg : g.grads) {
      sa += pg.da.squaredNorm();
      sb += pg.db.squaredNorm();
    }
    row.grad_norm_a = std::sqrt(sa);
    row.grad_norm_b = std::sqrt(sb);
    row.input_grad_norm = input_grad_norm(state, g.resid);

    Matrix at, bt;
    if (do_align || do_lin) {
      at = stacked_a(state);
      bt = stacked_b(state);
    }
    if (do_align) {
      const AlignmentValue va = align_against(uperp, at, r_star);
      const AlignmentValue vb = align_against(vperp, bt, r_star);
      row.align_a = va.value;
      row.align_b = vb.value;
      tr.align_a_degenerate = tr.align_a_degenerate || va.degenerate;
      tr.align_b_degenerate = tr.align_b_degenerate || vb.degenerate;
      if (opts.theta >= 0.0) {
        if (tr.first_align_a < 0 && !va.degenerate && va.value <= opts.theta)
          tr.first_align_a = t;
        if (tr.first_align_b < 0 && !vb.degenerate && vb.value <= opts.theta)
          tr.first_align_b = t;
      }
    } else {
      row.align_a = kNaN;
      row.align_b = kNaN;
    }
    if (do_lin) {
      row.lin_err = linearization_error(at, bt, *lin, t);
      row.lin_err_bound = lin_bound;
    } else {
      row.lin_err = kNaN;
      row.lin_err_bound = kNaN;
    }
    tr.rows.push_back(row);

    if (opts.stop_on_theta && opts.theta >= 0.0 && tr.first_align_a >= 0 &&
        tr.first_align_b >= 0)
      break;
    if (t < opts.steps) apply_grads(state, g.grads, opts.eta);
  }
  return tr;
}

}  // namespace kronadapt
