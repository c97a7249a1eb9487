#ifndef KRONADAPT_ALIGN_HPP
#define KRONADAPT_ALIGN_HPP

#include <vector>

#include "kronadapt/adapter.hpp"
#include "kronadapt/linalg.hpp"

namespace kronadapt {

// Regression task with a planted low-rank-in-reshaped-space update:
// Y = (W0 + Delta) X + noise, where kreshape(Delta) has rank exactly
// planted_rank under the plant_config tiling.
struct SyntheticTask {
  Matrix x;      // d_in x n
  Matrix y;      // d_out x n
  Matrix w0;     // d_out x d_in, frozen
  Matrix delta;  // d_out x d_in, the planted update
  KronConfig plant_config;
  Index planted_rank = 0;
  Vector strengths;  // planted singular values, descending
  double noise_std = 0.0;
  bool whitened = true;
  // Fewer samples than d_in: the one-step gradient statistics are unreliable.
  // Callers that surface tasks to users should warn on this.
  bool small_sample = false;
};

struct TaskOptions {
  double noise_std = 0.0;
  // Planted singular values; empty means all ones. Must be positive and
  // non-increasing, length planted_rank.
  Vector strengths;
  // Row-whiten X so X X^T == n * I exactly (needs n >= d_in). This makes the
  // one-step full fine-tuning gradient equal Delta exactly, so its reshaped
  // rank and spectrum are the planted ones to machine precision. Turning it
  // off leaves raw i.i.d. Gaussian columns.
  bool whiten = true;
};

// Builds the task. plant_cfg supplies d_in/d_out and the tiling for the
// planted factors; r_star must fit both reshaped dimensions.
SyntheticTask make_task(Rng& rng, const KronConfig& plant_cfg, Index n, Index r_star,
                        const TaskOptions& opts = {});

// (Y - W0 X) X^T / n: the gradient of the full fine-tuning objective at W0,
// up to sign. Its kreshape seeds every alignment quantity below.
Matrix full_ft_gradient(const SyntheticTask& task);

// Columns are vec(A_i) (resp. vec(B_i)) of the adapter factors.
Matrix stacked_a(const KronAdapterState& state);
Matrix stacked_b(const KronAdapterState& state);

struct AlignmentValue {
  double value = 1.0;
  bool degenerate = false;  // factor matrix had numerical rank < r_star
};

// || U_perp(G)^T U_top(M) ||_2 where U_top(M) spans the top r_star left
// singular directions of M and U_perp(G) the complement of G's top r_star
// left directions. 0 = fully aligned, 1 = orthogonal. r_star equal to the
// row count means there is no complement and the value is 0 by convention.
AlignmentValue alignment_A(const Eigen::Ref<const Matrix>& gtilde0,
                           const Eigen::Ref<const Matrix>& atilde, Index r_star);

// Same on the right factors: complement of G's top right singular directions
// against the top left directions of B-tilde (i.e. the row space of B^T).
AlignmentValue alignment_B(const Eigen::Ref<const Matrix>& gtilde0,
                           const Eigen::Ref<const Matrix>& btilde, Index r_star);

// Closed-form trajectory of the coupled linearized updates
//   A_{t+1} = A_t + eta * G B_t,  B_{t+1} = B_t + eta * G^T A_t
// started from (A_0, 0), expressed through the thin SVD of G.
class LinearDynamics {
 public:
  LinearDynamics(const SvdResult& g_svd, const Matrix& atilde0, double eta);

  Matrix atilde(long t) const;
  Matrix btilde(long t) const;

 private:
  Matrix u_, v_;   // m x k, n x k
  Vector sigma_;   // k
  Matrix a0_;      // m x r
  Matrix proj_;    // k x r, U^T A_0
  double eta_;
};

// || [A_t; B_t] - [A_t^lin; B_t^lin] ||_2, the spectral norm of the stacked
// deviation from the linearized trajectory.
double linearization_error(const Eigen::Ref<const Matrix>& atilde,
                           const Eigen::Ref<const Matrix>& btilde,
                           const LinearDynamics& lin, long t);

enum class Regime {
  RLtRStar,         // r < r_star: guarantees do not apply
  RStarLeRLt2RStar, // r_star <= r < 2 r_star
  RGe2RStar,        // r >= 2 r_star
};

const char* regime_name(Regime regime);

struct TheoryBounds {
  double alpha_bound = 0.0;  // largest admissible init std
  double t_star_a = 0.0;     // A-side alignment step bound
  double t_star_b = 0.0;     // B-side alignment step bound
  double t_lin = 0.0;        // horizon of the linearization guarantee
  double kappa = 0.0;        // sigma_1 / sigma_{r_star} of G~0
  Index r_star = 0;
  Regime regime = Regime::RLtRStar;
  double sigma1 = 0.0;
  double sigma_rstar = 0.0;
};

// Pure closed forms, no matrix inputs; the spectrum is passed in. a0_norm is
// ||A~0||_2 for the t_lin horizon; pass a non-positive value to have it
// predicted for a Gaussian init at the computed alpha bound.
TheoryBounds theory_bounds_from_spectrum(double sigma1, double sigma_rstar, Index r_star,
                                         Index r1, Index r2, Index r, Index d_in,
                                         double theta, double xi, double eta,
                                         double a0_norm = -1.0);

// Same, reading sigma_1 / sigma_{r_star} off gtilde0. r_star <= 0 means "use
// the numerical rank of gtilde0". Throws DegenerateSpectrumError when
// sigma_{r_star} vanishes.
TheoryBounds theory_bounds(const Eigen::Ref<const Matrix>& gtilde0, const KronConfig& cfg,
                           double theta, double xi, double eta, Index r_star = -1,
                           double a0_norm = -1.0);

struct TraceRow {
  long step = 0;
  double loss = 0.0;
  double align_a = 1.0;
  double align_b = 1.0;
  double grad_norm_a = 0.0;
  double grad_norm_b = 0.0;
  double input_grad_norm = 0.0;
  double lin_err = 0.0;
  double lin_err_bound = 0.0;
};

struct AlignmentTrace {
  std::vector<TraceRow> rows;
  Index r_star = 0;
  double sigma1 = 0.0;
  double sigma_rstar = 0.0;
  // No usable signal: G~0 is numerically zero; alignment columns are NaN.
  bool degenerate_signal = false;
  // Some row hit the rank-deficient alignment edge case.
  bool align_a_degenerate = false;
  bool align_b_degenerate = false;
  long first_align_a = -1;  // first step with align_A <= theta, -1 if never
  long first_align_b = -1;
};

struct TraceOptions {
  long steps = 100;
  double eta = 0.1;
  Index r_star = -1;       // <= 0: numerical rank of G~0
  double theta = -1.0;     // >= 0: record first steps where alignment <= theta
  bool stop_on_theta = false;  // stop early once both alignments are <= theta
  bool record_alignment = true;
  bool record_linerr = true;
};

// Full-batch gradient descent on the adapter factors, one trace row per step
// (row t describes the iterate before update t; the row count is steps + 1
// unless stop_on_theta fires). The linearized-trajectory columns are NaN when
// the init has a nonzero B side or when the closed form overflows.
AlignmentTrace train_and_trace(const SyntheticTask& task, KronAdapterState state,
                               const TraceOptions& opts);

}  // namespace kronadapt

#endif
