#ifndef KRONADAPT_ADAPTER_HPP
#define KRONADAPT_ADAPTER_HPP

#include <string>
#include <vector>

#include "kronadapt/kron.hpp"
#include "kronadapt/rng.hpp"

namespace kronadapt {

// Which factor family starts random; the other starts at exactly zero so the
// adapted layer matches the frozen base at step 0.
enum class RandomSide { A, B };

enum class InitDistribution {
  KaimingUniform,  // U(-sqrt(6/fan_in), sqrt(6/fan_in))
  KaimingNormal,   // N(0, 2/fan_in)
  GaussianStd,     // N(0, std^2) with std supplied explicitly
};

struct InitStrategy {
  RandomSide random_side = RandomSide::A;
  InitDistribution distribution = InitDistribution::KaimingUniform;
  double gaussian_std = 1.0;  // only read for GaussianStd
};

// How the scale factor in front of the Kronecker sum is chosen.
enum class LambdaMode {
  Stabilized,  // lambda = alpha / sqrt(r * r2), rank-stabilized scaling
  Unit,        // lambda = 1, the unscaled ablation
};

double lambda_for(const KronConfig& cfg, LambdaMode mode);

struct KronAdapterState {
  KronConfig config;
  Matrix w0;  // frozen base weight, d_out x d_in
  std::vector<KronComponentPair> pairs;
  double lambda = 1.0;
};

// Per-component gradients, same shapes as the factors they refer to.
struct PairGrad {
  Matrix da;
  Matrix db;
};

struct GradResult {
  std::vector<PairGrad> grads;
  double loss = 0.0;
};

// GradResult plus the residual forward(X) - Y that produced it, for callers
// that need both without paying for two forward passes.
struct FullGradResult {
  std::vector<PairGrad> grads;
  double loss = 0.0;
  Matrix resid;  // d_out x batch
};

struct GradNorms {
  double norm_a = 0.0;       // sqrt(sum_i ||dA_i||_F^2)
  double norm_b = 0.0;       // sqrt(sum_i ||dB_i||_F^2)
  double norm_input = 0.0;   // Frobenius norm of the loss gradient w.r.t. X,
                             // adapter path only (base weight excluded)
};

// fan_in is the column count of the factor being initialized: d_in/r2 for the
// A side, r2 for the B side.
KronAdapterState init_adapter(const KronConfig& cfg, const Eigen::Ref<const Matrix>& w0,
                              const InitStrategy& strategy, Rng& rng,
                              LambdaMode mode = LambdaMode::Stabilized);

// (W0 + lambda * sum_i B_i kron A_i) X, one sample per column, without ever
// materializing the d_out x d_in update. Auxiliary storage per sample stays
// O(d_in + d_out + r1 * r2).
Matrix forward(const KronAdapterState& state, const Eigen::Ref<const Matrix>& x);

// Gradients of L = ||Y - forward(X)||_F^2 / (2 N) w.r.t. every factor, plus
// the loss value itself (the forward pass is shared).
GradResult gradients(const KronAdapterState& state, const Eigen::Ref<const Matrix>& x,
                     const Eigen::Ref<const Matrix>& y);
FullGradResult gradients_full(const KronAdapterState& state,
                              const Eigen::Ref<const Matrix>& x,
                              const Eigen::Ref<const Matrix>& y);

// ||dL/dX||_F through the adapter path only, from a precomputed residual.
double input_grad_norm(const KronAdapterState& state, const Eigen::Ref<const Matrix>& resid);

// Applies factor <- factor - eta * grad to every pair; w0 stays untouched.
void apply_grads(KronAdapterState& state, const std::vector<PairGrad>& grads, double eta);

// One full-batch gradient-descent step with rate eta; both factor families
// update simultaneously from the pre-step gradients. w0 is never touched.
// Returns the loss at the pre-step iterate.
double gd_step(KronAdapterState& state, const Eigen::Ref<const Matrix>& x,
               const Eigen::Ref<const Matrix>& y, double eta);

GradNorms grad_norm_probe(const KronAdapterState& state, const Eigen::Ref<const Matrix>& x,
                          const Eigen::Ref<const Matrix>& y);

// JSON snapshot with explicit shapes and column-major data arrays; doubles
// survive the round trip bit-for-bit.
void save_state(const KronAdapterState& state, const std::string& path);
KronAdapterState load_state(const std::string& path);

}  // namespace kronadapt

#endif
