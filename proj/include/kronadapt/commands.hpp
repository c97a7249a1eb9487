#ifndef KRONADAPT_COMMANDS_HPP
#define KRONADAPT_COMMANDS_HPP

#include <string>
#include <vector>

#include "kronadapt/types.hpp"

namespace kronadapt {

// Inputs for the `ksvd` command: decompose a matrix file under an (r1, r2)
// tiling, write the spectrum, truncation errors and factor files.
struct KsvdArgs {
  std::string input;
  Index r1 = 1;
  Index r2 = 1;
  Index k = 0;  // factors to keep; 0 means everything above the rank cutoff
  std::string outdir = ".";
};
int run_ksvd(const KsvdArgs& args);

// Inputs for `train-linear`: planted-task adapter training with alignment,
// gradient-norm and linearization-error traces plus the matching theory
// bounds, one trace/bounds file pair per seed.
struct TrainLinearArgs {
  Index d_in = 32;
  Index d_out = 32;
  Index n = 512;
  Index r1 = 2;
  Index r2 = 2;
  Index r = 4;
  double alpha = 1.0;
  Index r_star = 4;
  double noise_std = 0.0;
  double strength_decay = 1.0;  // planted sigma_i = strength_decay^i
  std::vector<unsigned long long> seeds{1};
  long steps = 200;
  double eta = 0.0;  // <= 0: 0.1 / sigma_1(G~0)
  double theta = 0.3;
  double xi = 0.5;
  std::string lambda_mode = "unit";  // unit | stabilized
  std::string init = "gaussian";     // gaussian | kaiming-uniform | kaiming-normal
  std::string random_side = "A";     // A | B
  double init_std = 0.0;             // > 0: explicit std for the gaussian init
  double init_std_frac = 1.0;        // otherwise init_std = frac * alpha_bound
  bool stop_on_theta = false;
  bool no_whiten = false;
  int jobs = 1;
  std::string outdir = ".";
};
int run_train_linear(const TrainLinearArgs& args);

// Inputs for `grad-stability`: run several component designs on one shared
// task and emit their per-step gradient norms side by side.
struct GradStabilityArgs {
  Index d_in = 64;
  Index d_out = 64;
  Index n = 256;
  std::vector<std::string> configs;  // "r1,r2,r" triples
  double alpha = 16.0;
  std::string lambda_mode = "stabilized";
  unsigned long long seed = 1;
  double eta = 0.02;
  long steps = 200;
  Index plant_r1 = 2;
  Index plant_r2 = 2;
  Index plant_rank = 8;
  double noise_std = 0.0;
  double signal_scale = 1.0;  // planted strengths are all signal_scale
  std::string init = "kaiming-uniform";
  std::string random_side = "A";
  int jobs = 1;
  std::string out = "grad_stability.csv";
};
int run_grad_stability(const GradStabilityArgs& args);

// Inputs for `plan`: budgeted component-design search.
struct PlanArgs {
  Index d_in = 1;
  Index d_out = 1;
  long long budget = 0;
  Index r_star_hint = 8;
  Index r1_min = 2;
  Index r1_max = 4;
  std::string out = "plan.json";
};
int run_plan(const PlanArgs& args);

}  // namespace kronadapt

#endif
