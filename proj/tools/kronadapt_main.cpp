// Command-line front end for the Kronecker adapter toolkit.
//
// Subcommands:
//   ksvd            tiled Kronecker decomposition of a matrix file
//   train-linear    planted-task training with alignment + theory bounds
//   grad-stability  gradient-norm comparison across component designs
//   plan            budgeted component-design search
//
// Options can also come from a key=value config file (--config-file), with
// command-line flags taking precedence. KRONADAPT_OUT sets the default
// output location.

#include <CLI11.hpp>

#include <cstdio>

#include "kronadapt/commands.hpp"
#include "kronadapt/types.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kronecker adapter toolkit"};
  app.require_subcommand(1);
  app.set_config("--config-file", "", "key=value config file; flags override it");

  kronadapt::KsvdArgs ksvd;
  CLI::App* c_ksvd = app.add_subcommand("ksvd", "decompose a matrix file");
  c_ksvd->add_option("--input", ksvd.input, "matrix file ('rows cols' header)")
      ->required();
  c_ksvd->add_option("--r1", ksvd.r1, "block rows; must divide the matrix rows")
      ->required();
  c_ksvd->add_option("--r2", ksvd.r2, "block grid columns; must divide the matrix cols")
      ->required();
  c_ksvd->add_option("--k", ksvd.k, "factor pairs to keep (0 = all above rank cutoff)");
  c_ksvd->add_option("--outdir", ksvd.outdir, "output directory")
      ->envname("KRONADAPT_OUT");

  kronadapt::TrainLinearArgs train;
  CLI::App* c_train = app.add_subcommand("train-linear", "train on a planted task");
  c_train->add_option("--d-in", train.d_in, "input width");
  c_train->add_option("--d-out", train.d_out, "output width");
  c_train->add_option("--n", train.n, "sample count");
  c_train->add_option("--r1", train.r1, "component rows");
  c_train->add_option("--r2", train.r2, "component grid columns");
  c_train->add_option("--r", train.r, "component count");
  c_train->add_option("--alpha", train.alpha, "scale knob for the stabilized mode");
  c_train->add_option("--r-star", train.r_star, "planted rank");
  c_train->add_option("--noise-std", train.noise_std, "target noise std");
  c_train->add_option("--strength-decay", train.strength_decay,
                      "planted sigma_i = decay^i");
  c_train->add_option("--seed", train.seeds, "seed (repeatable)");
  c_train->add_option("--steps", train.steps, "gradient steps");
  c_train->add_option("--eta", train.eta, "step size (<= 0: 0.1 / sigma_1)");
  c_train->add_option("--theta", train.theta, "alignment threshold");
  c_train->add_option("--xi", train.xi, "margin parameter in (0, 1]");
  c_train->add_option("--lambda-mode", train.lambda_mode, "unit | stabilized");
  c_train->add_option("--init", train.init,
                      "gaussian | kaiming-uniform | kaiming-normal");
  c_train->add_option("--random-side", train.random_side, "A | B");
  c_train->add_option("--init-std", train.init_std, "explicit gaussian init std");
  c_train->add_option("--init-std-frac", train.init_std_frac,
                      "gaussian init std as a fraction of the alpha bound");
  c_train->add_flag("--stop-on-theta", train.stop_on_theta,
                    "stop once both alignments reach theta");
  c_train->add_flag("--no-whiten", train.no_whiten, "raw i.i.d. inputs, no whitening");
  c_train->add_option("--jobs", train.jobs, "worker pool size for seed sweeps");
  c_train->add_option("--outdir", train.outdir, "output directory")
      ->envname("KRONADAPT_OUT");

  kronadapt::GradStabilityArgs grad;
  CLI::App* c_grad = app.add_subcommand("grad-stability",
                                        "compare gradient norms across designs");
  c_grad->add_option("--d-in", grad.d_in, "input width");
  c_grad->add_option("--d-out", grad.d_out, "output width");
  c_grad->add_option("--n", grad.n, "sample count");
  c_grad->add_option("--config", grad.configs, "design triple r1,r2,r (repeatable)")
      ->required();
  c_grad->add_option("--alpha", grad.alpha, "scale knob for the stabilized mode");
  c_grad->add_option("--lambda-mode", grad.lambda_mode, "unit | stabilized");
  c_grad->add_option("--seed", grad.seed, "task seed");
  c_grad->add_option("--eta", grad.eta, "step size");
  c_grad->add_option("--steps", grad.steps, "gradient steps");
  c_grad->add_option("--plant-r1", grad.plant_r1, "tiling rows of the planted update");
  c_grad->add_option("--plant-r2", grad.plant_r2, "tiling cols of the planted update");
  c_grad->add_option("--plant-rank", grad.plant_rank, "rank of the planted update");
  c_grad->add_option("--noise-std", grad.noise_std, "target noise std");
  c_grad->add_option("--signal-scale", grad.signal_scale, "planted strength scale");
  c_grad->add_option("--init", grad.init,
                     "gaussian | kaiming-uniform | kaiming-normal");
  c_grad->add_option("--random-side", grad.random_side, "A | B");
  c_grad->add_option("--jobs", grad.jobs, "worker pool size across designs");
  c_grad->add_option("--out", grad.out, "output CSV path")->envname("KRONADAPT_OUT");

  kronadapt::PlanArgs plan;
  CLI::App* c_plan = app.add_subcommand("plan", "search designs under a budget");
  c_plan->add_option("--d-in", plan.d_in, "input width")->required();
  c_plan->add_option("--d-out", plan.d_out, "output width")->required();
  c_plan->add_option("--budget", plan.budget, "parameter budget")->required();
  c_plan->add_option("--r-star-hint", plan.r_star_hint, "expected update rank");
  c_plan->add_option("--r1-min", plan.r1_min, "smallest r1 to consider");
  c_plan->add_option("--r1-max", plan.r1_max, "largest r1 to consider");
  c_plan->add_option("--out", plan.out, "output JSON path")->envname("KRONADAPT_OUT");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_ksvd->parsed()) return kronadapt::run_ksvd(ksvd);
    if (c_train->parsed()) return kronadapt::run_train_linear(train);
    if (c_grad->parsed()) return kronadapt::run_grad_stability(grad);
    if (c_plan->parsed()) return kronadapt::run_plan(plan);
  } catch (const kronadapt::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
