#include "kronadapt/commands.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "kronadapt/align.hpp"
#include "kronadapt/io.hpp"
#include "kronadapt/planner.hpp"

namespace kronadapt {

using nlohmann::json;

namespace {

constexpr const char* kTraceHeader =
    "step,loss,align_A,align_B,grad_norm_A,grad_norm_B,input_grad_norm,lin_err,"
    "lin_err_bound\n";

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return (std::filesystem::path(dir) / name).string();
}

void ensure_outdir(const std::string& dir) {
  if (dir.empty() || dir == ".") return;
  std::filesystem::create_directories(dir);
}

void warn_small_sample(Index n, Index d_in) {
  if (n < d_in)
    std::cerr << "warning: n=" << n << " is below d_in=" << d_in
              << "; gradient statistics will be noisy\n";
}

LambdaMode parse_lambda_mode(const std::string& s) {
  if (s == "unit") return LambdaMode::Unit;
  if (s == "stabilized") return LambdaMode::Stabilized;
  throw ParameterError("lambda mode must be 'unit' or 'stabilized', got '" + s + "'");
}

InitStrategy parse_init(const std::string& dist, const std::string& side, double std) {
  InitStrategy st;
  if (dist == "gaussian") {
    st.distribution = InitDistribution::GaussianStd;
    st.gaussian_std = std;
  } else if (dist == "kaiming-uniform") {
    st.distribution = InitDistribution::KaimingUniform;
  } else if (dist == "kaiming-normal") {
    st.distribution = InitDistribution::KaimingNormal;
  } else {
    throw ParameterError(
        "init must be 'gaussian', 'kaiming-uniform' or 'kaiming-normal', got '" + dist +
        "'");
  }
  if (side == "A" || side == "a") {
    st.random_side = RandomSide::A;
  } else if (side == "B" || side == "b") {
    st.random_side = RandomSide::B;
  } else {
    throw ParameterError("random side must be 'A' or 'B', got '" + side + "'");
  }
  return st;
}

// Runs fn(i) for i in [0, count) on up to jobs threads. Results must be
// written to per-index slots; the first exception wins and is rethrown.
void parallel_for(int jobs, size_t count, const std::function<void(size_t)>& fn) {
  if (jobs < 1) throw ParameterError("jobs must be >= 1");
  const size_t nthreads = std::min<size_t>(static_cast<size_t>(jobs), count);
  if (nthreads <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::string trace_csv(const AlignmentTrace& tr) {
  std::string out = kTraceHeader;
  for (const TraceRow& row : tr.rows) {
    out += std::to_string(row.step);
    out += ",";
    out += csv_row({row.loss, row.align_a, row.align_b, row.grad_norm_a, row.grad_norm_b,
                    row.input_grad_norm, row.lin_err, row.lin_err_bound});
  }
  return out;
}

json bounds_json(const TheoryBounds& tb) {
  json j;
  j["alpha_bound"] = tb.alpha_bound;
  j["t_star_A"] = tb.t_star_a;
  j["t_star_B"] = tb.t_star_b;
  j["t_lin"] = tb.t_lin;
  j["kappa"] = tb.kappa;
  j["r_star"] = tb.r_star;
  j["regime"] = regime_name(tb.regime);
  j["sigma1"] = tb.sigma1;
  j["sigma_rstar"] = tb.sigma_rstar;
  return j;
}

}  // namespace

int run_ksvd(const KsvdArgs& args) {
  if (args.k < 0) throw ParameterError("ksvd: k must be >= 0");
  const Matrix input = read_matrix(args.input);
  KronConfig cfg;
  cfg.r1 = args.r1;
  cfg.r2 = args.r2;
  cfg.r = 1;
  cfg.d_out = input.rows();
  cfg.d_in = input.cols();
  cfg.validate();

  const Matrix kt = kreshape(input, cfg);
  const SvdResult full = svd(kt);
  const KSVDResult dec = ksvd(input, cfg);
  const Index rank = dec.sigmas.size();
  const Index keep = args.k == 0 ? rank : std::min<Index>(args.k, rank);

  ensure_outdir(args.outdir);
  const double input_norm = input.norm();

  json report;
  report["input"] = args.input;
  report["rows"] = input.rows();
  report["cols"] = input.cols();
  report["r1"] = args.r1;
  report["r2"] = args.r2;
  report["rank"] = rank;
  report["kept"] = keep;
  report["sigmas"] = std::vector<double>(full.sigma.data(),
                                         full.sigma.data() + full.sigma.size());

  Matrix partial = Matrix::Zero(input.rows(), input.cols());
  json truncations = json::array();
  for (Index k = 1; k <= keep; ++k) {
    const KronComponentPair& p = dec.pairs[static_cast<size_t>(k - 1)];
    partial += dec.sigmas(k - 1) * kron_product(p.b, p.a);
    double tail = 0.0;
    for (Index i = k; i < full.sigma.size(); ++i) tail += full.sigma(i) * full.sigma(i);
    const double err = (input - partial).norm();
    json row;
    row["k"] = k;
    row["tail_energy"] = std::sqrt(tail);
    row["recon_error"] = err;
    row["recon_error_rel"] = input_norm > 0.0 ? err / input_norm : err;
    truncations.push_back(std::move(row));

    std::ostringstream an, bn;
    an << "A_" << k << ".txt";
    bn << "B_" << k << ".txt";
    write_matrix(join_path(args.outdir, an.str()), p.a);
    write_matrix(join_path(args.outdir, bn.str()), p.b);
  }
  report["truncations"] = std::move(truncations);
  write_text_atomic(join_path(args.outdir, "ksvd_report.json"), report.dump(2) + "\n");
  return 0;
}

int run_train_linear(const TrainLinearArgs& args) {
  if (args.seeds.empty()) throw ParameterError("train-linear: need at least one seed");
  if (args.steps < 0) throw ParameterError("train-linear: steps must be >= 0");
  ensure_outdir(args.outdir);

  KronConfig cfg;
  cfg.r1 = args.r1;
  cfg.r2 = args.r2;
  cfg.r = args.r;
  cfg.d_in = args.d_in;
  cfg.d_out = args.d_out;
  cfg.alpha = args.alpha;
  cfg.validate();
  const LambdaMode mode = parse_lambda_mode(args.lambda_mode);
  warn_small_sample(args.n, args.d_in);

  parallel_for(args.jobs, args.seeds.size(), [&](size_t idx) {
    const unsigned long long seed = args.seeds[idx];
    Rng rng(seed);

    TaskOptions topt;
    topt.noise_std = args.noise_std;
    topt.whiten = !args.no_whiten;
    if (args.strength_decay != 1.0) {
      Vector c(args.r_star);
      for (Index i = 0; i < args.r_star; ++i) c(i) = std::pow(args.strength_decay, i);
      topt.strengths = c;
    }
    const SyntheticTask task = make_task(rng, cfg, args.n, args.r_star, topt);

    const Matrix gt0 = kreshape(full_ft_gradient(task), cfg);
    const SvdResult gs = svd(gt0);
    const double sigma1 = gs.sigma(0);
    const double eta = args.eta > 0.0 ? args.eta : 0.1 / sigma1;

    TheoryBounds tb = theory_bounds(gt0, cfg, args.theta, args.xi, eta, args.r_star);
    double init_std = args.init_std;
    if (!(init_std > 0.0)) init_std = args.init_std_frac * tb.alpha_bound;

    const InitStrategy strategy = parse_init(args.init, args.random_side, init_std);
    KronAdapterState state = init_adapter(cfg, task.w0, strategy, rng, mode);

    const Matrix at0 = stacked_a(state);
    if (at0.cwiseAbs().maxCoeff() > 0.0)
      tb = theory_bounds(gt0, cfg, args.theta, args.xi, eta, args.r_star,
                         spectral_norm(at0));

    TraceOptions topts;
    topts.steps = args.steps;
    topts.eta = eta;
    topts.r_star = args.r_star;
    topts.theta = args.theta;
    topts.stop_on_theta = args.stop_on_theta;
    const AlignmentTrace tr = train_and_trace(task, std::move(state), topts);

    std::ostringstream tag;
    tag << "seed" << seed;
    write_text_atomic(join_path(args.outdir, "trace_" + tag.str() + ".csv"),
                      trace_csv(tr));

    json bj = bounds_json(tb);
    bj["seed"] = seed;
    bj["eta"] = eta;
    bj["theta"] = args.theta;
    bj["xi"] = args.xi;
    bj["init_std"] = init_std;
    bj["lambda"] = lambda_for(cfg, mode);
    bj["first_align_A"] = tr.first_align_a;
    bj["first_align_B"] = tr.first_align_b;
    bj["degenerate_signal"] = tr.degenerate_signal;
    write_text_atomic(join_path(args.outdir, "bounds_" + tag.str() + ".json"),
                      bj.dump(2) + "\n");
  });
  return 0;
}

int run_grad_stability(const GradStabilityArgs& args) {
  if (args.configs.empty())
    throw ParameterError("grad-stability: need at least one --config triple");
  if (args.steps < 0) throw ParameterError("grad-stability: steps must be >= 0");

  std::vector<KronConfig> cfgs;
  std::vector<std::string> tags;
  for (const std::string& text : args.configs) {
    KronConfig cfg;
    cfg.d_in = args.d_in;
    cfg.d_out = args.d_out;
    cfg.alpha = args.alpha;
    char c1 = 0, c2 = 0;
    long long r1 = 0, r2 = 0, r = 0;
    std::istringstream ss(text);
    if (!(ss >> r1 >> c1 >> r2 >> c2 >> r) || c1 != ',' || c2 != ',' || (ss >> c1))
      throw ParameterError("grad-stability: config must be 'r1,r2,r', got '" + text + "'");
    cfg.r1 = static_cast<Index>(r1);
    cfg.r2 = static_cast<Index>(r2);
    cfg.r = static_cast<Index>(r);
    cfg.validate();
    cfgs.push_back(cfg);
    std::ostringstream tag;
    tag << r1 << "x" << r2 << "x" << r;
    tags.push_back(tag.str());
  }
  const LambdaMode mode = parse_lambda_mode(args.lambda_mode);
  warn_small_sample(args.n, args.d_in);

  KronConfig plant;
  plant.r1 = args.plant_r1;
  plant.r2 = args.plant_r2;
  plant.r = std::max<Index>(args.plant_rank, 1);
  plant.d_in = args.d_in;
  plant.d_out = args.d_out;
  plant.alpha = args.alpha;

  Rng task_rng(args.seed);
  TaskOptions topt;
  topt.noise_std = args.noise_std;
  if (args.signal_scale != 1.0)
    topt.strengths = Vector::Constant(args.plant_rank, args.signal_scale);
  const SyntheticTask task = make_task(task_rng, plant, args.n, args.plant_rank, topt);

  std::vector<AlignmentTrace> traces(cfgs.size());
  parallel_for(args.jobs, cfgs.size(), [&](size_t i) {
    Rng init_rng(args.seed + 1 + static_cast<unsigned long long>(i));
    const InitStrategy strategy = parse_init(args.init, args.random_side, 1.0);
    KronAdapterState state = init_adapter(cfgs[i], task.w0, strategy, init_rng, mode);
    TraceOptions topts;
    topts.steps = args.steps;
    topts.eta = args.eta;
    topts.record_alignment = false;
    topts.record_linerr = false;
    traces[i] = train_and_trace(task, std::move(state), topts);
  });

  std::string out = "step";
  for (const std::string& tag : tags) {
    out += ",grad_norm_A[" + tag + "]";
    out += ",grad_norm_B[" + tag + "]";
    out += ",input_grad_norm[" + tag + "]";
  }
  out += "\n";
  for (long t = 0; t <= args.steps; ++t) {
    out += std::to_string(t);
    for (const AlignmentTrace& tr : traces) {
      const TraceRow& row = tr.rows[static_cast<size_t>(t)];
      out += "," + format_double(row.grad_norm_a);
      out += "," + format_double(row.grad_norm_b);
      out += "," + format_double(row.input_grad_norm);
    }
    out += "\n";
  }
  const std::filesystem::path parent = std::filesystem::path(args.out).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  write_text_atomic(args.out, out);
  return 0;
}

int run_plan(const PlanArgs& args) {
  BudgetQuery q;
  q.d_in = args.d_in;
  q.d_out = args.d_out;
  q.budget = args.budget;
  q.r_star_hint = args.r_star_hint;
  q.r1_min = args.r1_min;
  q.r1_max = args.r1_max;

  const std::vector<KronConfig> candidates = enumerate_feasible(q);
  const PlanResult res = rank_configs(q, candidates);

  json j;
  j["query"] = {{"d_in", q.d_in},   {"d_out", q.d_out},
                {"budget", q.budget}, {"r_star_hint", q.r_star_hint},
                {"r1_min", q.r1_min}, {"r1_max", q.r1_max}};
  json ranked = json::array();
  for (const PlanEntry& e : res.ranked) {
    json ej;
    ej["r1"] = e.config.r1;
    ej["r2"] = e.config.r2;
    ej["r"] = e.config.r;
    ej["params"] = e.params;
    ej["max_rank"] = e.max_rank;
    ej["notes"] = e.notes;
    ranked.push_back(std::move(ej));
  }
  j["ranked"] = std::move(ranked);
  const std::filesystem::path parent = std::filesystem::path(args.out).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  write_text_atomic(args.out, j.dump(2) + "\n");
  return 0;
}

}  // namespace kronadapt
