#include "kronadapt/adapter.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "kronadapt/io.hpp"

namespace kronadapt {

using nlohmann::json;

double lambda_for(const KronConfig& cfg, LambdaMode mode) {
  cfg.validate();
  if (mode == LambdaMode::Unit) return 1.0;
  return cfg.alpha / std::sqrt(static_cast<double>(cfg.r) * static_cast<double>(cfg.r2));
}

KronAdapterState init_adapter(const KronConfig& cfg, const Eigen::Ref<const Matrix>& w0,
                              const InitStrategy& strategy, Rng& rng, LambdaMode mode) {
  cfg.validate();
  if (w0.rows() != cfg.d_out || w0.cols() != cfg.d_in) {
    std::ostringstream msg;
    msg << "init_adapter: w0 is " << w0.rows() << "x" << w0.cols()
        << " but config says " << cfg.d_out << "x" << cfg.d_in;
    throw ShapeError(msg.str());
  }

  const bool a_random = strategy.random_side == RandomSide::A;
  const Index rnd_rows = a_random ? cfg.a_rows() : cfg.b_rows();
  const Index rnd_cols = a_random ? cfg.a_cols() : cfg.b_cols();
  const double fan_in = static_cast<double>(rnd_cols);

  KronAdapterState state;
  state.config = cfg;
  state.w0 = w0;
  state.lambda = lambda_for(cfg, mode);
  state.pairs.reserve(static_cast<size_t>(cfg.r));
  for (Index i = 0; i < cfg.r; ++i) {
    Matrix rnd;
    switch (strategy.distribution) {
      case InitDistribution::KaimingUniform:
        rnd = sample_uniform(rng, rnd_rows, rnd_cols, std::sqrt(6.0 / fan_in));
        break;
      case InitDistribution::KaimingNormal:
        rnd = sample_gaussian(rng, rnd_rows, rnd_cols, std::sqrt(2.0 / fan_in));
        break;
      case InitDistribution::GaussianStd:
        if (!(strategy.gaussian_std > 0.0))
          throw ParameterError("init_adapter: gaussian_std must be positive");
        rnd = sample_gaussian(rng, rnd_rows, rnd_cols, strategy.gaussian_std);
        break;
    }
    KronComponentPair p;
    if (a_random) {
      p.a = std::move(rnd);
      p.b = Matrix::Zero(cfg.b_rows(), cfg.b_cols());
    } else {
      p.a = Matrix::Zero(cfg.a_rows(), cfg.a_cols());
      p.b = std::move(rnd);
    }
    state.pairs.push_back(std::move(p));
  }
  return state;
}

namespace {

void check_batch(const KronAdapterState& state, const Eigen::Ref<const Matrix>& x,
                 const char* op) {
  if (x.rows() != state.config.d_in) {
    std::ostringstream msg;
    msg << op << ": input has " << x.rows() << " rows, layer expects "
        << state.config.d_in;
    throw ShapeError(msg.str());
  }
  if (x.cols() < 1) throw ShapeError(std::string(op) + ": batch must be non-empty");
}

}  // namespace

Matrix forward(const KronAdapterState& state, const Eigen::Ref<const Matrix>& x) {
  check_batch(state, x, "forward");
  const KronConfig& cfg = state.config;
  const Index n = x.cols();
  const Index ar = cfg.a_rows(), ac = cfg.a_cols();
  const Index br = cfg.b_rows(), bc = cfg.b_cols();

  Matrix y = state.w0 * x;
  Matrix t(ar, bc);
  Matrix u(ar, br);
  for (Index k = 0; k < n; ++k) {
    Eigen::Map<const Matrix> xk(x.col(k).data(), ac, bc);
    Eigen::Map<Matrix> yk(y.col(k).data(), ar, br);
    for (const KronComponentPair& p : state.pairs) {
      t.noalias() = p.a * xk;
      u.noalias() = t * p.b.transpose();
      yk += state.lambda * u;
    }
  }
  return y;
}

FullGradResult gradients_full(const KronAdapterState& state,
                              const Eigen::Ref<const Matrix>& x,
                              const Eigen::Ref<const Matrix>& y) {
  check_batch(state, x, "gradients");
  if (y.rows() != state.config.d_out || y.cols() != x.cols()) {
    std::ostringstream msg;
    msg << "gradients: targets are " << y.rows() << "x" << y.cols() << ", expected "
        << state.config.d_out << "x" << x.cols();
    throw ShapeError(msg.str());
  }
  const KronConfig& cfg = state.config;
  const Index n = x.cols();
  const Index ar = cfg.a_rows(), ac = cfg.a_cols();
  const Index br = cfg.b_rows(), bc = cfg.b_cols();
  const double scale = state.lambda / static_cast<double>(n);

  FullGradResult out;
  out.resid = forward(state, x) - y;
  out.loss = out.resid.squaredNorm() / (2.0 * static_cast<double>(n));
  out.grads.resize(state.pairs.size());
  for (size_t i = 0; i < state.pairs.size(); ++i) {
    out.grads[i].da = Matrix::Zero(ar, ac);
    out.grads[i].db = Matrix::Zero(br, bc);
  }

  Matrix vb(ar, bc);
  Matrix va(br, ac);
  for (Index k = 0; k < n; ++k) {
    Eigen::Map<const Matrix> xk(x.col(k).data(), ac, bc);
    Eigen::Map<const Matrix> vk(out.resid.col(k).data(), ar, br);
    for (size_t i = 0; i < state.pairs.size(); ++i) {
      const KronComponentPair& p = state.pairs[i];
      vb.noalias() = vk * p.b;
      out.grads[i].da.noalias() += scale * (vb * xk.transpose());
      va.noalias() = vk.transpose() * p.a;
      out.grads[i].db.noalias() += scale * (va * xk);
    }
  }
  return out;
}

GradResult gradients(const KronAdapterState& state, const Eigen::Ref<const Matrix>& x,
                     const Eigen::Ref<const Matrix>& y) {
  FullGradResult full = gradients_full(state, x, y);
  return GradResult{std::move(full.grads), full.loss};
}

void apply_grads(KronAdapterState& state, const std::vector<PairGrad>& grads, double eta) {
  if (grads.size() != state.pairs.size())
    throw ShapeError("apply_grads: gradient count disagrees with pair count");
  for (size_t i = 0; i < state.pairs.size(); ++i) {
    state.pairs[i].a -= eta * grads[i].da;
    state.pairs[i].b -= eta * grads[i].db;
  }
}

double gd_step(KronAdapterState& state, const Eigen::Ref<const Matrix>& x,
               const Eigen::Ref<const Matrix>& y, double eta) {
  GradResult g = gradients(state, x, y);
  apply_grads(state, g.grads, eta);
  return g.loss;
}

double input_grad_norm(const KronAdapterState& state, const Eigen::Ref<const Matrix>& resid) {
  const KronConfig& cfg = state.config;
  if (resid.rows() != cfg.d_out)
    throw ShapeError("input_grad_norm: residual rows disagree with d_out");
  const Index n = resid.cols();
  const Index ar = cfg.a_rows(), ac = cfg.a_cols();
  const Index br = cfg.b_rows(), bc = cfg.b_cols();
  const double scale = state.lambda / static_cast<double>(n);

  Matrix av(ac, br);
  Matrix gk(ac, bc);
  double si = 0.0;
  for (Index k = 0; k < n; ++k) {
    Eigen::Map<const Matrix> vk(resid.col(k).data(), ar, br);
    gk.setZero();
    for (const KronComponentPair& p : state.pairs) {
      av.noalias() = p.a.transpose() * vk;
      gk.noalias() += scale * (av * p.b);
    }
    si += gk.squaredNorm();
  }
  return std::sqrt(si);
}

GradNorms grad_norm_probe(const KronAdapterState& state, const Eigen::Ref<const Matrix>& x,
                          const Eigen::Ref<const Matrix>& y) {
  FullGradResult g = gradients_full(state, x, y);
  GradNorms norms;
  double sa = 0.0, sb = 0.0;
  for (const PairGrad& pg : g.grads) {
    sa += pg.da.squaredNorm();
    sb += pg.db.squaredNorm();
  }
  norms.norm_a = std::sqrt(sa);
  norms.norm_b = std::sqrt(sb);
  norms.norm_input = input_grad_norm(state, g.resid);
  return norms;
}

namespace {

json matrix_to_json(const Matrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = std::vector<double>(m.data(), m.data() + m.size());
  return j;
}

Matrix matrix_from_json(const json& j, const char* name) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw ParseError(std::string("state snapshot: malformed matrix object '") + name + "'");
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 1 || cols < 1 || static_cast<Index>(data.size()) != rows * cols)
    throw ParseError(std::string("state snapshot: matrix '") + name +
                     "' has inconsistent shape/data length");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

}  // namespace

void save_state(const KronAdapterState& state, const std::string& path) {
  json j;
  j["format"] = "kron-adapter-state-v1";
  j["layout"] = "column-major";
  j["config"] = {{"r1", state.config.r1},   {"r2", state.config.r2},
                 {"r", state.config.r},     {"d_in", state.config.d_in},
                 {"d_out", state.config.d_out}, {"alpha", state.config.alpha}};
  j["lambda"] = state.lambda;
  j["w0"] = matrix_to_json(state.w0);
  json pairs = json::array();
  for (const KronComponentPair& p : state.pairs) {
    pairs.push_back({{"a", matrix_to_json(p.a)}, {"b", matrix_to_json(p.b)}});
  }
  j["pairs"] = std::move(pairs);
  write_text_atomic(path, j.dump(2) + "\n");
}

KronAdapterState load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ":0: cannot open file");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (j.value("format", "") != "kron-adapter-state-v1")
    throw ParseError(path + ": unknown snapshot format");

  KronAdapterState state;
  const json& c = j.at("config");
  state.config.r1 = c.at("r1").get<Index>();
  state.config.r2 = c.at("r2").get<Index>();
  state.config.r = c.at("r").get<Index>();
  state.config.d_in = c.at("d_in").get<Index>();
  state.config.d_out = c.at("d_out").get<Index>();
  state.config.alpha = c.at("alpha").get<double>();
  state.config.validate();
  state.lambda = j.at("lambda").get<double>();
  state.w0 = matrix_from_json(j.at("w0"), "w0");
  if (state.w0.rows() != state.config.d_out || state.w0.cols() != state.config.d_in)
    throw ParseError(path + ": w0 shape disagrees with config");
  for (const json& pj : j.at("pairs")) {
    KronComponentPair p;
    p.a = matrix_from_json(pj.at("a"), "a");
    p.b = matrix_from_json(pj.at("b"), "b");
    if (p.a.rows() != state.config.a_rows() || p.a.cols() != state.config.a_cols() ||
        p.b.rows() != state.config.b_rows() || p.b.cols() != state.config.b_cols())
      throw ParseError(path + ": factor shape disagrees with config");
    state.pairs.push_back(std::move(p));
  }
  if (static_cast<Index>(state.pairs.size()) != state.config.r)
    throw ParseError(path + ": pair count disagrees with config r");
  return state;
}

}  // namespace kronadapt
