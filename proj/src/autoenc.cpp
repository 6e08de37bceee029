#include "hyperclust/autoenc.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "hyperclust/error.hpp"
#include "hyperclust/rng.hpp"

namespace hyperclust {

Optimizer parse_optimizer(std::string_view name) {
  if (name == "plain_gd" || name == "gd") return Optimizer::PlainGd;
  if (name == "adaptive_moments" || name == "adam") return Optimizer::AdaptiveMoments;
  throw InvalidInput("unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(Optimizer opt) {
  return opt == Optimizer::PlainGd ? "plain_gd" : "adaptive_moments";
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidInput("learning_rate must be positive");
  }
  if (epochs < 1) throw InvalidInput("epochs must be >= 1");
  if (hidden_dim < 1) throw InvalidInput("hidden_dim must be >= 1");
  if (embed_dim < 1) throw InvalidInput("embed_dim must be >= 1");
  if (pos_weight && (!(*pos_weight > 0.0) || !std::isfinite(*pos_weight))) {
    throw InvalidInput("pos_weight must be positive");
  }
}

namespace {

void check_params(const DenseMatrix& x, const EncoderParams& params) {
  if (params.theta1.rows() != x.cols() || params.theta2.rows() != params.theta1.cols()) {
    throw ShapeError("encoder parameters " + params.theta1.shape_string() + ", " +
                     params.theta2.shape_string() + " do not fit features " + x.shape_string());
  }
}

void check_operator(const SparseMatrix& op, const DenseMatrix& x) {
  if (op.rows() != op.cols() || op.cols() != x.rows()) {
    throw ShapeError("propagation operator " + op.shape_string() + " does not fit features " +
                     x.shape_string());
  }
}

void check_target(const SparseMatrix& target, std::size_t n) {
  if (target.rows() != n || target.cols() != n) {
    throw ShapeError("reconstruction target " + target.shape_string() + " does not fit " +
                     std::to_string(n) + " embeddings");
  }
}

// Everything the forward/backward passes reuse across epochs.
struct Problem {
  const SparseMatrix& op;
  SparseMatrix op_t;
  SparseMatrix features;
  SparseMatrix features_t;
  const SparseMatrix& target;
  SparseMatrix target_t;

  Problem(const SparseMatrix& p, const DenseMatrix& x, const SparseMatrix& t)
      : op(p),
        op_t(p.transpose()),
        features(SparseMatrix::from_dense(x)),
        features_t(features.transpose()),
        target(t),
        target_t(t.transpose()) {}
};

struct Forward {
  DenseMatrix pre_activation;  // P X θ1
  DenseMatrix hidden;          // ReLU(P X θ1)
  DenseMatrix z;               // P (hidden θ2)
};

Forward forward(const SparseMatrix& op, const SparseMatrix& features, const EncoderParams& params) {
  Forward f;
  f.pre_activation = spmm(op, spmm(features, params.theta1));
  f.hidden = map_elementwise(f.pre_activation, Activation::Relu);
  f.z = spmm(op, gemm(f.hidden, params.theta2));
  return f;
}

// Walks one sparse row alongside a dense column sweep.
class RowCursor {
 public:
  RowCursor(const SparseMatrix& m, std::size_t row) : cols_(m.row_cols(row)), vals_(m.row_values(row)) {}

  double value_at(std::size_t col) {
    while (pos_ < cols_.size() && cols_[pos_] < col) ++pos_;
    return pos_ < cols_.size() && cols_[pos_] == col ? vals_[pos_] : 0.0;
  }

 private:
  std::span<const std::size_t> cols_;
  std::span<const double> vals_;
  std::size_t pos_ = 0;
};

// Loss over all n² logits and, when `grad_z` is non-null, dL/dZ. Logits are
// formed row by row, so the n x n matrix is never stored.
double loss_and_grad(const DenseMatrix& z, const SparseMatrix& target, const SparseMatrix& target_t,
                     double pos_weight, DenseMatrix* grad_z) {
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  std::vector<double> row_loss(n, 0.0);
  if (grad_z) *grad_z = DenseMatrix(n, d);
  const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  const auto n_rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n_rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* zi = z.row(i).data();
    RowCursor t_row(target, i);
    RowCursor t_col(target_t, i);
    double* gi = grad_z ? grad_z->row(i).data() : nullptr;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double* zj = z.row(j).data();
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += zi[c] * zj[c];
      const double t_ij = t_row.value_at(j);
      const double e = std::exp(-std::abs(s));
      const double log1p_e = std::log1p(e);
      const double neg_log_sig = (s < 0.0 ? -s : 0.0) + log1p_e;       // -ln σ(s)
      const double neg_log_one_minus = (s > 0.0 ? s : 0.0) + log1p_e;  // -ln(1 - σ(s))
      acc += pos_weight * t_ij * neg_log_sig + (1.0 - t_ij) * neg_log_one_minus;
      if (gi) {
        const double sig = s >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
        const double t_ji = t_col.value_at(j);
        // dL/ds_ij + dL/ds_ji, both depend on z_i·z_j.
        const double g = (sig * (pos_weight * t_ij + 1.0 - t_ij) - pos_weight * t_ij) +
                         (sig * (pos_weight * t_ji + 1.0 - t_ji) - pos_weight * t_ji);
        const double scaled = g * inv_n2;
        for (std::size_t c = 0; c < d; ++c) gi[c] += scaled * zj[c];
      }
    }
    row_loss[i] = acc;
  }
  double total = 0.0;
  for (double v : row_loss) total += v;
  return total * inv_n2;
}

Gradients backward(const Problem& prob, const EncoderParams& params, double pos_weight) {
  const Forward f = forward(prob.op, prob.features, params);
  DenseMatrix grad_z;
  Gradients g;
  g.loss = loss_and_grad(f.z, prob.target, prob.target_t, pos_weight, &grad_z);

  // Z = P·(Hθ2)
  const DenseMatrix grad_h_theta2 = spmm(prob.op_t, grad_z);
  g.d_theta2 = gemm_tn(f.hidden, grad_h_theta2);
  DenseMatrix grad_pre = gemm(grad_h_theta2, params.theta2, Transpose::Yes);
  auto pre = f.pre_activation.values();
  auto gp = grad_pre.values();
  for (std::size_t k = 0; k < gp.size(); ++k) {
    if (!(pre[k] > 0.0)) gp[k] = 0.0;
  }
  // pre = P·X·θ1
  g.d_theta1 = spmm(prob.features_t, spmm(prob.op_t, grad_pre));
  return g;
}

struct MomentState {
  std::vector<double> first;
  std::vector<double> second;
};

void adam_step(DenseMatrix& param, const DenseMatrix& grad, MomentState& st, double lr, std::size_t step) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  auto p = param.values();
  auto g = grad.values();
  if (st.first.empty()) {
    st.first.assign(p.size(), 0.0);
    st.second.assign(p.size(), 0.0);
  }
  const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t k = 0; k < p.size(); ++k) {
    st.first[k] = beta1 * st.first[k] + (1.0 - beta1) * g[k];
    st.second[k] = beta2 * st.second[k] + (1.0 - beta2) * g[k] * g[k];
    const double m_hat = st.first[k] / bias1;
    const double v_hat = st.second[k] / bias2;
    p[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void gd_step(DenseMatrix& param, const DenseMatrix& grad, double lr) {
  auto p = param.values();
  auto g = grad.values();
  for (std::size_t k = 0; k < p.size(); ++k) p[k] -= lr * g[k];
}

}  // namespace

DenseMatrix encode(const SparseMatrix& op, const DenseMatrix& x, const EncoderParams& params) {
  check_operator(op, x);
  check_params(x, params);
  return forward(op, SparseMatrix::from_dense(x), params).z;
}

DenseMatrix decode(const DenseMatrix& z) {
  return map_elementwise(gemm(z, z, Transpose::Yes), Activation::Sigmoid);
}

double reconstruction_loss(const DenseMatrix& z, const SparseMatrix& target, double pos_weight) {
  check_target(target, z.rows());
  return loss_and_grad(z, target, target.transpose(), pos_weight, nullptr);
}

double auto_pos_weight(const SparseMatrix& target) {
  double ones = 0.0;
  for (double v : target.values()) ones += v;
  if (ones <= 0.0) return 1.0;
  const double total = static_cast<double>(target.rows()) * static_cast<double>(target.cols());
  return (total - ones) / ones;
}

Gradients loss_gradients(const SparseMatrix& op, const DenseMatrix& x, const SparseMatrix& target,
                         const EncoderParams& params, double pos_weight) {
  check_operator(op, x);
  check_params(x, params);
  check_target(target, x.rows());
  const Problem prob(op, x, target);
  return backward(prob, params, pos_weight);
}

EncoderParams glorot_init(std::size_t in_dim, std::size_t hidden_dim, std::size_t embed_dim,
                          std::uint64_t seed) {
  Rng rng(seed);
  auto fill = [&rng](std::size_t rows, std::size_t cols) {
    DenseMatrix m(rows, cols);
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : m.values()) v = rng.uniform(-limit, limit);
    return m;
  };
  EncoderParams params;
  params.theta1 = fill(in_dim, hidden_dim);
  params.theta2 = fill(hidden_dim, embed_dim);
  return params;
}

TrainResult train(const SparseMatrix& op, const DenseMatrix& x, const SparseMatrix& target,
                  const TrainConfig& cfg) {
  cfg.validate();
  check_operator(op, x);
  check_target(target, x.rows());
  if (x.rows() < 2) throw InvalidInput("training needs at least 2 samples");

  const Problem prob(op, x, target);
  TrainResult result;
  result.pos_weight = cfg.pos_weight.value_or(auto_pos_weight(target));
  result.params = glorot_init(x.cols(), cfg.hidden_dim, cfg.embed_dim, cfg.seed);
  result.loss_history.reserve(cfg.epochs);

  MomentState st1;
  MomentState st2;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Gradients g = backward(prob, result.params, result.pos_weight);
    if (!std::isfinite(g.loss) || !g.d_theta1.all_finite() || !g.d_theta2.all_finite()) {
      throw TrainingDiverged(epoch);
    }
    result.loss_history.push_back(g.loss);
    if (cfg.optimizer == Optimizer::AdaptiveMoments) {
      adam_step(result.params.theta1, g.d_theta1, st1, cfg.learning_rate, epoch + 1);
      adam_step(result.params.theta2, g.d_theta2, st2, cfg.learning_rate, epoch + 1);
    } else {
      gd_step(result.params.theta1, g.d_theta1, cfg.learning_rate);
      gd_step(result.params.theta2, g.d_theta2, cfg.learning_rate);
    }
  }
  result.embedding = forward(prob.op, prob.features, result.params).z;
  if (!result.embedding.all_finite()) throw TrainingDiverged(cfg.epochs);
  return result;
}

}  // namespace hyperclust
