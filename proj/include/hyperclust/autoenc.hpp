#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hyperclust/tensor.hpp"

namespace hyperclust {

/// Two-layer convolutional encoder weights: features -> hidden -> embedding.
struct EncoderParams {
  DenseMatrix theta1;  // L1 x L2
  DenseMatrix theta2;  // L2 x D
};

enum class Optimizer : std::uint8_t { PlainGd, AdaptiveMoments };

Optimizer parse_optimizer(std::string_view name);
std::string_view to_string(Optimizer opt);

struct TrainConfig {
  std::size_t hidden_dim = 32;
  std::size_t embed_dim = 16;
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::AdaptiveMoments;
  /// Weight of the positive (T_ij = 1) terms. Empty means "auto":
  /// #zeros / #ones of the target.
  std::optional<double> pos_weight;

  void validate() const;
};

struct TrainResult {
  EncoderParams params;
  DenseMatrix embedding;             // n x D
  std::vector<double> loss_history;  // one entry per epoch, loss before the update
  double pos_weight = 1.0;           // the weight actually used
};

struct Gradients {
  DenseMatrix d_theta1;
  DenseMatrix d_theta2;
  double loss = 0.0;
};

/// Z = P · ReLU(P · X · θ1) · θ2.
DenseMatrix encode(const SparseMatrix& op, const DenseMatrix& x, const EncoderParams& params);

/// sigmoid(Z Zᵀ).
DenseMatrix decode(const DenseMatrix& z);

/// Weighted binary cross-entropy between sigmoid(Z Zᵀ) and the binary target,
/// averaged over all n² pairs:
///
///   L = -(1/n²) Σ_ij [ w⁺ T_ij ln σ(s_ij) + (1 - T_ij) ln(1 - σ(s_ij)) ],  s = Z Zᵀ
///
/// This is the standard cross-entropy form, not the (1 - T)(1 - T ln σ)
/// negative term, which does not define a cross-entropy. Evaluated through
/// softplus, so ln(0) never appears.
double reconstruction_loss(const DenseMatrix& z, const SparseMatrix& target, double pos_weight);

/// #zero entries / #one entries of an n x n binary target (1 when it has no ones).
double auto_pos_weight(const SparseMatrix& target);

/// Analytic gradients of reconstruction_loss(encode(op, x, params), target)
/// with respect to θ1 and θ2. The ReLU subgradient at 0 is 0.
Gradients loss_gradients(const SparseMatrix& op, const DenseMatrix& x, const SparseMatrix& target,
                         const EncoderParams& params, double pos_weight);

/// Seeded Glorot-uniform parameters.
EncoderParams glorot_init(std::size_t in_dim, std::size_t hidden_dim, std::size_t embed_dim,
                          std::uint64_t seed);

/// Full-batch training. Throws TrainingDiverged if the loss becomes non-finite.
TrainResult train(const SparseMatrix& op, const DenseMatrix& x, const SparseMatrix& target,
                  const TrainConfig& cfg);

}  // namespace hyperclust
