#pragma once

#include <optional>

#include "skelchaos/linalg.hpp"
#include "skelchaos/reservoir.hpp"
#include "skelchaos/skeleton.hpp"

namespace skelchaos {

struct TrainingConfig {
  std::size_t t_init = 1000;   // washout steps discarded before regression
  std::size_t t_train = 2000;  // regression rows
  double beta = 1e-3;          // ridge regularizer
  std::optional<Vector> x0;    // teacher-forcing start; zero when unset

  void validate(std::size_t n_nodes, std::size_t input_dim) const;
};

/// Regression data collected under teacher forcing.
struct TeacherData {
  Matrix states;       // t_train x N, rows x_{t_init} ... x_{t_init + t_train - 1}
  Matrix targets;      // t_train x D, matching u_k
  Vector final_state;  // x_{t_init + t_train}
};

/// An autonomous closed-loop LESN: x' = (1 - a) x + a tanh(W_hat x),
/// W_hat = rho W + sigma W_in W_out^T.
struct TrainedModel {
  Reservoir reservoir;
  Matrix w_out;    // N x D
  Matrix w_hat;    // N x N
  Vector x_start;  // final teacher-forced state
  TrainingConfig config;
};

enum class RunMode { open_loop, closed_loop };

struct RunTrace {
  Matrix states;   // steps x N
  Matrix outputs;  // steps x D, z_k = W_out^T x_k
  RunMode mode = RunMode::closed_loop;
  /// Skeleton index aligned with row 0 (open loop only).
  std::size_t skeleton_offset = 0;

  std::size_t steps() const { return static_cast<std::size_t>(states.rows()); }
};

/// Drive the reservoir with the skeleton from `cfg.x0`, discard `t_init`
/// states and collect the next `t_train` (state, input) pairs.
TeacherData teacher_force(const Reservoir& res, const Skeleton& sk, const TrainingConfig& cfg);

/// W_out = (X^T X + beta I)^{-1} X^T Y. beta > 0 uses a Cholesky solve;
/// beta = 0 requires X to have full column rank and throws SolverError otherwise.
Matrix ridge_readout(const Matrix& x, const Matrix& y, double beta);

TrainedModel compose_closed_loop(const Reservoir& res, Matrix w_out, Vector x_start, TrainingConfig cfg = {});

/// teacher_force, ridge_readout and compose_closed_loop in sequence.
TrainedModel train(const Reservoir& res, const Skeleton& sk, const TrainingConfig& cfg);

/// One autonomous update.
Vector closed_loop_step(const TrainedModel& model, const Vector& x);

/// Drive the trained reservoir with the true inputs from `x_start`, starting
/// at skeleton index `offset` (by default the first index after training).
RunTrace run_open_loop(const TrainedModel& model, const Skeleton& sk, std::size_t steps, std::optional<std::size_t> offset = {});

/// Iterate the closed loop from `x_start` (or `initial`).
RunTrace run_closed_loop(const TrainedModel& model, std::size_t steps, const std::optional<Vector>& initial = {});

}  // namespace skelchaos
