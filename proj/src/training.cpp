#include "skelchaos/training.hpp"

#include <fmt/format.h>

#include "skelchaos/errors.hpp"

namespace skelchaos {
namespace {

void require_finite(const Vector& x, std::size_t k, const char* who) {
  if (!x.allFinite()) {
    throw NumericError(fmt::format("{}: non-finite state at step {}", who, k));
  }
}

}  // namespace

void TrainingConfig::validate(std::size_t n_nodes, std::size_t input_dim) const {
  if (t_train < input_dim) {
    throw InputError(fmt::format("training: t_train ({}) must be at least the input dimension ({})", t_train, input_dim));
  }
  if (!(beta >= 0.0)) {
    throw InputError(fmt::format("training: beta {} must be nonnegative", beta));
  }
  if (x0 && x0->size() != static_cast<Eigen::Index>(n_nodes)) {
    throw InputError(fmt::format("training: x0 has {} entries, expected {}", x0->size(), n_nodes));
  }
}

TeacherData teacher_force(const Reservoir& res, const Skeleton& sk, const TrainingConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(res.size());
  const auto d = static_cast<Eigen::Index>(res.input_dim());
  cfg.validate(res.size(), res.input_dim());
  sk.validate();
  if (sk.dim() != res.input_dim()) {
    throw InputError(fmt::format("teacher_force: skeleton dim {} != reservoir input dim {}", sk.dim(), res.input_dim()));
  }

  TeacherData data;
  data.states.resize(static_cast<Eigen::Index>(cfg.t_train), n);
  data.targets.resize(static_cast<Eigen::Index>(cfg.t_train), d);
  Vector x = cfg.x0 ? *cfg.x0 : Vector::Zero(n);
  const std::size_t total = cfg.t_init + cfg.t_train;
  for (std::size_t k = 0; k < total; ++k) {
    const Vector u = sk.at(k);
    if (k >= cfg.t_init) {
      const auto row = static_cast<Eigen::Index>(k - cfg.t_init);
      data.states.row(row) = x.transpose();
      data.targets.row(row) = u.transpose();
    }
    x = step(res, x, u);
    require_finite(x, k + 1, "teacher_force");
  }
  data.final_state = std::move(x);
  return data;
}

Matrix ridge_readout(const Matrix& x, const Matrix& y, double beta) {
  if (x.rows() != y.rows()) {
    throw InputError(fmt::format("ridge_readout: X has {} rows, Y has {}", x.rows(), y.rows()));
  }
  if (!(beta >= 0.0)) {
    throw InputError(fmt::format("ridge_readout: beta {} must be nonnegative", beta));
  }
  const Eigen::Index n = x.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  gram.diagonal().array() += beta;
  const Eigen::MatrixXd rhs = x.transpose() * y;

  if (beta > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success) {
      return llt.solve(rhs);
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
  if (qr.rank() < n) {
    throw SolverError(fmt::format("ridge_readout: normal matrix is singular (rank {} of {})", qr.rank(), n));
  }
  return qr.solve(rhs);
}

TrainedModel compose_closed_loop(const Reservoir& res, Matrix w_out, Vector x_start, TrainingConfig cfg) {
  const auto n = static_cast<Eigen::Index>(res.size());
  const auto d = static_cast<Eigen::Index>(res.input_dim());
  if (w_out.rows() != n || w_out.cols() != d) {
    throw InputError(fmt::format("compose_closed_loop: W_out is {}x{}, expected {}x{}", w_out.rows(), w_out.cols(), n, d));
  }
  if (x_start.size() != n) {
    throw InputError(fmt::format("compose_closed_loop: start state has {} entries, expected {}", x_start.size(), n));
  }
  const auto& spec = res.spec();
  Matrix w_hat = spec.spectral_scale * res.w();
  w_hat.noalias() += spec.input_scale * (res.w_in() * w_out.transpose());
  return TrainedModel{res, std::move(w_out), std::move(w_hat), std::move(x_start), std::move(cfg)};
}

TrainedModel train(const Reservoir& res, const Skeleton& sk, const TrainingConfig& cfg) {
  TeacherData data = teacher_force(res, sk, cfg);
  Matrix w_out = ridge_readout(data.states, data.targets, cfg.beta);
  return compose_closed_loop(res, std::move(w_out), std::move(data.final_state), cfg);
}

Vector closed_loop_step(const TrainedModel& model, const Vector& x) {
  if (x.size() != model.w_hat.cols()) {
    throw InputError(fmt::format("closed_loop_step: state has {} entries, expected {}", x.size(), model.w_hat.cols()));
  }
  const double a = model.reservoir.spec().leak_rate;
  Vector pre = model.w_hat * x;
  return (1.0 - a) * x + a * pre.array().tanh().matrix();
}

RunTrace run_open_loop(const TrainedModel& model, const Skeleton& sk, std::size_t steps, std::optional<std::size_t> offset) {
  if (steps == 0) throw InputError("run_open_loop: steps must be at least 1");
  if (sk.dim() != model.reservoir.input_dim()) {
    throw InputError(fmt::format("run_open_loop: skeleton dim {} != reservoir input dim {}", sk.dim(), model.reservoir.input_dim()));
  }
  const std::size_t start = offset.value_or(model.config.t_init + model.config.t_train);
  RunTrace trace;
  trace.mode = RunMode::open_loop;
  trace.skeleton_offset = start;
  trace.states.resize(static_cast<Eigen::Index>(steps), model.w_hat.cols());
  Vector x = model.x_start;
  for (std::size_t k = 0; k < steps; ++k) {
    trace.states.row(static_cast<Eigen::Index>(k)) = x.transpose();
    if (k + 1 < steps) {
      x = step(model.reservoir, x, sk.at(start + k));
      require_finite(x, k + 1, "run_open_loop");
    }
  }
  trace.outputs = trace.states * model.w_out;
  return trace;
}

RunTrace run_closed_loop(const TrainedModel& model, std::size_t steps, const std::optional<Vector>& initial) {
  if (steps == 0) throw InputError("run_closed_loop: steps must be at least 1");
  RunTrace trace;
  trace.mode = RunMode::closed_loop;
  trace.states.resize(static_cast<Eigen::Index>(steps), model.w_hat.cols());
  Vector x = initial.value_or(model.x_start);
  for (std::size_t k = 0; k < steps; ++k) {
    trace.states.row(static_cast<Eigen::Index>(k)) = x.transpose();
    if (k + 1 < steps) {
      x = closed_loop_step(model, x);
      require_finite(x, k + 1, "run_closed_loop");
    }
  }
  trace.outputs = trace.states * model.w_out;
  return trace;
}

}  // namespace skelchaos
