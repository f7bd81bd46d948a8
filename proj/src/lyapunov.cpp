#include "skelchaos/lyapunov.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "skelchaos/errors.hpp"
#include "skelchaos/rng.hpp"

namespace skelchaos {
namespace {

constexpr double kOrthogonalityTolerance = 1e-8;

// Orthonormalizes `tangents` in place and returns log |R_ii|.
Eigen::VectorXd orthonormalize(Eigen::MatrixXd& tangents) {
  const Eigen::Index m = tangents.cols();
  if (!tangents.allFinite()) {
    throw NumericError("lyapunov: tangent vectors overflowed");
  }
  Eigen::VectorXd logs(m);
  if (m == 1) {
    const double norm = tangents.col(0).norm();
    if (!(norm > 0.0)) throw NumericError("lyapunov: tangent vector collapsed to zero");
    tangents /= norm;
    logs(0) = std::log(norm);
    return logs;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(tangents);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tangents.rows(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double diag = std::abs(r(i, i));
    if (!(diag > 0.0)) throw NumericError("lyapunov: tangent space lost rank");
    logs(i) = std::log(diag);
  }
  const double drift = (q.transpose() * q - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  if (!(drift < kOrthogonalityTolerance)) {
    throw NumericError(fmt::format("lyapunov: loss of orthogonality ({:.3g})", drift));
  }
  tangents = std::move(q);
  return logs;
}

// Shared tangent update of the LESN: V <- (1 - a) V + a diag(1 - tanh^2(pre)) (M V).
void propagate_tangents(const Eigen::ArrayXd& slope, const Matrix& recurrent, double scale, double leak, Eigen::MatrixXd& tangents) {
  Eigen::MatrixXd mapped = recurrent * tangents;
  if (scale != 1.0) mapped *= scale;
  tangents *= 1.0 - leak;
  tangents.noalias() += (leak * slope).matrix().asDiagonal() * mapped;
}

}  // namespace

void TangentSettings::validate(std::size_t dim) const {
  if (!(steps > transient)) {
    throw InputError(fmt::format("lyapunov: steps ({}) must exceed transient ({})", steps, transient));
  }
  if (renorm_every == 0) throw InputError("lyapunov: renorm_every must be positive");
  if (n_exponents == 0 || n_exponents > dim) {
    throw InputError(fmt::format("lyapunov: n_exponents {} must be in [1, {}]", n_exponents, dim));
  }
}

LyapunovResult lyapunov_spectrum(const TangentStep& advance, Vector initial_state, const TangentSettings& settings) {
  const auto dim = static_cast<std::size_t>(initial_state.size());
  settings.validate(dim);
  const auto m = static_cast<Eigen::Index>(settings.n_exponents);

  Rng rng(settings.seed);
  Eigen::MatrixXd tangents(initial_state.size(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < tangents.rows(); ++i) tangents(i, j) = rng.normal();
  }
  orthonormalize(tangents);

  Vector state = std::move(initial_state);
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(m);
  std::size_t used = 0;
  std::size_t block_start = 0;
  for (std::size_t k = 0; k < settings.steps; ++k) {
    advance(k, state, tangents);
    if (!state.allFinite()) {
      throw NumericError(fmt::format("lyapunov: non-finite state at step {}", k + 1));
    }
    const std::size_t done = k + 1;
    if (done % settings.renorm_every == 0 || done == settings.steps) {
      const Eigen::VectorXd logs = orthonormalize(tangents);
      if (block_start >= settings.transient) {
        sums += logs;
        used += done - block_start;
      }
      block_start = done;
    }
  }
  if (used == 0) {
    throw InputError("lyapunov: no steps accumulated after the transient");
  }
  LyapunovResult result;
  result.steps_used = used;
  result.exponents.resize(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    result.exponents[static_cast<std::size_t>(j)] = sums(j) / static_cast<double>(used);
  }
  std::sort(result.exponents.begin(), result.exponents.end(), std::greater<>());
  return result;
}

Matrix driven_jacobian(const Reservoir& res, const Vector& x, const Vector& u) {
  const auto& spec = res.spec();
  if (x.size() != static_cast<Eigen::Index>(spec.n_nodes) || u.size() != static_cast<Eigen::Index>(spec.input_dim)) {
    throw InputError("driven_jacobian: dimension mismatch");
  }
  const Eigen::ArrayXd pre = (spec.spectral_scale * (res.w() * x) + spec.input_scale * (res.w_in() * u)).array();
  const Eigen::ArrayXd slope = 1.0 - pre.tanh().square();
  const double a = spec.leak_rate;
  Matrix jac = (a * spec.spectral_scale * slope).matrix().asDiagonal() * res.w();
  jac.diagonal().array() += 1.0 - a;
  return jac;
}

Matrix autonomous_jacobian(const TrainedModel& model, const Vector& x) {
  if (x.size() != model.w_hat.cols()) {
    throw InputError("autonomous_jacobian: dimension mismatch");
  }
  const Eigen::ArrayXd slope = 1.0 - (model.w_hat * x).array().tanh().square();
  const double a = model.reservoir.spec().leak_rate;
  Matrix jac = (a * slope).matrix().asDiagonal() * model.w_hat;
  jac.diagonal().array() += 1.0 - a;
  return jac;
}

LyapunovResult conditional_mle(const Reservoir& res, const Skeleton& sk, const TangentSettings& settings,
                               const std::optional<Vector>& x0) {
  const auto& spec = res.spec();
  if (sk.dim() != spec.input_dim) {
    throw InputError(fmt::format("conditional_mle: skeleton dim {} != reservoir input dim {}", sk.dim(), spec.input_dim));
  }
  const auto n = static_cast<Eigen::Index>(spec.n_nodes);
  Vector start = x0.value_or(Vector::Zero(n));
  if (start.size() != n) throw InputError("conditional_mle: initial state has the wrong size");

  TangentSettings leading = settings;
  leading.n_exponents = 1;
  const double a = spec.leak_rate;
  Vector pre(n);
  auto advance = [&](std::size_t k, Vector& x, Eigen::MatrixXd& tangents) {
    pre.noalias() = res.w() * x;
    pre *= spec.spectral_scale;
    pre.noalias() += spec.input_scale * (res.w_in() * sk.at(k));
    const Eigen::ArrayXd activation = pre.array().tanh();
    propagate_tangents(1.0 - activation.square(), res.w(), spec.spectral_scale, a, tangents);
    x = (1.0 - a) * x + a * activation.matrix();
  };
  return lyapunov_spectrum(advance, std::move(start), leading);
}

LyapunovResult autonomous_spectrum(const TrainedModel& model, const TangentSettings& settings, RunTrace* visited) {
  const double a = model.reservoir.spec().leak_rate;
  Vector pre(model.w_hat.rows());
  if (visited) {
    visited->mode = RunMode::closed_loop;
    visited->skeleton_offset = 0;
    visited->states.resize(static_cast<Eigen::Index>(settings.steps), model.w_hat.cols());
  }
  auto advance = [&](std::size_t k, Vector& x, Eigen::MatrixXd& tangents) {
    if (visited) visited->states.row(static_cast<Eigen::Index>(k)) = x.transpose();
    pre.noalias() = model.w_hat * x;
    const Eigen::ArrayXd activation = pre.array().tanh();
    propagate_tangents(1.0 - activation.square(), model.w_hat, 1.0, a, tangents);
    x = (1.0 - a) * x + a * activation.matrix();
  };
  LyapunovResult result = lyapunov_spectrum(advance, model.x_start, settings);
  if (visited) visited->outputs = visited->states * model.w_out;
  return result;
}

}  // namespace skelchaos
