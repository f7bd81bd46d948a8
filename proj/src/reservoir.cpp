#include "skelchaos/reservoir.hpp"

#include <cmath>
#include <fmt/format.h>
#include <string>

#include "skelchaos/errors.hpp"
#include "skelchaos/rng.hpp"

namespace skelchaos {
namespace {

constexpr double kUnitRadiusTolerance = 1e-6;

Eigen::VectorXcd eigenvalues_of(const Matrix& m) {
  if (m.rows() == 0) {
    return {};
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(m), /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigenvalue iteration did not converge");
  }
  return solver.eigenvalues();
}

}  // namespace

void ReservoirSpec::validate() const {
  if (n_nodes == 0) {
    throw InputError("reservoir: n_nodes must be positive");
  }
  if (input_dim == 0) {
    throw InputError("reservoir: input_dim must be positive");
  }
  if (input_dim > n_nodes) {
    throw InputError(fmt::format("reservoir: input_dim ({}) exceeds n_nodes ({})", input_dim, n_nodes));
  }
  if (!(leak_rate > 0.0 && leak_rate <= 1.0)) {
    throw InputError(fmt::format("reservoir: leak_rate {} outside (0, 1]", leak_rate));
  }
  if (!(spectral_scale > 0.0) || !std::isfinite(spectral_scale)) {
    throw InputError(fmt::format("reservoir: spectral_scale {} must be positive", spectral_scale));
  }
  if (!(input_scale >= 0.0) || !std::isfinite(input_scale)) {
    throw InputError(fmt::format("reservoir: input_scale {} must be nonnegative", input_scale));
  }
}

Reservoir Reservoir::with_spectral_scale(double rho) const {
  ReservoirSpec spec = spec_;
  spec.spectral_scale = rho;
  spec.validate();
  return Reservoir(spec, weights_);
}

Reservoir Reservoir::with_input_scale(double sigma) const {
  ReservoirSpec spec = spec_;
  spec.input_scale = sigma;
  spec.validate();
  return Reservoir(spec, weights_);
}

Reservoir Reservoir::from_matrices(const ReservoirSpec& spec, Matrix w, Matrix w_in) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n_nodes);
  const auto d = static_cast<Eigen::Index>(spec.input_dim);
  if (w.rows() != n || w.cols() != n) {
    throw InputError(fmt::format("reservoir: W is {}x{}, expected {}x{}", w.rows(), w.cols(), n, n));
  }
  if (w_in.rows() != n || w_in.cols() != d) {
    throw InputError(fmt::format("reservoir: W_in is {}x{}, expected {}x{}", w_in.rows(), w_in.cols(), n, d));
  }
  if (!w_in.allFinite() || w_in.cwiseAbs().maxCoeff() > 1.0) {
    throw InputError("reservoir: W_in entries must lie in [-1, 1]");
  }
  auto weights = std::make_shared<Weights>();
  weights->eigenvalues = eigenvalues_of(w);
  const double radius = weights->eigenvalues.cwiseAbs().maxCoeff();
  if (std::abs(radius - 1.0) > kUnitRadiusTolerance) {
    throw InputError(fmt::format("reservoir: W has spectral radius {}, expected 1", radius));
  }
  weights->w = std::move(w);
  weights->w_in = std::move(w_in);
  return Reservoir(spec, std::move(weights));
}

Reservoir build_reservoir(const ReservoirSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n_nodes);
  const auto d = static_cast<Eigen::Index>(spec.input_dim);

  Rng rng(spec.seed);
  Matrix w(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      w(i, j) = rng.normal();
    }
  }
  Matrix w_in(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      w_in(i, j) = rng.uniform(-1.0, 1.0);
    }
  }

  Eigen::VectorXcd eigenvalues = eigenvalues_of(w);
  const double radius = eigenvalues.cwiseAbs().maxCoeff();
  if (!(radius > 1e-12) || !std::isfinite(radius)) {
    throw NumericError(fmt::format("reservoir: degenerate draw, spectral radius {}", radius));
  }
  w /= radius;
  eigenvalues /= radius;

  auto weights = std::make_shared<Reservoir::Weights>();
  weights->w = std::move(w);
  weights->w_in = std::move(w_in);
  weights->eigenvalues = std::move(eigenvalues);
  return Reservoir(spec, std::move(weights));
}

Vector step(const Reservoir& res, const Vector& x, const Vector& u) {
  const auto& spec = res.spec();
  if (x.size() != static_cast<Eigen::Index>(spec.n_nodes)) {
    throw InputError(fmt::format("step: state has {} entries, expected {}", x.size(), spec.n_nodes));
  }
  if (u.size() != static_cast<Eigen::Index>(spec.input_dim)) {
    throw InputError(fmt::format("step: input has {} entries, expected {}", u.size(), spec.input_dim));
  }
  Vector pre = res.w() * x;
  pre *= spec.spectral_scale;
  pre.noalias() += spec.input_scale * (res.w_in() * u);
  const double a = spec.leak_rate;
  return (1.0 - a) * x + a * pre.array().tanh().matrix();
}

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw InputError(fmt::format("spectral_radius: matrix is {}x{}, not square", m.rows(), m.cols()));
  }
  if (!m.allFinite()) {
    throw InputError("spectral_radius: matrix has non-finite entries");
  }
  if (m.rows() == 0) {
    return 0.0;
  }
  return eigenvalues_of(m).cwiseAbs().maxCoeff();
}

double effective_radius_pre(const Reservoir& res) {
  const auto& spec = res.spec();
  const double a = spec.leak_rate;
  const std::complex<double> shift(1.0 - a, 0.0);
  double radius = 0.0;
  for (const auto& lambda : res.eigenvalues()) {
    radius = std::max(radius, std::abs(a * spec.spectral_scale * lambda + shift));
  }
  return radius;
}

double effective_radius_post(const Reservoir& res, const Matrix& w_hat) {
  const auto n = static_cast<Eigen::Index>(res.size());
  if (w_hat.rows() != n || w_hat.cols() != n) {
    throw InputError(fmt::format("effective_radius_post: W_hat is {}x{}, expected {}x{}", w_hat.rows(), w_hat.cols(), n, n));
  }
  const double a = res.spec().leak_rate;
  Matrix linearized = a * w_hat;
  linearized.diagonal().array() += 1.0 - a;
  return spectral_radius(linearized);
}

}  // namespace skelchaos
