#pragma once

#include <complex>
#include <cstdint>
#include <memory>

#include "skelchaos/linalg.hpp"

namespace skelchaos {

/// Parameters of a leaky-integrator echo state network.
struct ReservoirSpec {
  std::size_t n_nodes = 1000;   // N
  double leak_rate = 0.5;       // a, in (0, 1]
  double spectral_scale = 1.0;  // rho
  double input_scale = 0.2;     // sigma
  std::uint64_t seed = 1;
  std::size_t input_dim = 2;    // D

  /// Throws InputError when a field violates its range.
  void validate() const;
};

/// Fixed random weights of an LESN plus its parameters.
///
/// `w()` is the unit-spectral-radius recurrent matrix; the update applies
/// `spec().spectral_scale` on the fly, so reservoirs that differ only in rho
/// (or sigma) share one copy of the weights.
class Reservoir {
 public:
  const ReservoirSpec& spec() const { return spec_; }
  const Matrix& w() const { return weights_->w; }
  const Matrix& w_in() const { return weights_->w_in; }
  std::size_t size() const { return spec_.n_nodes; }
  std::size_t input_dim() const { return spec_.input_dim; }

  /// Eigenvalues of the unit-radius `w()`.
  const Eigen::VectorXcd& eigenvalues() const { return weights_->eigenvalues; }

  /// Same weights, different rho.
  Reservoir with_spectral_scale(double rho) const;
  /// Same weights, different sigma.
  Reservoir with_input_scale(double sigma) const;

  /// Rebuild from previously exported matrices. Checks shape, the unit
  /// spectral radius of `w` and the range of `w_in`.
  static Reservoir from_matrices(const ReservoirSpec& spec, Matrix w, Matrix w_in);

 private:
  friend Reservoir build_reservoir(const ReservoirSpec& spec);

  struct Weights {
    Matrix w;
    Matrix w_in;
    Eigen::VectorXcd eigenvalues;
  };

  Reservoir(ReservoirSpec spec, std::shared_ptr<const Weights> weights)
      : spec_(spec), weights_(std::move(weights)) {}

  ReservoirSpec spec_;
  std::shared_ptr<const Weights> weights_;
};

/// Draw W i.i.d. standard normal (row-major order) then W_in i.i.d. uniform
/// on [-1, 1] from one generator seeded with `spec.seed`, and divide W by its
/// spectral radius.
Reservoir build_reservoir(const ReservoirSpec& spec);

/// x' = (1 - a) x + a tanh(rho W x + sigma W_in u).
Vector step(const Reservoir& res, const Vector& x, const Vector& u);

/// max |lambda| over the eigenvalues of a square finite matrix.
double spectral_radius(const Matrix& m);

/// |lambda|_max(a rho W + (1 - a) I), evaluated from the cached spectrum of W.
double effective_radius_pre(const Reservoir& res);

/// |lambda|_max(a W_hat + (1 - a) I).
double effective_radius_post(const Reservoir& res, const Matrix& w_hat);

}  // namespace skelchaos
