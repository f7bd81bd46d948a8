#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "skelchaos/linalg.hpp"
#include "skelchaos/reservoir.hpp"
#include "skelchaos/skeleton.hpp"
#include "skelchaos/training.hpp"

namespace skelchaos {

struct TangentSettings {
  std::size_t steps = 10000;
  std::size_t transient = 2000;  // steps propagated before accumulation starts
  std::size_t renorm_every = 1;
  std::size_t n_exponents = 1;
  std::uint64_t seed = 0x7a6e;  // initial tangent directions

  void validate(std::size_t dim) const;
};

/// Exponents are natural-log growth rates per discrete step, sorted descending.
struct LyapunovResult {
  std::vector<double> exponents;
  std::size_t steps_used = 0;

  double leading() const { return exponents.front(); }
};

/// Advance `state` by one step of a map and replace `tangents` (dim x m) by
/// J(state before the step) * tangents. `k` is the step index.
using TangentStep = std::function<void(std::size_t k, Vector& state, Eigen::MatrixXd& tangents)>;

/// Benettin-style spectrum: propagate m tangent vectors, re-orthonormalize by
/// Householder QR every `renorm_every` steps and average log |R_ii| over the
/// steps after the transient.
LyapunovResult lyapunov_spectrum(const TangentStep& advance, Vector initial_state, const TangentSettings& settings);

/// d x' / d x of the driven update with the input held fixed.
Matrix driven_jacobian(const Reservoir& res, const Vector& x, const Vector& u);

/// d x' / d x of the closed-loop update.
Matrix autonomous_jacobian(const TrainedModel& model, const Vector& x);

/// Largest conditional Lyapunov exponent of the reservoir driven by the skeleton
/// from `x0` (zero by default). Only the leading exponent is computed.
LyapunovResult conditional_mle(const Reservoir& res, const Skeleton& sk, const TangentSettings& settings,
                               const std::optional<Vector>& x0 = {});

/// Leading `settings.n_exponents` exponents of the closed loop started at `x_start`.
/// When `visited` is given it receives the trajectory, identical to
/// run_closed_loop(model, settings.steps).
LyapunovResult autonomous_spectrum(const TrainedModel& model, const TangentSettings& settings, RunTrace* visited = nullptr);

}  // namespace skelchaos
