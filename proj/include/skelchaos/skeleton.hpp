#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skelchaos/linalg.hpp"

namespace skelchaos {

/// Periodic teacher series. Rows of `samples` are the D-dimensional inputs u_k;
/// indices past the end wrap around, so one traversal is enough for curves
/// whose sampled period equals `size()`.
struct Skeleton {
  Matrix samples;
  std::optional<std::size_t> period_steps;
  std::string label;

  std::size_t dim() const { return static_cast<std::size_t>(samples.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(samples.rows()); }
  Vector at(std::size_t k) const { return samples.row(static_cast<Eigen::Index>(k % size())).transpose(); }

  /// Throws InputError if empty or non-finite.
  void validate() const;
  /// FNV-1a over the shape and the raw sample bytes; identifies the teacher data in model metadata.
  std::uint64_t fingerprint() const;
};

/// u_k = [cos(pi k / 50), sin(pi k / 25)], period 100.
Skeleton lissajous(std::size_t steps);

/// u_k = [cos(2 pi k / period), sin(2 pi k / period)].
Skeleton unit_circle(std::size_t steps, std::size_t period);

/// Right-hand sides used by the continuous-time generators, exposed for tests.
std::array<double, 2> van_der_pol_rhs(double mu, const std::array<double, 2>& state);

enum class RosslerForm {
  standard,  // zdot = 0.2 + x z - c z
  literal,   // zdot = 0.2 + x y - c z
};

std::array<double, 3> rossler_rhs(double c, const std::array<double, 3>& state, RosslerForm form = RosslerForm::standard);

/// Both equilibria of the Rossler flow (closed form).
std::vector<std::array<double, 3>> rossler_fixed_points(double c, RosslerForm form = RosslerForm::standard);

/// Samples of the Van der Pol limit cycle (x, xdot) taken every `dt` with a
/// fixed-step RK4 integrator after discarding 100 time units of transient.
/// The discrete period is generally not an integer, so `period_steps` is unset.
Skeleton van_der_pol(double mu, double dt, std::size_t steps);

struct RosslerOptions {
  RosslerForm form = RosslerForm::standard;
  double transient_time = 500.0;
  /// Closing tolerance of the Poincare return that defines one period.
  double return_tolerance = 1e-6;
  /// Upper bound on the number of loops searched for the return.
  std::size_t max_loops = 16;
};

/// A periodic orbit of the Rossler flow. After the transient, the period is
/// measured from returns to the y = 0 plane (y increasing); the orbit is then
/// re-integrated with the step shrunk to `period / round(period / dt)` so the
/// sampled series repeats after exactly `period_steps` samples.
Skeleton rossler_cycle(double c, double dt, std::size_t steps, const RosslerOptions& options = {});

struct CurveCsvOptions {
  std::size_t resample_to = 0;  // 0 keeps the input points
  bool close_curve = false;
  bool normalize = true;
};

/// Resample a polyline to `count` points equally spaced in arc length. With
/// `closed`, the segment back to the first point is part of the curve and the
/// duplicate end point is not emitted.
Matrix resample_arc_length(const Matrix& points, std::size_t count, bool closed);

/// Shift every column to zero mean and scale it to max |value| = 1.
Matrix normalize_components(const Matrix& points);

/// Rows of numbers with an optional header. Throws ParseError naming the row
/// and column of the first bad cell.
struct NumericTable {
  std::vector<std::string> header;
  Matrix values;
};

NumericTable read_numeric_csv(const std::filesystem::path& path);

/// Hand-drawn closed curve: one traversal per file, resampled and normalised
/// per `options`. The traversal length becomes `period_steps`.
Skeleton load_csv(const std::filesystem::path& path, const CurveCsvOptions& options);

/// CSV of the samples (no header) and a JSON sidecar with dim, period_steps and label.
void save_skeleton(const Skeleton& skeleton, const std::filesystem::path& csv_path);

/// Inverse of save_skeleton; the sidecar is optional.
Skeleton load_skeleton(const std::filesystem::path& csv_path);

}  // namespace skelchaos
