#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skelchaos/linalg.hpp"
#include "skelchaos/skeleton.hpp"
#include "skelchaos/training.hpp"

namespace skelchaos {

/// |x^4 - x^2 + y^2 / 4|; zero exactly on the Lissajous skeleton.
double q_index(double x, double y);

/// Mean of q_index over the last `window` rows of a two-column output matrix.
/// Throws ApplicabilityError when D != 2.
double mean_q(const Matrix& outputs, std::size_t window);
double mean_q(const RunTrace& trace, std::size_t window);

/// Root mean square error of one output component against the skeleton over
/// the first `t_eval` rows; row k is compared with skeleton index offset + k.
double rmse(const Matrix& predictions, const Skeleton& target, std::size_t component, std::size_t t_eval,
            std::size_t target_offset = 0);

/// Mean over `points` of the Euclidean distance to the nearest skeleton sample.
double shape_deviation(const Matrix& points, const Skeleton& sk);

struct Extremum {
  std::size_t step;
  double value;
};

/// Strict local maxima and minima; plateaus emit nothing.
std::vector<Extremum> strict_extrema(std::span<const double> series);

/// Extrema of the node average (1/N) sum_i x^i_k.
std::vector<Extremum> node_average_extrema(const RunTrace& trace);

struct SectionCrossing {
  double step;  // fractional step of the interpolated crossing
  double value;
};

struct NodeSection {
  std::size_t node;
  std::vector<SectionCrossing> crossings;
};

/// Crossings of z^(axis) = W_out[:, axis]^T x through `level` from below,
/// with the monitored node values linearly interpolated at each crossing.
std::vector<NodeSection> poincare_section(const RunTrace& trace, const Matrix& w_out, std::size_t axis, double level,
                                          std::span<const std::size_t> nodes);

struct PcaProjection {
  Matrix scores;             // steps x k
  Matrix components;         // N x k, orthonormal columns
  Vector mean;               // N
  Vector variances;          // top-k eigenvalues of the covariance, descending
  Vector explained_ratio;    // variances / total variance
  double total_variance = 0.0;
  bool degenerate = false;   // covariance rank < k
};

PcaProjection pca_projection(const Matrix& states, std::size_t k = 2);

struct SpectrumBin {
  double frequency;  // cycles per step
  double power;
};

/// One-sided periodogram of the mean-removed series. The powers sum to the
/// population variance of the series.
std::vector<SpectrumBin> power_spectrum(std::span<const double> series);

/// Number of groups left after splitting the sorted values at gaps wider than `tolerance`.
std::size_t count_clusters(std::vector<double> values, double tolerance);

enum class BifurcationSource { node_average_extrema, poincare_section, output_extrema };
enum class Phase { transient, settled };

std::string to_string(BifurcationSource source);
std::string to_string(Phase phase);

struct BifurcationPoint {
  double parameter;
  double value;
  Phase phase;
};

/// Samples before `transient_split` are kept as transient, samples from
/// `settled_from` on as settled; anything in between is dropped.
struct BifurcationDiagram {
  BifurcationSource source = BifurcationSource::node_average_extrema;
  std::size_t transient_split = 2000;
  std::size_t settled_from = 8000;
  std::vector<BifurcationPoint> points;

  void add(double parameter, std::span<const Extremum> samples);
  void add(double parameter, std::span<const SectionCrossing> samples);
  std::vector<double> settled_values(double parameter) const;
};

/// Columns: parameter, value, phase.
void write_bifurcation_csv(const BifurcationDiagram& diagram, const std::filesystem::path& path);

/// Columns: frequency, power.
void write_spectrum_csv(std::span<const SpectrumBin> spectrum, const std::filesystem::path& path);

enum class Classification { supervised_periodic, semi_supervised_chaos, collapsed_chaos, untrained_other };

std::string to_string(Classification c);
Classification classification_from_string(const std::string& text);

/// Metrics of one trained closed loop at one rho.
struct AnalysisReport {
  double rho = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> cle;
  double mle = 0.0;
  std::vector<double> spectrum;  // leading exponents of the closed loop
  std::size_t steps_used = 0;
  std::vector<double> rmse_per_component;
  std::optional<double> mean_q;
  double shape_dev = 0.0;
  std::string shape_metric;  // "mean_q" or "shape_dev"
  double shape_threshold = 0.0;
  Classification classification = Classification::untrained_other;
  double eff_radius_pre = 0.0;
  std::optional<double> eff_radius_post;
  std::optional<std::string> error;

  /// The value compared against `shape_threshold`.
  double shape_value() const { return mean_q.value_or(shape_dev); }
};

nlohmann::json to_json(const AnalysisReport& report);
AnalysisReport report_from_json(const nlohmann::json& j);

}  // namespace skelchaos
