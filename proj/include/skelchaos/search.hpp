#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "skelchaos/analysis.hpp"
#include "skelchaos/lyapunov.hpp"
#include "skelchaos/reservoir.hpp"
#include "skelchaos/skeleton.hpp"
#include "skelchaos/training.hpp"

namespace skelchaos {

using ProgressSink = std::function<void(std::string_view)>;

struct SearchConfig {
  double rho_lo = 0.8;
  double rho_hi = 1.6;
  double grid_step = 5e-4;
  double q_threshold = 1e-2;
  /// Used instead of q_threshold for skeletons without a Q form.
  double shape_dev_threshold = 5e-2;
  double rmse_threshold = 1e-2;
  double mle_periodic_tol = 1e-3;
  std::size_t max_bisections = 20;
  std::size_t prescan_points = 16;
  /// Grid steps scanned past rho_edge.
  std::size_t scan_extension = 10;
  /// Spacing of the downward ladder below rho_edge in find_supervised.
  double ladder_step = 0.02;
  std::vector<std::uint64_t> seeds{1};

  void validate() const;
};

/// What is computed for each trained point.
struct PipelineSettings {
  TrainingConfig training;
  TangentSettings tangent;  // closed-loop run length and MLE; also used for the CLE
  std::size_t q_window = 2000;
  std::size_t rmse_steps = 10000;
  /// Conditional exponent and open-loop RMSE.
  bool driven_metrics = true;
  bool post_radius = true;
};

/// Q is registered for the Lissajous skeleton only.
bool has_q_form(const Skeleton& sk);

/// supervised-periodic: |MLE| <= tol and shape below threshold;
/// semi-supervised-chaos: MLE > tol and shape below threshold;
/// collapsed-chaos: MLE > tol and shape at or above threshold;
/// untrained-other: everything else.
Classification classify(const AnalysisReport& report, const SearchConfig& cfg);

/// Metrics of a trained model. `closed_loop` receives the closed-loop trace
/// the MLE was computed along.
AnalysisReport analyze_model(const TrainedModel& model, const Skeleton& sk, const PipelineSettings& settings,
                             const SearchConfig& cfg, RunTrace* closed_loop = nullptr);

/// Train at `rho` on the weights of `base` and analyze.
AnalysisReport evaluate_point(const Reservoir& base, double rho, const Skeleton& sk, const PipelineSettings& settings,
                              const SearchConfig& cfg);

struct EdgeSearch {
  double rho_edge = 0.0;
  std::vector<std::pair<double, double>> evaluations;  // (rho, CLE) in evaluation order
};

/// Pre-scan `prescan_points` evenly spaced values of rho in [rho_lo, rho_hi],
/// take the outermost negative-to-nonnegative transition and bisect it down to
/// `grid_step`. Returns the largest tested rho with CLE < 0. Throws
/// BracketError unless CLE(rho_lo) < 0 < CLE(rho_hi).
EdgeSearch find_edge(const std::function<double(double)>& cle_of_rho, const SearchConfig& cfg, const ProgressSink& log = {});
EdgeSearch find_edge(const Reservoir& base, const Skeleton& sk, const PipelineSettings& settings, const SearchConfig& cfg,
                     const ProgressSink& log = {});

struct SupervisedSearch {
  std::optional<double> rho_supervised;
  std::vector<AnalysisReport> evaluations;
  /// The skeleton is identically zero; acceptance then only asks for MLE <= tol.
  bool degenerate_target = false;
};

/// Walk down from rho_edge in `ladder_step` steps until a point is accepted
/// (RMSE below threshold on every component, |MLE| <= tol, shape below
/// threshold), then bisect between it and the rejected rung above.
SupervisedSearch find_supervised(const Reservoir& base, const Skeleton& sk, const PipelineSettings& settings,
                                 const SearchConfig& cfg, double rho_edge, const ProgressSink& log = {});

struct SearchResult {
  std::uint64_t seed = 0;
  std::optional<double> rho_edge;
  std::optional<double> rho_supervised;
  std::vector<AnalysisReport> candidates;
  std::vector<AnalysisReport> full_scan;
  std::vector<std::pair<double, double>> edge_evaluations;
  std::vector<AnalysisReport> supervised_evaluations;
  bool degenerate_target = false;
  std::string note;
};

/// Evenly spaced grid from `from` in steps of `step`, ending at the last value <= `to`.
std::vector<double> rho_grid(double from, double to, double step);

/// Evaluate every grid point of [rho_supervised, rho_edge] plus
/// `scan_extension` points beyond, and collect semi-supervised candidates.
/// Failures are recorded per point. An empty interval gives an empty result.
SearchResult scan_interval(const Reservoir& base, const Skeleton& sk, const PipelineSettings& settings,
                           const SearchConfig& cfg, double rho_supervised, double rho_edge, const ProgressSink& log = {});

/// find_edge, find_supervised and scan_interval for one reservoir realization.
SearchResult run_search(const Reservoir& base, const Skeleton& sk, const PipelineSettings& settings, const SearchConfig& cfg,
                        const ProgressSink& log = {});

nlohmann::json to_json(const SearchConfig& cfg);
nlohmann::json to_json(const SearchResult& result);

/// Columns: rho, cle, mle, mean_q, shape_dev, classification (one row per scanned point).
void write_search_csv(const SearchResult& result, const std::filesystem::path& path);

}  // namespace skelchaos
