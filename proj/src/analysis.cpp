#include "skelchaos/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <unsupported/Eigen/FFT>

#include "skelchaos/errors.hpp"

namespace skelchaos {
namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  return out;
}

Phase phase_of(const BifurcationDiagram& diagram, double step, bool& keep) {
  if (step < static_cast<double>(diagram.transient_split)) {
    keep = true;
    return Phase::transient;
  }
  keep = step >= static_cast<double>(diagram.settled_from);
  return Phase::settled;
}

}  // namespace

double q_index(double x, double y) {
  const double x2 = x * x;
  return std::abs(x2 * x2 - x2 + 0.25 * y * y);
}

double mean_q(const Matrix& outputs, std::size_t window) {
  if (outputs.cols() != 2) {
    throw ApplicabilityError(fmt::format("mean_q: Q is defined for 2-D outputs, got D = {}", outputs.cols()));
  }
  if (window == 0 || window > static_cast<std::size_t>(outputs.rows())) {
    throw InputError(fmt::format("mean_q: window {} outside [1, {}]", window, outputs.rows()));
  }
  const Eigen::Index first = outputs.rows() - static_cast<Eigen::Index>(window);
  double sum = 0.0;
  for (Eigen::Index k = first; k < outputs.rows(); ++k) {
    sum += q_index(outputs(k, 0), outputs(k, 1));
  }
  return sum / static_cast<double>(window);
}

double mean_q(const RunTrace& trace, std::size_t window) { return mean_q(trace.outputs, window); }

double rmse(const Matrix& predictions, const Skeleton& target, std::size_t component, std::size_t t_eval,
            std::size_t target_offset) {
  if (t_eval == 0) throw InputError("rmse: t_eval must be positive");
  if (static_cast<std::size_t>(predictions.rows()) < t_eval) {
    throw InputError(fmt::format("rmse: {} predictions, need {}", predictions.rows(), t_eval));
  }
  if (component >= target.dim() || component >= static_cast<std::size_t>(predictions.cols())) {
    throw InputError(fmt::format("rmse: component {} out of range", component));
  }
  const auto c = static_cast<Eigen::Index>(component);
  double sum = 0.0;
  for (std::size_t k = 0; k < t_eval; ++k) {
    const double err = predictions(static_cast<Eigen::Index>(k), c) -
                       target.samples(static_cast<Eigen::Index>((target_offset + k) % target.size()), c);
    sum += err * err;
  }
  return std::sqrt(sum / static_cast<double>(t_eval));
}

double shape_deviation(const Matrix& points, const Skeleton& sk) {
  if (points.rows() == 0 || sk.size() == 0) throw InputError("shape_deviation: empty input");
  if (static_cast<std::size_t>(points.cols()) != sk.dim()) {
    throw InputError(fmt::format("shape_deviation: points have {} columns, skeleton has {}", points.cols(), sk.dim()));
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double nearest = (sk.samples.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff();
    total += std::sqrt(nearest);
  }
  return total / static_cast<double>(points.rows());
}

std::vector<Extremum> strict_extrema(std::span<const double> series) {
  std::vector<Extremum> out;
  for (std::size_t k = 1; k + 1 < series.size(); ++k) {
    const double prev = series[k - 1];
    const double here = series[k];
    const double next = series[k + 1];
    if ((prev < here && here > next) || (prev > here && here < next)) {
      out.push_back({k, here});
    }
  }
  return out;
}

std::vector<Extremum> node_average_extrema(const RunTrace& trace) {
  if (trace.states.rows() < 3) throw InputError("node_average_extrema: need at least 3 states");
  const Eigen::VectorXd average = trace.states.rowwise().mean();
  return strict_extrema(std::span<const double>(average.data(), static_cast<std::size_t>(average.size())));
}

std::vector<NodeSection> poincare_section(const RunTrace& trace, const Matrix& w_out, std::size_t axis, double level,
                                          std::span<const std::size_t> nodes) {
  if (axis >= static_cast<std::size_t>(w_out.cols())) {
    throw InputError(fmt::format("poincare_section: axis {} out of range for D = {}", axis, w_out.cols()));
  }
  if (w_out.rows() != trace.states.cols()) {
    throw InputError("poincare_section: W_out does not match the trace's state size");
  }
  for (std::size_t node : nodes) {
    if (node >= static_cast<std::size_t>(trace.states.cols())) {
      throw InputError(fmt::format("poincare_section: node {} out of range", node));
    }
  }
  const Eigen::VectorXd signal = (trace.states * w_out.col(static_cast<Eigen::Index>(axis))).array() - level;
  std::vector<NodeSection> sections;
  for (std::size_t node : nodes) sections.push_back({node, {}});
  for (Eigen::Index k = 0; k + 1 < signal.size(); ++k) {
    const double before = signal(k);
    const double after = signal(k + 1);
    if (before < 0.0 && after >= 0.0) {
      const double t = -before / (after - before);
      for (auto& section : sections) {
        const auto node = static_cast<Eigen::Index>(section.node);
        const double value = trace.states(k, node) + t * (trace.states(k + 1, node) - trace.states(k, node));
        section.crossings.push_back({static_cast<double>(k) + t, value});
      }
    }
  }
  return sections;
}

PcaProjection pca_projection(const Matrix& states, std::size_t k) {
  if (k == 0) throw InputError("pca_projection: k must be positive");
  if (static_cast<std::size_t>(states.rows()) < k || static_cast<std::size_t>(states.cols()) < k) {
    throw InputError(fmt::format("pca_projection: {}x{} states cannot give {} components", states.rows(), states.cols(), k));
  }
  PcaProjection out;
  out.mean = states.colwise().mean().transpose();
  const Eigen::MatrixXd centered = states.rowwise() - out.mean.transpose();
  const double denom = states.rows() > 1 ? static_cast<double>(states.rows() - 1) : 1.0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(states.cols(), states.cols());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / denom);
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("pca_projection: eigensolver failed");
  const Eigen::Index n = states.cols();
  const auto kk = static_cast<Eigen::Index>(k);
  out.components.resize(n, kk);
  out.variances.resize(kk);
  // Eigenvalues come in ascending order.
  for (Eigen::Index j = 0; j < kk; ++j) {
    out.components.col(j) = solver.eigenvectors().col(n - 1 - j);
    out.variances(j) = std::max(0.0, solver.eigenvalues()(n - 1 - j));
  }
  out.total_variance = std::max(0.0, solver.eigenvalues().sum());
  out.explained_ratio = out.total_variance > 0.0 ? Vector(out.variances / out.total_variance) : Vector(Vector::Zero(kk));
  const double top = out.variances(0);
  out.degenerate = !(top > 0.0) || out.variances(kk - 1) <= 1e-12 * top;
  out.scores = centered * out.components;
  return out;
}

std::vector<SpectrumBin> power_spectrum(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 64) throw InputError(fmt::format("power_spectrum: need at least 64 samples, got {}", n));
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = series[i] - mean;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> bins;
  fft.fwd(bins, centered);

  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  std::vector<SpectrumBin> out;
  out.reserve(n / 2 + 1);
  for (std::size_t j = 0; j <= n / 2; ++j) {
    const bool mirrored = j != 0 && !(n % 2 == 0 && j == n / 2);
    const double power = std::norm(bins[j]) * norm * (mirrored ? 2.0 : 1.0);
    out.push_back({static_cast<double>(j) / static_cast<double>(n), power});
  }
  return out;
}

std::size_t count_clusters(std::vector<double> values, double tolerance) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  std::size_t clusters = 1;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] - values[i - 1] > tolerance) ++clusters;
  }
  return clusters;
}

std::string to_string(BifurcationSource source) {
  switch (source) {
    case BifurcationSource::node_average_extrema: return "node-average-extrema";
    case BifurcationSource::poincare_section: return "poincare-section";
    case BifurcationSource::output_extrema: return "output-extrema";
  }
  return "unknown";
}

std::string to_string(Phase phase) { return phase == Phase::transient ? "transient" : "settled"; }

void BifurcationDiagram::add(double parameter, std::span<const Extremum> samples) {
  for (const auto& s : samples) {
    bool keep = false;
    const Phase phase = phase_of(*this, static_cast<double>(s.step), keep);
    if (keep) points.push_back({parameter, s.value, phase});
  }
}

void BifurcationDiagram::add(double parameter, std::span<const SectionCrossing> samples) {
  for (const auto& s : samples) {
    bool keep = false;
    const Phase phase = phase_of(*this, s.step, keep);
    if (keep) points.push_back({parameter, s.value, phase});
  }
}

std::vector<double> BifurcationDiagram::settled_values(double parameter) const {
  std::vector<double> out;
  for (const auto& p : points) {
    if (p.parameter == parameter && p.phase == Phase::settled) out.push_back(p.value);
  }
  return out;
}

void write_bifurcation_csv(const BifurcationDiagram& diagram, const std::filesystem::path& path) {
  auto out = open_for_writing(path);
  out << "parameter,value,phase\n";
  for (const auto& p : diagram.points) {
    out << fmt::format("{},{},{}\n", p.parameter, p.value, to_string(p.phase));
  }
}

void write_spectrum_csv(std::span<const SpectrumBin> spectrum, const std::filesystem::path& path) {
  auto out = open_for_writing(path);
  out << "frequency,power\n";
  for (const auto& bin : spectrum) {
    out << fmt::format("{},{}\n", bin.frequency, bin.power);
  }
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::supervised_periodic: return "supervised-periodic";
    case Classification::semi_supervised_chaos: return "semi-supervised-chaos";
    case Classification::collapsed_chaos: return "collapsed-chaos";
    case Classification::untrained_other: return "untrained-other";
  }
  return "untrained-other";
}

Classification classification_from_string(const std::string& text) {
  for (auto c : {Classification::supervised_periodic, Classification::semi_supervised_chaos,
                 Classification::collapsed_chaos, Classification::untrained_other}) {
    if (to_string(c) == text) return c;
  }
  throw ParseError(fmt::format("unknown classification '{}'", text));
}

namespace {

// failed points carry NaN metrics; they are stored as null
nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double number_or_nan(const nlohmann::json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

}  // namespace

nlohmann::json to_json(const AnalysisReport& r) {
  nlohmann::json j;
  j["rho"] = r.rho;
  j["seed"] = r.seed;
  j["cle"] = r.cle ? nlohmann::json(*r.cle) : nlohmann::json(nullptr);
  j["mle"] = finite_or_null(r.mle);
  j["spectrum"] = r.spectrum;
  j["steps_used"] = r.steps_used;
  j["exponent_units"] = "natural log per step";
  j["rmse_per_component"] = r.rmse_per_component;
  j["mean_q"] = r.mean_q ? nlohmann::json(*r.mean_q) : nlohmann::json(nullptr);
  j["shape_dev"] = finite_or_null(r.shape_dev);
  j["shape_metric"] = r.shape_metric;
  j["shape_threshold"] = r.shape_threshold;
  j["classification"] = to_string(r.classification);
  j["eff_radius_pre"] = finite_or_null(r.eff_radius_pre);
  j["eff_radius_post"] = r.eff_radius_post ? nlohmann::json(*r.eff_radius_post) : nlohmann::json(nullptr);
  if (r.error) j["error"] = *r.error;
  return j;
}

AnalysisReport report_from_json(const nlohmann::json& j) {
  try {
    AnalysisReport r;
    r.rho = j.at("rho").get<double>();
    r.seed = j.value("seed", std::uint64_t{0});
    if (!j.at("cle").is_null()) r.cle = j.at("cle").get<double>();
    r.mle = number_or_nan(j.at("mle"));
    r.spectrum = j.value("spectrum", std::vector<double>{});
    r.steps_used = j.value("steps_used", std::size_t{0});
    r.rmse_per_component = j.at("rmse_per_component").get<std::vector<double>>();
    if (!j.at("mean_q").is_null()) r.mean_q = j.at("mean_q").get<double>();
    r.shape_dev = number_or_nan(j.at("shape_dev"));
    r.shape_metric = j.value("shape_metric", std::string{});
    r.shape_threshold = j.value("shape_threshold", 0.0);
    r.classification = classification_from_string(j.at("classification").get<std::string>());
    r.eff_radius_pre = number_or_nan(j.at("eff_radius_pre"));
    if (!j.at("eff_radius_post").is_null()) r.eff_radius_post = j.at("eff_radius_post").get<double>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("analysis report: {}", e.what()));
  }
}

}  // namespace skelchaos
