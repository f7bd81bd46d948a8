#include "skelchaos/search.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "skelchaos/errors.hpp"

namespace skelchaos {

namespace {

void say(const ProgressSink& log, const std::string& text) {
  if (log) log(text);
}

std::string opt_num(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? fmt::format("{:.6g}", *v) : std::string{};
}

bool accepted_as_supervised(const AnalysisReport& r, const SearchConfig& cfg, bool degenerate) {
  if (r.error) return false;
  // a zero target only asks for a closed loop that is not chaotic
  if (degenerate) return r.mle <= cfg.mle_periodic_tol;
  if (std::abs(r.mle) > cfg.mle_periodic_tol) return false;
  const double worst = r.rmse_per_component.empty()
                           ? 0.0
                           : *std::max_element(r.rmse_per_component.begin(), r.rmse_per_component.end());
  return worst < cfg.rmse_threshold && r.shape_value() < r.shape_threshold;
}

}  // namespace

void SearchConfig::validate() const {
  if (!(rho_lo > 0.0) || !(rho_hi > rho_lo)) {
    throw InputError(fmt::format("search: need 0 < rho_lo < rho_hi, got [{}, {}]", rho_lo, rho_hi));
  }
  if (!(grid_step > 0.0)) throw InputError("search: grid_step must be positive");
  if (!(ladder_step > 0.0)) throw InputError("search: ladder_step must be positive");
  if (!(q_threshold > 0.0) || !(shape_dev_threshold > 0.0) || !(rmse_threshold > 0.0)) {
    throw InputError("search: thresholds must be positive");
  }
  if (!(mle_periodic_tol >= 0.0)) throw InputError("search: mle_periodic_tol must be non-negative");
  if (prescan_points < 2) throw InputError("search: prescan_points must be at least 2");
  if (seeds.empty()) throw InputError("search: no seeds given");
}

bool has_q_form(const Skeleton& sk) { return sk.label == "lissajous" && sk.dim() == 2; }

Classification classify(const AnalysisReport& report, const SearchConfig& cfg) {
  if (report.error) return Classification::untrained_other;
  const double tol = cfg.mle_periodic_tol;
  const bool on_shape = report.shape_value() < report.shape_threshold;
  if (std::abs(report.mle) <= tol && on_shape) return Classification::supervised_periodic;
  if (report.mle > tol) return on_shape ? Classification::semi_supervised_chaos : Classification::collapsed_chaos;
  return Classification::untrained_other;
}

AnalysisReport analyze_model(const TrainedModel& model, const Skeleton& sk, const PipelineSettings& settings,
                             const SearchConfig& cfg, RunTrace* closed_loop) {
  AnalysisReport r;
  r.rho = model.reservoir.spec().spectral_scale;
  r.seed = model.reservoir.spec().seed;
  r.eff_radius_pre = effective_radius_pre(model.reservoir);
  if (settings.post_radius) r.eff_radius_post = effective_radius_post(model.reservoir, model.w_hat);

  RunTrace local;
  RunTrace& trace = closed_loop ? *closed_loop : local;
  const LyapunovResult mle = autonomous_spectrum(model, settings.tangent, &trace);
  r.spectrum.assign(mle.exponents.begin(), mle.exponents.end());
  r.mle = mle.leading();
  r.steps_used = mle.steps_used;

  const std::size_t window = std::min(settings.q_window, trace.steps());
  if (has_q_form(sk)) {
    r.mean_q = mean_q(trace, window);
    r.shape_metric = "mean_q";
    r.shape_threshold = cfg.q_threshold;
  } else {
    r.shape_metric = "shape_dev";
    r.shape_threshold = cfg.shape_dev_threshold;
  }
  r.shape_dev = shape_deviation(trace.outputs.bottomRows(static_cast<Eigen::Index>(window)), sk);

  if (settings.driven_metrics) {
    r.cle = conditional_mle(model.reservoir, sk, settings.tangent).leading();
    const RunTrace open = run_open_loop(model, sk, settings.rmse_steps);
    for (std::size_t c = 0; c < sk.dim(); ++c) {
      r.rmse_per_component.push_back(rmse(open.outputs, sk, c, open.steps(), open.skeleton_offset));
    }
  }
  r.classification = classify(r, cfg);
  return r;
}

AnalysisReport evaluate_point(const Reservoir& base, double rho, const Skeleton& sk, const PipelineSettings& settings,
                              const SearchConfig& cfg) {
  try {
    const TrainedModel model = train(base.with_spectral_scale(rho), sk, settings.training);
    return analyze_model(model, sk, settings, cfg);
  } catch (const Error& e) {
    AnalysisReport r;
    r.rho = rho;
    r.seed = base.spec().seed;
    r.error = e.what();
    r.shape_metric = has_q_form(sk) ? "mean_q" : "shape_dev";
    r.shape_threshold = has_q_form(sk) ? cfg.q_threshold : cfg.shape_dev_threshold;
    r.shape_dev = std::numeric_limits<double>::quiet_NaN();
    r.mle = std::numeric_limits<double>::quiet_NaN();
    r.classification = Classification::untrained_other;
    return r;
  }
}

EdgeSearch find_edge(const std::function<double(double)>& cle_of_rho, const SearchConfig& cfg, const ProgressSink& log) {
  cfg.validate();
  EdgeSearch out;
  auto eval = [&](double rho) {
    const double v = cle_of_rho(rho);
    out.evaluations.emplace_back(rho, v);
    say(log, fmt::format("edge: rho {:.6f} cle {:+.6f}", rho, v));
    return v;
  };

  const std::size_t n = cfg.prescan_points;
  std::vector<double> rhos(n), cles(n);
  for (std::size_t i = 0; i < n; ++i) {
    rhos[i] = cfg.rho_lo + (cfg.rho_hi - cfg.rho_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    cles[i] = eval(rhos[i]);
  }
  if (!(cles.front() < 0.0) || !(cles.back() > 0.0)) {
    throw BracketError(fmt::format("edge search: CLE does not change sign on [{}, {}] ({:+.3g}, {:+.3g})", cfg.rho_lo,
                                   cfg.rho_hi, cles.front(), cles.back()),
                       cfg.rho_lo, cles.front(), cfg.rho_hi, cles.back());
  }
  // outermost transition: the last negative pre-scan point
  std::size_t i = n - 1;
  while (!(cles[i] < 0.0)) --i;
  double lo = rhos[i];
  double hi = rhos[i + 1];
  for (std::size_t it = 0; it < cfg.max_bisections && hi - lo > cfg.grid_step; ++it) {
    const double mid = 0.5 * (lo + hi);
    (eval(mid) < 0.0 ? lo : hi) = mid;
  }
  out.rho_edge = lo;
  return out;
}

EdgeSearch find_edge(const Reservoir& base, const Skeleton& sk, const PipelineSettings& settings, const SearchConfig& cfg,
                     const ProgressSink& log) {
  return find_edge(
      [&](double rho) { return conditional_mle(base.with_spectral_scale(rho), sk, settings.tangent).leading(); }, cfg,
      log);
}

SupervisedSearch find_supervised(const Reservoir& base, const Skeleton& sk, const PipelineSettings& settings,
                                 const SearchConfig& cfg, double rho_edge, const ProgressSink& log) {
  cfg.validate();
  SupervisedSearch out;
  out.degenerate_target = sk.samples.cwiseAbs().maxCoeff() == 0.0;
  auto ok = [&](double rho) {
    AnalysisReport r = evaluate_point(base, rho, sk, settings, cfg);
    const bool good = accepted_as_supervised(r, cfg, out.degenerate_target);
    say(log, fmt::format("supervised: rho {:.6f} mle {:+.6f} shape {:.3g} -> {}", rho, r.mle, r.shape_value(),
                         good ? "accept" : "reject"));
    out.evaluations.push_back(std::move(r));
    return good;
  };

  double hi = rho_edge;
  double lo = rho_edge;
  bool found = false;
  for (std::size_t k = 1;; ++k) {
    const double rho = rho_edge - static_cast<double>(k) * cfg.ladder_step;
    if (rho < cfg.rho_lo - 1e-12) break;
    if (ok(rho)) {
      lo = rho;
      found = true;
      break;
    }
    hi = rho;
  }
  if (!found) return out;
  for (std::size_t it = 0; it < cfg.max_bisections && hi - lo > cfg.grid_step; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  out.rho_supervised = lo;
  return out;
}

std::vector<double> rho_grid(double from, double to, double step) {
  if (!(step > 0.0)) throw InputError("rho_grid: step must be positive");
  std::vector<double> out;
  if (to < from) return out;
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(from + static_cast<double>(i) * step);
  return out;
}

SearchResult scan_interval(const Reservoir& base, const Skeleton& sk, const PipelineSettings& settings,
                           const SearchConfig& cfg, double rho_supervised, double rho_edge, const ProgressSink& log) {
  SearchResult out;
  out.seed = base.spec().seed;
  out.rho_edge = rho_edge;
  out.rho_supervised = rho_supervised;
  if (!(rho_supervised < rho_edge)) return out;

  std::vector<double> grid = rho_grid(rho_supervised, rho_edge, cfg.grid_step);
  const double last = grid.back();
  for (std::size_t k = 1; k <= cfg.scan_extension; ++k) grid.push_back(last + static_cast<double>(k) * cfg.grid_step);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    AnalysisReport r = evaluate_point(base, grid[i], sk, settings, cfg);
    say(log, fmt::format("scan {}/{}: rho {:.6f} mle {:+.6f} shape {:.3g} {}", i + 1, grid.size(), r.rho, r.mle,
                         r.shape_value(), r.error ? "error: " + *r.error : to_string(r.classification)));
    if (r.classification == Classification::semi_supervised_chaos) out.candidates.push_back(r);
    out.full_scan.push_back(std::move(r));
  }
  return out;
}

SearchResult run_search(const Reservoir& base, const Skeleton& sk, const PipelineSettings& settings, const SearchConfig& cfg,
                        const ProgressSink& log) {
  const EdgeSearch edge = find_edge(base, sk, settings, cfg, log);
  SupervisedSearch sup = find_supervised(base, sk, settings, cfg, edge.rho_edge, log);

  SearchResult out;
  if (sup.rho_supervised) {
    out = scan_interval(base, sk, settings, cfg, *sup.rho_supervised, edge.rho_edge, log);
    if (out.full_scan.empty()) out.note = "empty interval: rho_supervised equals rho_edge";
    else if (out.candidates.empty()) out.note = "no semi-supervised point in the scanned interval";
  } else {
    out.seed = base.spec().seed;
    out.rho_edge = edge.rho_edge;
    out.note = "no supervised point below rho_edge; change the fixed settings (sigma, a, T_init)";
  }
  out.edge_evaluations = edge.evaluations;
  out.supervised_evaluations = std::move(sup.evaluations);
  out.degenerate_target = sup.degenerate_target;
  return out;
}

nlohmann::json to_json(const SearchConfig& cfg) {
  return {{"rho_lo", cfg.rho_lo},
          {"rho_hi", cfg.rho_hi},
          {"grid_step", cfg.grid_step},
          {"q_threshold", cfg.q_threshold},
          {"shape_dev_threshold", cfg.shape_dev_threshold},
          {"rmse_threshold", cfg.rmse_threshold},
          {"mle_periodic_tol", cfg.mle_periodic_tol},
          {"max_bisections", cfg.max_bisections},
          {"prescan_points", cfg.prescan_points},
          {"scan_extension", cfg.scan_extension},
          {"ladder_step", cfg.ladder_step},
          {"seeds", cfg.seeds}};
}

nlohmann::json to_json(const SearchResult& result) {
  nlohmann::json j;
  j["seed"] = result.seed;
  j["rho_edge"] = result.rho_edge ? nlohmann::json(*result.rho_edge) : nlohmann::json(nullptr);
  j["rho_supervised"] = result.rho_supervised ? nlohmann::json(*result.rho_supervised) : nlohmann::json(nullptr);
  j["candidates"] = nlohmann::json::array();
  for (const auto& r : result.candidates) j["candidates"].push_back({{"rho", r.rho}, {"report", to_json(r)}});
  j["full_scan"] = nlohmann::json::array();
  for (const auto& r : result.full_scan) j["full_scan"].push_back(to_json(r));
  j["edge_evaluations"] = nlohmann::json::array();
  for (const auto& [rho, cle] : result.edge_evaluations) j["edge_evaluations"].push_back({{"rho", rho}, {"cle", cle}});
  j["supervised_evaluations"] = nlohmann::json::array();
  for (const auto& r : result.supervised_evaluations) j["supervised_evaluations"].push_back(to_json(r));
  j["degenerate_target"] = result.degenerate_target;
  j["note"] = result.note;
  j["exponent_units"] = "natural log per step";
  return j;
}

void write_search_csv(const SearchResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << "rho,cle,mle,mean_q,shape_dev,classification\n";
  for (const auto& r : result.full_scan) {
    out << fmt::format("{:.6f},{},{},{},{},{}\n", r.rho, opt_num(r.cle), opt_num(r.mle), opt_num(r.mean_q),
                       opt_num(r.shape_dev), to_string(r.classification));
  }
}

}  // namespace skelchaos
