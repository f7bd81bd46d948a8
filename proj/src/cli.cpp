#include "skelchaos/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "skelchaos/analysis.hpp"
#include "skelchaos/config.hpp"
#include "skelchaos/errors.hpp"
#include "skelchaos/persistence.hpp"
#include "skelchaos/search.hpp"
#include "skelchaos/svg.hpp"

namespace fs = std::filesystem;

namespace skelchaos {

namespace {

// Flags shared by every subcommand; each one overrides the matching config key.
struct CommonFlags {
  std::optional<std::string> config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<double> rho;
  std::optional<std::string> out;

  std::optional<std::size_t> nodes;
  std::optional<double> leak;
  std::optional<double> sigma;
  std::optional<std::size_t> t_init;
  std::optional<std::size_t> t_train;
  std::optional<double> beta;
  std::optional<std::size_t> lyap_steps;
  std::optional<std::size_t> lyap_transient;

  std::optional<std::string> generator;
  bool lissajous = false, circle = false, vdp = false, rossler = false;
  std::optional<std::string> csv;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> period;
  std::optional<double> mu;
  std::optional<double> dt;
  std::optional<double> c;
  std::optional<std::string> rossler_form;
  std::optional<std::size_t> resample;
  bool close = false;
  bool no_normalize = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "INI config file")->check(CLI::ExistingFile);
  app->add_option("--set", f.sets, "Override a config key: section.key=value (repeatable)");
  app->add_option("--seed", f.seed, "Reservoir seed");
  app->add_option("--rho", f.rho, "Spectral scale rho");
  app->add_option("--out", f.out, "Output directory (default $SKELCHAOS_OUT or ./out)");

  app->add_option("--nodes", f.nodes, "Reservoir size N");
  app->add_option("--leak", f.leak, "Leak rate a");
  app->add_option("--sigma", f.sigma, "Input scale sigma");
  app->add_option("--t-init", f.t_init, "Washout steps");
  app->add_option("--t-train", f.t_train, "Regression steps");
  app->add_option("--beta", f.beta, "Ridge regularizer");
  app->add_option("--lyap-steps", f.lyap_steps, "Closed-loop / tangent steps");
  app->add_option("--lyap-transient", f.lyap_transient, "Tangent transient steps");

  app->add_option("--skeleton", f.generator, "Generator: lissajous | circle | vdp | rossler | csv");
  app->add_flag("--lissajous", f.lissajous, "Lissajous skeleton");
  app->add_flag("--circle", f.circle, "Unit-circle skeleton");
  app->add_flag("--vdp", f.vdp, "Van der Pol limit cycle");
  app->add_flag("--rossler", f.rossler, "Rossler periodic orbit");
  app->add_option("--csv", f.csv, "Hand-drawn curve CSV");
  app->add_option("--steps", f.steps, "Skeleton length");
  app->add_option("--period", f.period, "Unit-circle period");
  app->add_option("--mu", f.mu, "Van der Pol mu");
  app->add_option("--dt", f.dt, "Sampling step (vdp, rossler)");
  app->add_option("--c", f.c, "Rossler c");
  app->add_option("--rossler-form", f.rossler_form, "standard | literal");
  app->add_option("--resample", f.resample, "Arc-length resample count (csv)");
  app->add_flag("--close", f.close, "Treat the CSV curve as closed");
  app->add_flag("--no-normalize", f.no_normalize, "Keep CSV coordinates as drawn");
}

void apply_set(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw InputError(fmt::format("--set expects section.key=value, got '{}'", assignment));
  }
  // reuse the INI reader so the key table lives in one place
  const fs::path tmp = fs::temp_directory_path() /
                       fmt::format("skelchaos-set-{}.ini", std::chrono::steady_clock::now().time_since_epoch().count());
  {
    std::ofstream out(tmp);
    out << "[" << assignment.substr(0, dot) << "]\n" << assignment.substr(dot + 1) << "\n";
  }
  try {
    apply_config_file(cfg, tmp);
  } catch (...) {
    fs::remove(tmp);
    throw;
  }
  fs::remove(tmp);
}

ExperimentConfig build_config(const CommonFlags& f) {
  ExperimentConfig cfg;
  if (f.config) apply_config_file(cfg, *f.config);
  for (const auto& s : f.sets) apply_set(cfg, s);

  if (f.seed) {
    cfg.reservoir.seed = *f.seed;
    cfg.search.seeds = {*f.seed};
  }
  if (f.rho) cfg.reservoir.spectral_scale = *f.rho;
  if (f.nodes) cfg.reservoir.n_nodes = *f.nodes;
  if (f.leak) cfg.reservoir.leak_rate = *f.leak;
  if (f.sigma) cfg.reservoir.input_scale = *f.sigma;
  if (f.t_init) cfg.training.t_init = *f.t_init;
  if (f.t_train) cfg.training.t_train = *f.t_train;
  if (f.beta) cfg.training.beta = *f.beta;
  if (f.lyap_steps) cfg.pipeline.tangent.steps = *f.lyap_steps;
  if (f.lyap_transient) cfg.pipeline.tangent.transient = *f.lyap_transient;

  const int picked = int(f.lissajous) + int(f.circle) + int(f.vdp) + int(f.rossler) + int(f.csv.has_value()) +
                     int(f.generator.has_value());
  if (picked > 1) throw InputError("choose one skeleton source");
  if (f.generator) cfg.skeleton.generator = *f.generator;
  if (f.lissajous) cfg.skeleton.generator = "lissajous";
  if (f.circle) cfg.skeleton.generator = "circle";
  if (f.vdp) cfg.skeleton.generator = "vdp";
  if (f.rossler) cfg.skeleton.generator = "rossler";
  if (f.csv) {
    cfg.skeleton.generator = "csv";
    cfg.skeleton.csv = *f.csv;
  }
  if (f.steps) cfg.skeleton.steps = *f.steps;
  if (f.period) cfg.skeleton.period = *f.period;
  if (f.mu) cfg.skeleton.mu = *f.mu;
  if (f.dt) cfg.skeleton.dt = *f.dt;
  if (f.c) cfg.skeleton.c = *f.c;
  if (f.rossler_form) cfg.skeleton.rossler_form = *f.rossler_form;
  if (f.resample) cfg.skeleton.resample = *f.resample;
  if (f.close) cfg.skeleton.close = true;
  if (f.no_normalize) cfg.skeleton.normalize = false;

  if (f.out) cfg.output_dir = *f.out;
  if (cfg.output_dir.empty()) cfg.output_dir = default_output_dir();
  return cfg;
}

void progress(std::string_view line) { std::cerr << line << '\n'; }

fs::path ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  return dir;
}

std::vector<double> column(const Matrix& m, Eigen::Index c, Eigen::Index from = 0) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.rows() - from));
  for (Eigen::Index i = from; i < m.rows(); ++i) out.push_back(m(i, c));
  return out;
}

std::vector<double> iota(std::size_t n, double start = 0.0) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = start + static_cast<double>(i);
  return out;
}

void output_plot(const Matrix& z, Eigen::Index from, const std::string& title, const fs::path& path) {
  if (z.cols() >= 2) {
    SvgPlot plot(title, "z_0", "z_1");
    plot.add_line(column(z, 0, from), column(z, 1, from));
    plot.save(path);
  } else {
    SvgPlot plot(title, "step", "z_0");
    plot.add_line(iota(static_cast<std::size_t>(z.rows() - from), static_cast<double>(from)), column(z, 0, from));
    plot.save(path);
  }
}

// ---------------------------------------------------------------- skeleton

int cmd_skeleton(const CommonFlags& flags, const std::optional<std::string>& output) {
  const ExperimentConfig cfg = build_config(flags);
  const Skeleton sk = make_skeleton(cfg.skeleton);
  const fs::path path = output ? fs::path(*output) : ensure_dir(cfg.output_dir) / "skeleton.csv";
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  save_skeleton(sk, path);
  std::cout << path.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- train

int cmd_train(const CommonFlags& flags, const std::optional<std::string>& model_dir) {
  ExperimentConfig cfg = build_config(flags);
  cfg.validate();
  const Skeleton sk = make_skeleton(cfg.skeleton);
  cfg.reservoir.input_dim = sk.dim();
  const fs::path dir = model_dir ? fs::path(*model_dir) : cfg.output_dir / "model";

  progress(fmt::format("building reservoir N={} seed={}", cfg.reservoir.n_nodes, cfg.reservoir.seed));
  const Reservoir res = build_reservoir(cfg.reservoir);
  const TrainedModel model = train(res, sk, cfg.training);
  ensure_dir(dir);
  save_model(model, dir, &sk);

  const PipelineSettings ps = cfg.pipeline_settings();
  const RunTrace open = run_open_loop(model, sk, ps.rmse_steps);
  nlohmann::json report;
  report["rho"] = res.spec().spectral_scale;
  report["seed"] = res.spec().seed;
  report["rmse"] = nlohmann::json::array();
  for (std::size_t c = 0; c < sk.dim(); ++c) {
    report["rmse"].push_back(rmse(open.outputs, sk, c, open.steps(), open.skeleton_offset));
  }
  report["rmse_steps"] = open.steps();
  report["eff_radius_pre"] = effective_radius_pre(res);
  report["eff_radius_post"] = effective_radius_post(res, model.w_hat);
  write_json(dir / "training_report.json", report);
  std::cout << dir.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- analyze

int cmd_analyze(const CommonFlags& flags, const std::string& model_dir) {
  ExperimentConfig cfg = build_config(flags);
  LoadedModel loaded = load_model(model_dir);
  if (flags.rho && std::abs(*flags.rho - loaded.model.reservoir.spec().spectral_scale) > 0.0) {
    throw InputError("analyze: --rho differs from the trained model; retrain instead");
  }
  if (flags.seed && *flags.seed != loaded.model.reservoir.spec().seed) {
    throw InputError("analyze: --seed differs from the trained model; retrain instead");
  }
  cfg.reservoir = loaded.model.reservoir.spec();
  cfg.training = loaded.model.config;
  cfg.validate();
  const Skeleton sk = loaded.skeleton ? *loaded.skeleton : make_skeleton(cfg.skeleton);
  const fs::path out = ensure_dir(flags.out ? fs::path(*flags.out) : fs::path(model_dir) / "analysis");

  RunTrace trace;
  const PipelineSettings ps = cfg.pipeline_settings();
  const AnalysisReport report = analyze_model(loaded.model, sk, ps, cfg.search, &trace);
  write_json(out / "report.json", to_json(report));

  // trace CSV with the first two principal components of the state
  const PcaProjection pca = pca_projection(trace.states, std::min<std::size_t>(2, trace.states.cols()));
  {
    std::ofstream csv(out / "trace.csv");
    csv << "step";
    for (Eigen::Index c = 0; c < trace.outputs.cols(); ++c) csv << ",z_" << c;
    for (Eigen::Index c = 0; c < pca.scores.cols(); ++c) csv << ",pc" << c + 1;
    csv << '\n';
    for (Eigen::Index k = 0; k < trace.outputs.rows(); ++k) {
      csv << k;
      for (Eigen::Index c = 0; c < trace.outputs.cols(); ++c) csv << fmt::format(",{:.17g}", trace.outputs(k, c));
      for (Eigen::Index c = 0; c < pca.scores.cols(); ++c) csv << fmt::format(",{:.17g}", pca.scores(k, c));
      csv << '\n';
    }
  }

  const auto settled = static_cast<Eigen::Index>(std::min(ps.tangent.transient, trace.steps() / 2));
  output_plot(trace.outputs, settled, fmt::format("closed loop, rho = {}", report.rho), out / "output.svg");
  if (pca.scores.cols() >= 2) {
    SvgPlot plot("principal components of x", "pc1", "pc2");
    plot.add_line(column(pca.scores, 0, settled), column(pca.scores, 1, settled));
    plot.save(out / "pca.svg");
  }
  const std::vector<double> x = column(trace.outputs, 0, settled);
  if (x.size() >= 64) {
    const auto bins = power_spectrum(x);
    write_spectrum_csv(bins, out / "spectrum.csv");
    std::vector<double> f, p;
    for (const auto& b : bins) {
      if (b.frequency <= 0.0) continue;
      f.push_back(b.frequency);
      p.push_back(b.power);
    }
    SvgPlot plot("power spectrum of z_0", "cycles / step", "power");
    plot.set_log_y(true);
    plot.add_line(f, p);
    plot.save(out / "spectrum.svg");
  }
  std::cout << (out / "report.json").string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- scan

struct ScanFlags {
  std::optional<std::string> parameter;
  std::optional<double> from, to, step, level;
  std::optional<std::size_t> axis, monitor;
  bool trace_only = false;
};

int cmd_scan(const CommonFlags& flags, const ScanFlags& sf) {
  ExperimentConfig cfg = build_config(flags);
  if (sf.parameter) cfg.scan_parameter = *sf.parameter;
  if (sf.from) cfg.scan_from = *sf.from;
  if (sf.to) cfg.scan_to = *sf.to;
  if (sf.step) cfg.scan_step = *sf.step;
  if (sf.axis) cfg.scan_axis = *sf.axis;
  if (sf.level) cfg.scan_level = *sf.level;
  if (sf.monitor) cfg.scan_nodes = *sf.monitor;
  cfg.validate();

  const Skeleton sk = make_skeleton(cfg.skeleton);
  cfg.reservoir.input_dim = sk.dim();
  if (cfg.scan_axis >= sk.dim()) throw InputError(fmt::format("scan.axis {} out of range", cfg.scan_axis));
  const bool by_rho = cfg.scan_parameter == "rho";
  const std::vector<double> grid = rho_grid(cfg.scan_from, cfg.scan_to, cfg.scan_step);
  if (!by_rho) {
    for (double v : grid) {
      if (v < 0.0 || std::abs(v - std::round(v)) > 1e-9) throw InputError("t_init scan values must be integers");
    }
  }
  const fs::path out = ensure_dir(cfg.output_dir);
  const PipelineSettings base_ps = cfg.pipeline_settings();
  const Reservoir base = build_reservoir(cfg.reservoir);
  const std::size_t monitored = std::min<std::size_t>(cfg.scan_nodes, cfg.reservoir.n_nodes);
  std::vector<std::size_t> nodes = [&] {
    std::vector<std::size_t> v(monitored);
    for (std::size_t i = 0; i < monitored; ++i) v[i] = i;
    return v;
  }();

  BifurcationDiagram extrema;
  extrema.source = BifurcationSource::node_average_extrema;
  extrema.settled_from = base_ps.tangent.steps >= 2000 ? base_ps.tangent.steps - 2000 : 0;
  extrema.transient_split = std::min(extrema.transient_split, extrema.settled_from);
  std::vector<BifurcationDiagram> sections(monitored, extrema);
  for (auto& d : sections) d.source = BifurcationSource::poincare_section;

  std::ofstream summary(out / "scan_summary.csv");
  summary << "parameter,ok,cle,mle,mean_q,shape_dev,classification,error\n";
  std::size_t ok_points = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = grid[i];
    PipelineSettings ps = base_ps;
    double rho = cfg.reservoir.spectral_scale;
    if (by_rho) rho = v;
    else ps.training.t_init = static_cast<std::size_t>(std::llround(v));
    try {
      const TrainedModel model = train(base.with_spectral_scale(rho), sk, ps.training);
      RunTrace trace;
      std::optional<AnalysisReport> report;
      if (sf.trace_only) trace = run_closed_loop(model, ps.tangent.steps);
      else report = analyze_model(model, sk, ps, cfg.search, &trace);

      const auto ext = node_average_extrema(trace);
      extrema.add(v, ext);
      const auto sec = poincare_section(trace, model.w_out, cfg.scan_axis, cfg.scan_level, nodes);
      for (std::size_t n = 0; n < sec.size(); ++n) sections[n].add(v, sec[n].crossings);

      if (report) {
        summary << fmt::format("{:.10g},1,{},{:.6g},{},{:.6g},{},\n", v,
                               report->cle ? fmt::format("{:.6g}", *report->cle) : "",
                               report->mle, report->mean_q ? fmt::format("{:.6g}", *report->mean_q) : "",
                               report->shape_dev, to_string(report->classification));
        progress(fmt::format("scan {}/{}: {} {:.6g} mle {:+.6f} {}", i + 1, grid.size(), cfg.scan_parameter, v,
                             report->mle, to_string(report->classification)));
      } else {
        summary << fmt::format("{:.10g},1,,,,,,\n", v);
        progress(fmt::format("scan {}/{}: {} {:.6g}", i + 1, grid.size(), cfg.scan_parameter, v));
      }
      ++ok_points;
    } catch (const Error& e) {
      std::string msg = e.what();
      for (char& ch : msg) if (ch == ',' || ch == '\n') ch = ';';
      summary << fmt::format("{:.10g},0,,,,,,{}\n", v, msg);
      progress(fmt::format("scan {}/{}: {} {:.6g} failed: {}", i + 1, grid.size(), cfg.scan_parameter, v, e.what()));
    }
  }
  summary.close();

  auto plot_diagram = [&](const BifurcationDiagram& d, const std::string& stem, const std::string& what) {
    write_bifurcation_csv(d, out / (stem + ".csv"));
    std::vector<double> px, py, tx, ty;
    for (const auto& p : d.points) {
      (p.phase == Phase::settled ? px : tx).push_back(p.parameter);
      (p.phase == Phase::settled ? py : ty).push_back(p.value);
    }
    SvgPlot plot(what, cfg.scan_parameter, "value");
    plot.add_scatter(tx, ty, "#9ad09a", 0.6);
    plot.add_scatter(px, py, "#000000", 0.6);
    plot.save(out / (stem + ".svg"));
  };
  plot_diagram(extrema, "bifurcation_extrema", "node-average extrema");
  for (std::size_t n = 0; n < sections.size(); ++n) {
    plot_diagram(sections[n], fmt::format("bifurcation_poincare_node{}", nodes[n]),
                 fmt::format("Poincare section z_{} = {}, node {}", cfg.scan_axis, cfg.scan_level, nodes[n]));
  }
  std::cout << (out / "scan_summary.csv").string() << '\n';
  progress(fmt::format("{} of {} points succeeded", ok_points, grid.size()));
  return 10 * ok_points >= 9 * grid.size() ? 0 : 3;
}

// ---------------------------------------------------------------- search

struct SearchFlags {
  std::optional<std::string> seeds;
  std::optional<double> rho_lo, rho_hi, grid_step, q_threshold, shape_threshold, rmse_threshold, mle_tol, ladder_step;
  std::optional<std::size_t> max_bisections, prescan, extension;
};

int cmd_search(const CommonFlags& flags, const SearchFlags& sf) {
  ExperimentConfig cfg = build_config(flags);
  if (sf.seeds) apply_set(cfg, "search.seeds=" + *sf.seeds);
  if (sf.rho_lo) cfg.search.rho_lo = *sf.rho_lo;
  if (sf.rho_hi) cfg.search.rho_hi = *sf.rho_hi;
  if (sf.grid_step) cfg.search.grid_step = *sf.grid_step;
  if (sf.q_threshold) cfg.search.q_threshold = *sf.q_threshold;
  if (sf.shape_threshold) cfg.search.shape_dev_threshold = *sf.shape_threshold;
  if (sf.rmse_threshold) cfg.search.rmse_threshold = *sf.rmse_threshold;
  if (sf.mle_tol) cfg.search.mle_periodic_tol = *sf.mle_tol;
  if (sf.ladder_step) cfg.search.ladder_step = *sf.ladder_step;
  if (sf.max_bisections) cfg.search.max_bisections = *sf.max_bisections;
  if (sf.prescan) cfg.search.prescan_points = *sf.prescan;
  if (sf.extension) cfg.search.scan_extension = *sf.extension;
  cfg.validate();

  const Skeleton sk = make_skeleton(cfg.skeleton);
  cfg.reservoir.input_dim = sk.dim();
  const fs::path out = ensure_dir(cfg.output_dir);
  const PipelineSettings ps = cfg.pipeline_settings();

  nlohmann::json summary;
  summary["config"] = to_json(cfg.search);
  summary["reservoir"] = to_json(cfg.reservoir);
  summary["seeds"] = nlohmann::json::array();
  std::ofstream csv(out / "search_summary.csv");
  csv << "seed,status,rho_edge,rho_supervised,n_candidates,note\n";
  bool bracket_failure = false;
  std::size_t with_candidates = 0;

  for (const std::uint64_t seed : cfg.search.seeds) {
    ReservoirSpec spec = cfg.reservoir;
    spec.seed = seed;
    nlohmann::json entry{{"seed", seed}};
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Reservoir base = build_reservoir(spec);
      const SearchResult result = run_search(base, sk, ps, cfg.search, progress);
      const auto stem = fmt::format("search_seed{}", seed);
      write_json(out / (stem + ".json"), to_json(result));
      write_search_csv(result, out / (stem + ".csv"));
      for (const auto& cand : result.candidates) {
        const TrainedModel model = train(base.with_spectral_scale(cand.rho), sk, ps.training);
        const RunTrace trace = run_closed_loop(model, ps.tangent.steps);
        const auto from = static_cast<Eigen::Index>(std::min(ps.tangent.transient, trace.steps() / 2));
        output_plot(trace.outputs, from, fmt::format("seed {}, rho = {:.6f}, MLE = {:.4f}", seed, cand.rho, cand.mle),
                    out / fmt::format("{}_candidate_rho{:.6f}.svg", stem, cand.rho));
      }
      entry["status"] = "ok";
      entry["rho_edge"] = result.rho_edge ? nlohmann::json(*result.rho_edge) : nlohmann::json(nullptr);
      entry["rho_supervised"] = result.rho_supervised ? nlohmann::json(*result.rho_supervised) : nlohmann::json(nullptr);
      entry["n_candidates"] = result.candidates.size();
      entry["note"] = result.note;
      entry["result_file"] = stem + ".json";
      if (!result.candidates.empty()) ++with_candidates;
      csv << fmt::format("{},ok,{},{},{},{}\n", seed, result.rho_edge ? fmt::format("{:.6f}", *result.rho_edge) : "",
                         result.rho_supervised ? fmt::format("{:.6f}", *result.rho_supervised) : "",
                         result.candidates.size(), result.note);
    } catch (const BracketError& e) {
      bracket_failure = true;
      progress(fmt::format("seed {}: {}", seed, e.what()));
      entry["status"] = "bracket-error";
      entry["error"] = e.what();
      entry["bracket"] = {{"rho_lo", e.rho_lo}, {"cle_lo", e.cle_lo}, {"rho_hi", e.rho_hi}, {"cle_hi", e.cle_hi}};
      entry["n_candidates"] = 0;
      csv << fmt::format("{},bracket-error,,,0,CLE({})={:+.4g} CLE({})={:+.4g}\n", seed, e.rho_lo, e.cle_lo, e.rho_hi,
                         e.cle_hi);
    }
    entry["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    summary["seeds"].push_back(entry);
  }
  summary["seeds_with_candidates"] = with_candidates;
  summary["note"] = with_candidates == 0 ? "no semi-supervised candidate found for any seed"
                                         : fmt::format("semi-supervised candidates found for {} of {} seeds",
                                                       with_candidates, cfg.search.seeds.size());
  write_json(out / "search_summary.json", summary);
  std::cout << (out / "search_summary.json").string() << '\n';
  return bracket_failure ? 4 : 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Design chaotic attractors along a periodic skeleton with a leaky echo state network"};
  app.require_subcommand(1);

  CommonFlags common;

  auto* sk_cmd = app.add_subcommand("skeleton", "Write a skeleton CSV and its JSON sidecar");
  add_common(sk_cmd, common);
  std::optional<std::string> sk_output;
  sk_cmd->add_option("-o,--output", sk_output, "CSV path (default <out>/skeleton.csv)");

  auto* train_cmd = app.add_subcommand("train", "Teacher-force, fit the readout and save the model");
  add_common(train_cmd, common);
  std::optional<std::string> train_model;
  train_cmd->add_option("--model", train_model, "Model directory (default <out>/model)");

  auto* analyze_cmd = app.add_subcommand("analyze", "Closed-loop run, exponents, shape metrics, PCA and spectrum");
  add_common(analyze_cmd, common);
  std::string analyze_model_dir;
  analyze_cmd->add_option("--model", analyze_model_dir, "Model directory")->required();

  auto* scan_cmd = app.add_subcommand("scan", "Bifurcation diagrams over rho or T_init");
  add_common(scan_cmd, common);
  ScanFlags scan;
  scan_cmd->add_option("--param", scan.parameter, "rho | t_init");
  scan_cmd->add_option("--from", scan.from, "First value");
  scan_cmd->add_option("--to", scan.to, "Last value (inclusive)");
  scan_cmd->add_option("--step", scan.step, "Grid step");
  scan_cmd->add_option("--axis", scan.axis, "Output component of the Poincare section");
  scan_cmd->add_option("--level", scan.level, "Section level");
  scan_cmd->add_option("--monitor", scan.monitor, "Number of monitored nodes");
  scan_cmd->add_flag("--trace-only", scan.trace_only, "Skip exponents and shape metrics");

  auto* search_cmd = app.add_subcommand("search", "Locate rho_edge, rho_supervised and semi-supervised points");
  add_common(search_cmd, common);
  SearchFlags search;
  search_cmd->add_option("--seeds", search.seeds, "Comma-separated reservoir seeds");
  search_cmd->add_option("--rho-lo", search.rho_lo, "Lower end of the edge bracket");
  search_cmd->add_option("--rho-hi", search.rho_hi, "Upper end of the edge bracket");
  search_cmd->add_option("--grid-step", search.grid_step, "Scan grid step");
  search_cmd->add_option("--q-threshold", search.q_threshold, "<Q> threshold");
  search_cmd->add_option("--shape-threshold", search.shape_threshold, "Shape deviation threshold (no Q form)");
  search_cmd->add_option("--rmse-threshold", search.rmse_threshold, "Open-loop RMSE threshold");
  search_cmd->add_option("--mle-tol", search.mle_tol, "Periodicity tolerance on the MLE");
  search_cmd->add_option("--ladder-step", search.ladder_step, "Step of the ladder below rho_edge");
  search_cmd->add_option("--max-bisections", search.max_bisections, "Bisection limit");
  search_cmd->add_option("--prescan", search.prescan, "Edge pre-scan points");
  search_cmd->add_option("--extension", search.extension, "Grid steps scanned past rho_edge");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sk_cmd) return cmd_skeleton(common, sk_output);
    if (*train_cmd) return cmd_train(common, train_model);
    if (*analyze_cmd) return cmd_analyze(common, analyze_model_dir);
    if (*scan_cmd) return cmd_scan(common, scan);
    if (*search_cmd) return cmd_search(common, search);
  } catch (const BracketError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace skelchaos
