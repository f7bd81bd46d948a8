#include "skelchaos/config.hpp"

#include <cstdlib>
#include <functional>
#include <map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "skelchaos/errors.hpp"

namespace skelchaos {

namespace {

template <class T>
T parse_value(const std::string& key, const std::string& text);

template <>
double parse_value<double>(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(fmt::format("config: {} = '{}' is not a number", key, text));
}

template <>
std::size_t parse_value<std::size_t>(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    if (!text.empty() && text[0] != '-') {
      const auto v = std::stoull(text, &used);
      if (used == text.size()) return static_cast<std::size_t>(v);
    }
  } catch (const std::exception&) {
  }
  throw ParseError(fmt::format("config: {} = '{}' is not a non-negative integer", key, text));
}

template <>
bool parse_value<bool>(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParseError(fmt::format("config: {} = '{}' is not a boolean", key, text));
}

template <>
std::string parse_value<std::string>(const std::string&, const std::string& text) {
  return text;
}

std::vector<std::uint64_t> parse_seeds(const std::string& key, const std::string& text) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    out.push_back(parse_value<std::size_t>(key, item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

template <class T>
Setter set(T ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*field = parse_value<T>(k, v); };
}

template <class T, class Sub>
Setter set(Sub ExperimentConfig::*sub, T Sub::*field) {
  return [sub, field](ExperimentConfig& c, const std::string& k, const std::string& v) {
    (c.*sub).*field = parse_value<T>(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"reservoir.n_nodes", set(&ExperimentConfig::reservoir, &ReservoirSpec::n_nodes)},
      {"reservoir.leak_rate", set(&ExperimentConfig::reservoir, &ReservoirSpec::leak_rate)},
      {"reservoir.spectral_scale", set(&ExperimentConfig::reservoir, &ReservoirSpec::spectral_scale)},
      {"reservoir.input_scale", set(&ExperimentConfig::reservoir, &ReservoirSpec::input_scale)},
      {"reservoir.seed",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.reservoir.seed = parse_value<std::size_t>(k, v);
       }},
      {"training.t_init", set(&ExperimentConfig::training, &TrainingConfig::t_init)},
      {"training.t_train", set(&ExperimentConfig::training, &TrainingConfig::t_train)},
      {"training.beta", set(&ExperimentConfig::training, &TrainingConfig::beta)},
      {"skeleton.generator", set(&ExperimentConfig::skeleton, &SkeletonSelector::generator)},
      {"skeleton.steps", set(&ExperimentConfig::skeleton, &SkeletonSelector::steps)},
      {"skeleton.period", set(&ExperimentConfig::skeleton, &SkeletonSelector::period)},
      {"skeleton.mu", set(&ExperimentConfig::skeleton, &SkeletonSelector::mu)},
      {"skeleton.dt", set(&ExperimentConfig::skeleton, &SkeletonSelector::dt)},
      {"skeleton.c", set(&ExperimentConfig::skeleton, &SkeletonSelector::c)},
      {"skeleton.rossler_form", set(&ExperimentConfig::skeleton, &SkeletonSelector::rossler_form)},
      {"skeleton.csv",
       [](ExperimentConfig& c, const std::string&, const std::string& v) { c.skeleton.csv = v; }},
      {"skeleton.resample", set(&ExperimentConfig::skeleton, &SkeletonSelector::resample)},
      {"skeleton.close", set(&ExperimentConfig::skeleton, &SkeletonSelector::close)},
      {"skeleton.normalize", set(&ExperimentConfig::skeleton, &SkeletonSelector::normalize)},
      {"lyapunov.steps",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.pipeline.tangent.steps = parse_value<std::size_t>(k, v);
       }},
      {"lyapunov.transient",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.pipeline.tangent.transient = parse_value<std::size_t>(k, v);
       }},
      {"lyapunov.renorm_every",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.pipeline.tangent.renorm_every = parse_value<std::size_t>(k, v);
       }},
      {"lyapunov.n_exponents",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.pipeline.tangent.n_exponents = parse_value<std::size_t>(k, v);
       }},
      {"analysis.q_window", set(&ExperimentConfig::pipeline, &PipelineSettings::q_window)},
      {"analysis.rmse_steps", set(&ExperimentConfig::pipeline, &PipelineSettings::rmse_steps)},
      {"analysis.driven_metrics", set(&ExperimentConfig::pipeline, &PipelineSettings::driven_metrics)},
      {"analysis.post_radius", set(&ExperimentConfig::pipeline, &PipelineSettings::post_radius)},
      {"search.rho_lo", set(&ExperimentConfig::search, &SearchConfig::rho_lo)},
      {"search.rho_hi", set(&ExperimentConfig::search, &SearchConfig::rho_hi)},
      {"search.grid_step", set(&ExperimentConfig::search, &SearchConfig::grid_step)},
      {"search.q_threshold", set(&ExperimentConfig::search, &SearchConfig::q_threshold)},
      {"search.shape_dev_threshold", set(&ExperimentConfig::search, &SearchConfig::shape_dev_threshold)},
      {"search.rmse_threshold", set(&ExperimentConfig::search, &SearchConfig::rmse_threshold)},
      {"search.mle_periodic_tol", set(&ExperimentConfig::search, &SearchConfig::mle_periodic_tol)},
      {"search.max_bisections", set(&ExperimentConfig::search, &SearchConfig::max_bisections)},
      {"search.prescan_points", set(&ExperimentConfig::search, &SearchConfig::prescan_points)},
      {"search.scan_extension", set(&ExperimentConfig::search, &SearchConfig::scan_extension)},
      {"search.ladder_step", set(&ExperimentConfig::search, &SearchConfig::ladder_step)},
      {"search.seeds",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.search.seeds = parse_seeds(k, v); }},
      {"scan.parameter", set(&ExperimentConfig::scan_parameter)},
      {"scan.from", set(&ExperimentConfig::scan_from)},
      {"scan.to", set(&ExperimentConfig::scan_to)},
      {"scan.step", set(&ExperimentConfig::scan_step)},
      {"scan.axis", set(&ExperimentConfig::scan_axis)},
      {"scan.level", set(&ExperimentConfig::scan_level)},
      {"scan.nodes", set(&ExperimentConfig::scan_nodes)},
      {"output.dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
  };
  return table;
}

}  // namespace

Skeleton make_skeleton(const SkeletonSelector& sel) {
  const auto steps_or = [&](std::size_t fallback) { return sel.steps ? sel.steps : fallback; };
  if (sel.generator == "lissajous") return lissajous(steps_or(100));
  if (sel.generator == "circle") return unit_circle(steps_or(sel.period), sel.period);
  // long enough that training plus a 10,000-step evaluation never wraps
  if (sel.generator == "vdp") return van_der_pol(sel.mu, sel.dt, steps_or(20000));
  if (sel.generator == "rossler") {
    RosslerOptions opt;
    if (sel.rossler_form == "standard") opt.form = RosslerForm::standard;
    else if (sel.rossler_form == "literal") opt.form = RosslerForm::literal;
    else throw InputError(fmt::format("unknown Rossler form '{}' (standard | literal)", sel.rossler_form));
    return rossler_cycle(sel.c, sel.dt, steps_or(20000), opt);
  }
  if (sel.generator == "csv") {
    if (sel.csv.empty()) throw InputError("skeleton generator 'csv' needs a file");
    if (!std::filesystem::exists(sel.csv)) throw InputError(fmt::format("no such file: {}", sel.csv.string()));
    return load_csv(sel.csv, {sel.resample, sel.close, sel.normalize});
  }
  throw InputError(fmt::format("unknown skeleton generator '{}' (lissajous | circle | vdp | rossler | csv)",
                               sel.generator));
}

PipelineSettings ExperimentConfig::pipeline_settings() const {
  PipelineSettings p = pipeline;
  p.training = training;
  return p;
}

void ExperimentConfig::validate() const {
  reservoir.validate();
  search.validate();
  pipeline.tangent.validate(reservoir.n_nodes);
  if (pipeline.q_window == 0 || pipeline.rmse_steps == 0) throw InputError("analysis windows must be positive");
  if (pipeline.q_window > pipeline.tangent.steps) {
    throw InputError(fmt::format("analysis.q_window {} exceeds lyapunov.steps {}", pipeline.q_window,
                                 pipeline.tangent.steps));
  }
  if (scan_parameter != "rho" && scan_parameter != "t_init") {
    throw InputError(fmt::format("scan.parameter must be rho or t_init, got '{}'", scan_parameter));
  }
  if (!(scan_step > 0.0) || scan_to < scan_from) throw InputError("scan range must satisfy from <= to, step > 0");
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError(fmt::format("no such config file: {}", path.string()));
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(fmt::format("config {}: {}", path.string(), e.what()));
  }
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ParseError(fmt::format("config {}: key '{}' outside a section", path.string(), section));
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = table.find(full);
      if (it == table.end()) throw ParseError(fmt::format("config {}: unknown key '{}'", path.string(), full));
      it->second(cfg, full, value.data());
    }
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  ExperimentConfig cfg;
  apply_config_file(cfg, path);
  return cfg;
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("SKELCHAOS_OUT"); env && *env) return env;
  return "out";
}

}  // namespace skelchaos
