#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "skelchaos/lyapunov.hpp"
#include "skelchaos/reservoir.hpp"
#include "skelchaos/search.hpp"
#include "skelchaos/skeleton.hpp"
#include "skelchaos/training.hpp"

namespace skelchaos {

/// Which teacher series to use and how to build it.
struct SkeletonSelector {
  std::string generator = "lissajous";  // lissajous | circle | vdp | rossler | csv
  std::size_t steps = 0;                // 0: generator default
  std::size_t period = 100;             // circle
  double mu = 1.0;                      // vdp
  double dt = 0.1;                      // vdp, rossler
  double c = 4.0;                       // rossler
  std::string rossler_form = "standard";
  std::filesystem::path csv;
  std::size_t resample = 0;
  bool close = false;
  bool normalize = true;
};

Skeleton make_skeleton(const SkeletonSelector& sel);

/// Everything a command needs. Loaded from an INI file with one section per
/// module ([reservoir], [training], [skeleton], [lyapunov], [analysis],
/// [search], [scan], [output]); command-line flags are applied on top.
struct ExperimentConfig {
  ReservoirSpec reservoir;
  TrainingConfig training;
  SkeletonSelector skeleton;
  PipelineSettings pipeline;  // training/tangent are copied in by pipeline_settings()
  SearchConfig search;
  std::filesystem::path output_dir;

  // scan
  std::string scan_parameter = "rho";  // rho | t_init
  double scan_from = 1.28;
  double scan_to = 1.30;
  double scan_step = 5e-4;
  std::size_t scan_axis = 0;  // output component used for the Poincare section
  double scan_level = 0.0;
  std::size_t scan_nodes = 3;  // monitored nodes in the Poincare mode

  PipelineSettings pipeline_settings() const;
  void validate() const;
};

/// Unknown sections or keys and unparsable values are InputErrors.
ExperimentConfig load_config(const std::filesystem::path& path);
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

/// Output directory used when none is given: $SKELCHAOS_OUT if set, else "out".
std::filesystem::path default_output_dir();

}  // namespace skelchaos
