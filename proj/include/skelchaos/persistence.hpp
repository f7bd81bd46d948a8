#pragma once

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "skelchaos/linalg.hpp"
#include "skelchaos/reservoir.hpp"
#include "skelchaos/skeleton.hpp"
#include "skelchaos/training.hpp"

namespace skelchaos {

/// Binary dump: the 8 bytes "SKCMAT01", rows and cols as little-endian
/// uint64, then rows * cols little-endian doubles in row-major order.
void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

/// Plain CSV, one matrix row per line, shortest round-trip decimal form.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

nlohmann::json to_json(const ReservoirSpec& spec);
ReservoirSpec reservoir_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainingConfig& cfg);
TrainingConfig training_config_from_json(const nlohmann::json& j);

/// Directory with reservoir.json (N, D and the spec) plus w.bin and w_in.bin.
void save_reservoir(const Reservoir& res, const std::filesystem::path& dir);
Reservoir load_reservoir(const std::filesystem::path& dir);

/// Directory with model.json, the reservoir dump, w_out.bin, w_hat.bin,
/// x_start.bin and, when given, the teacher skeleton (skeleton.csv + .json).
void save_model(const TrainedModel& model, const std::filesystem::path& dir, const Skeleton* skeleton = nullptr);

struct LoadedModel {
  TrainedModel model;
  std::optional<Skeleton> skeleton;
};

/// Throws InputError if the stored W_hat disagrees with the recomposed one.
LoadedModel load_model(const std::filesystem::path& dir);

/// Write `j` pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace skelchaos
