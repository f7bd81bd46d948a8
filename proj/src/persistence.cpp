#include "skelchaos/persistence.hpp"

#include <fmt/format.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "skelchaos/errors.hpp"

namespace skelchaos {
namespace {

static_assert(std::endian::native == std::endian::little, "matrix dumps assume a little-endian host");

constexpr std::array<char, 8> kMagic = {'S', 'K', 'C', 'M', 'A', 'T', '0', '1'};
constexpr int kModelFormatVersion = 1;

}  // namespace

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  const std::uint64_t shape[2] = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  out.write(kMagic.data(), kMagic.size());
  out.write(reinterpret_cast<const char*>(shape), sizeof(shape));
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
  if (!out) throw InputError(fmt::format("short write to {}", path.string()));
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  std::array<char, 8> magic{};
  std::uint64_t shape[2] = {0, 0};
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(shape), sizeof(shape));
  if (!in || magic != kMagic) throw ParseError(fmt::format("{}: not a matrix dump", path.string()));
  const auto file_size = std::filesystem::file_size(path);
  const std::uint64_t expected = kMagic.size() + sizeof(shape) + sizeof(double) * shape[0] * shape[1];
  if (file_size != expected) {
    throw ParseError(fmt::format("{}: {} bytes, expected {} for a {}x{} matrix", path.string(), file_size, expected, shape[0], shape[1]));
  }
  Matrix m(static_cast<Eigen::Index>(shape[0]), static_cast<Eigen::Index>(shape[1]));
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
  if (!in) throw ParseError(fmt::format("{}: truncated", path.string()));
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << (c ? "," : "") << fmt::format("{}", m(r, c));
    }
    out << '\n';
  }
}

nlohmann::json to_json(const ReservoirSpec& spec) {
  return {{"n_nodes", spec.n_nodes},         {"leak_rate", spec.leak_rate}, {"spectral_scale", spec.spectral_scale},
          {"input_scale", spec.input_scale}, {"seed", spec.seed},           {"input_dim", spec.input_dim}};
}

ReservoirSpec reservoir_spec_from_json(const nlohmann::json& j) {
  try {
    ReservoirSpec spec;
    spec.n_nodes = j.at("n_nodes").get<std::size_t>();
    spec.leak_rate = j.at("leak_rate").get<double>();
    spec.spectral_scale = j.at("spectral_scale").get<double>();
    spec.input_scale = j.at("input_scale").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.input_dim = j.at("input_dim").get<std::size_t>();
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("reservoir spec: {}", e.what()));
  }
}

nlohmann::json to_json(const TrainingConfig& cfg) {
  return {{"t_init", cfg.t_init}, {"t_train", cfg.t_train}, {"beta", cfg.beta}, {"x0", cfg.x0 ? "x0.bin" : "zero"}};
}

TrainingConfig training_config_from_json(const nlohmann::json& j) {
  try {
    TrainingConfig cfg;
    cfg.t_init = j.at("t_init").get<std::size_t>();
    cfg.t_train = j.at("t_train").get<std::size_t>();
    cfg.beta = j.at("beta").get<double>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("training config: {}", e.what()));
  }
}

void save_reservoir(const Reservoir& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json header;
  header["N"] = res.size();
  header["D"] = res.input_dim();
  header["spec"] = to_json(res.spec());
  header["w"] = "w.bin";
  header["w_in"] = "w_in.bin";
  write_json(dir / "reservoir.json", header);
  write_matrix(dir / "w.bin", res.w());
  write_matrix(dir / "w_in.bin", res.w_in());
}

Reservoir load_reservoir(const std::filesystem::path& dir) {
  const auto header = read_json(dir / "reservoir.json");
  const ReservoirSpec spec = reservoir_spec_from_json(header.at("spec"));
  return Reservoir::from_matrices(spec, read_matrix(dir / "w.bin"), read_matrix(dir / "w_in.bin"));
}

void save_model(const TrainedModel& model, const std::filesystem::path& dir, const Skeleton* skeleton) {
  std::filesystem::create_directories(dir);
  save_reservoir(model.reservoir, dir / "reservoir");
  write_matrix(dir / "w_out.bin", model.w_out);
  write_matrix(dir / "w_hat.bin", model.w_hat);
  write_matrix(dir / "x_start.bin", Matrix(model.x_start.transpose()));
  if (model.config.x0) write_matrix(dir / "x0.bin", Matrix(model.config.x0->transpose()));

  nlohmann::json meta;
  meta["format"] = "skelchaos-model";
  meta["version"] = kModelFormatVersion;
  meta["reservoir"] = to_json(model.reservoir.spec());
  meta["training"] = to_json(model.config);
  if (skeleton) {
    save_skeleton(*skeleton, dir / "skeleton.csv");
    meta["skeleton"] = {{"label", skeleton->label},
                        {"samples", skeleton->size()},
                        {"dim", skeleton->dim()},
                        {"fingerprint", fmt::format("{:016x}", skeleton->fingerprint())}};
  } else {
    meta["skeleton"] = nullptr;
  }
  write_json(dir / "model.json", meta);
}

LoadedModel load_model(const std::filesystem::path& dir) {
  const auto meta = read_json(dir / "model.json");
  if (meta.value("format", std::string{}) != "skelchaos-model") {
    throw ParseError(fmt::format("{}: not a model directory", dir.string()));
  }
  Reservoir res = load_reservoir(dir / "reservoir");
  TrainingConfig cfg = training_config_from_json(meta.at("training"));
  if (std::filesystem::exists(dir / "x0.bin")) cfg.x0 = read_matrix(dir / "x0.bin").transpose();
  Matrix w_out = read_matrix(dir / "w_out.bin");
  Vector x_start = read_matrix(dir / "x_start.bin").transpose();
  TrainedModel model = compose_closed_loop(res, std::move(w_out), std::move(x_start), cfg);

  const Matrix stored = read_matrix(dir / "w_hat.bin");
  if (stored.rows() != model.w_hat.rows() || stored.cols() != model.w_hat.cols() ||
      (stored - model.w_hat).cwiseAbs().maxCoeff() > 1e-12) {
    throw InputError(fmt::format("{}: stored W_hat does not match rho W + sigma W_in W_out^T", dir.string()));
  }

  LoadedModel loaded{std::move(model), std::nullopt};
  if (!meta.at("skeleton").is_null() && std::filesystem::exists(dir / "skeleton.csv")) {
    Skeleton sk = load_skeleton(dir / "skeleton.csv");
    const auto expected = meta["skeleton"].value("fingerprint", std::string{});
    if (fmt::format("{:016x}", sk.fingerprint()) != expected) {
      throw InputError(fmt::format("{}: skeleton.csv does not match the recorded fingerprint", dir.string()));
    }
    loaded.skeleton = std::move(sk);
  }
  return loaded;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace skelchaos
