#include "skelchaos/skeleton.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "skelchaos/errors.hpp"

namespace skelchaos {
namespace {

template <std::size_t Dim, class Rhs>
std::array<double, Dim> rk4_step(const Rhs& rhs, const std::array<double, Dim>& s, double h) {
  auto shifted = [&](const std::array<double, Dim>& k, double scale) {
    std::array<double, Dim> out{};
    for (std::size_t i = 0; i < Dim; ++i) out[i] = s[i] + scale * k[i];
    return out;
  };
  const auto k1 = rhs(s);
  const auto k2 = rhs(shifted(k1, 0.5 * h));
  const auto k3 = rhs(shifted(k2, 0.5 * h));
  const auto k4 = rhs(shifted(k3, h));
  std::array<double, Dim> out{};
  for (std::size_t i = 0; i < Dim; ++i) {
    out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

template <std::size_t Dim>
void require_finite(const std::array<double, Dim>& s, const char* who) {
  for (double v : s) {
    if (!std::isfinite(v)) {
      throw NumericError(fmt::format("{}: integration produced a non-finite state", who));
    }
  }
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (*begin == '+') ++begin;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    cells.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return cells;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  return sidecar;
}

}  // namespace

void Skeleton::validate() const {
  if (samples.rows() == 0 || samples.cols() == 0) {
    throw InputError("skeleton: no samples");
  }
  if (!samples.allFinite()) {
    throw InputError("skeleton: samples contain non-finite values");
  }
  if (period_steps && *period_steps == 0) {
    throw InputError("skeleton: period_steps must be positive");
  }
}

std::uint64_t Skeleton::fingerprint() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      hash ^= p[i];
      hash *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t shape[2] = {static_cast<std::uint64_t>(samples.rows()), static_cast<std::uint64_t>(samples.cols())};
  mix(shape, sizeof(shape));
  mix(samples.data(), sizeof(double) * static_cast<std::size_t>(samples.size()));
  return hash;
}

Skeleton lissajous(std::size_t steps) {
  if (steps == 0) throw InputError("lissajous: steps must be at least 1");
  Skeleton sk;
  sk.samples.resize(static_cast<Eigen::Index>(steps), 2);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = std::numbers::pi * static_cast<double>(k);
    sk.samples(static_cast<Eigen::Index>(k), 0) = std::cos(t / 50.0);
    sk.samples(static_cast<Eigen::Index>(k), 1) = std::sin(t / 25.0);
  }
  sk.period_steps = 100;
  sk.label = "lissajous";
  return sk;
}

Skeleton unit_circle(std::size_t steps, std::size_t period) {
  if (steps == 0) throw InputError("unit_circle: steps must be at least 1");
  if (period < 2) throw InputError("unit_circle: period must be at least 2");
  Skeleton sk;
  sk.samples.resize(static_cast<Eigen::Index>(steps), 2);
  for (std::size_t k = 0; k < steps; ++k) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(k % period) / static_cast<double>(period);
    sk.samples(static_cast<Eigen::Index>(k), 0) = std::cos(phase);
    sk.samples(static_cast<Eigen::Index>(k), 1) = std::sin(phase);
  }
  sk.period_steps = period;
  sk.label = "unit_circle";
  return sk;
}

std::array<double, 2> van_der_pol_rhs(double mu, const std::array<double, 2>& s) {
  return {s[1], mu * (1.0 - s[0] * s[0]) * s[1] - s[0]};
}

std::array<double, 3> rossler_rhs(double c, const std::array<double, 3>& s, RosslerForm form) {
  const double coupling = form == RosslerForm::standard ? s[0] * s[2] : s[0] * s[1];
  return {-s[1] - s[2], s[0] + 0.2 * s[1], 0.2 + coupling - c * s[2]};
}

std::vector<std::array<double, 3>> rossler_fixed_points(double c, RosslerForm form) {
  // x = -0.2 y and z = -y from the first two equations; the third becomes a
  // quadratic in y.
  const double qa = form == RosslerForm::standard ? 0.2 : -0.2;
  const double qb = c;
  const double qc = 0.2;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return {};
  const double root = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = -0.5 * (qb + std::copysign(root, qb));
  std::vector<std::array<double, 3>> points;
  for (double y : {q / qa, qc / q}) {
    points.push_back({-0.2 * y, y, -y});
  }
  return points;
}

Skeleton van_der_pol(double mu, double dt, std::size_t steps) {
  if (!(mu >= 0.0)) throw InputError("van_der_pol: mu must be nonnegative");
  if (!(dt > 0.0)) throw InputError("van_der_pol: dt must be positive");
  if (steps == 0) throw InputError("van_der_pol: steps must be at least 1");
  auto rhs = [mu](const std::array<double, 2>& s) { return van_der_pol_rhs(mu, s); };
  std::array<double, 2> state{1.0, 0.0};
  const auto transient = static_cast<std::size_t>(std::ceil(100.0 / dt));
  for (std::size_t i = 0; i < transient; ++i) {
    state = rk4_step(rhs, state, dt);
    require_finite(state, "van_der_pol");
  }
  Skeleton sk;
  sk.samples.resize(static_cast<Eigen::Index>(steps), 2);
  for (std::size_t k = 0; k < steps; ++k) {
    sk.samples(static_cast<Eigen::Index>(k), 0) = state[0];
    sk.samples(static_cast<Eigen::Index>(k), 1) = state[1];
    state = rk4_step(rhs, state, dt);
    require_finite(state, "van_der_pol");
  }
  sk.label = "van_der_pol";
  return sk;
}

Skeleton rossler_cycle(double c, double dt, std::size_t steps, const RosslerOptions& options) {
  if (!(dt > 0.0)) throw InputError("rossler_cycle: dt must be positive");
  if (steps == 0) throw InputError("rossler_cycle: steps must be at least 1");
  auto rhs = [&](const std::array<double, 3>& s) { return rossler_rhs(c, s, options.form); };
  constexpr int kSubsteps = 10;
  const double h = dt / kSubsteps;

  std::array<double, 3> state{1.0, 0.0, 0.0};
  const auto transient = static_cast<std::size_t>(std::ceil(options.transient_time / h));
  for (std::size_t i = 0; i < transient; ++i) {
    state = rk4_step(rhs, state, h);
    require_finite(state, "rossler_cycle");
  }

  // Land exactly on y = 0 by integrating with y as the independent variable.
  auto land_on_section = [&](const std::array<double, 3>& s) {
    auto by_y = [&](const std::array<double, 4>& v) {
      const auto f = rhs({v[0], v[1], v[2]});
      return std::array<double, 4>{f[0] / f[1], 1.0, f[2] / f[1], 1.0 / f[1]};
    };
    const auto landed = rk4_step(by_y, std::array<double, 4>{s[0], s[1], s[2], 0.0}, -s[1]);
    return landed;  // x, y (= 0), z, elapsed time
  };

  struct Crossing {
    std::array<double, 3> point;
    double time;
  };
  std::vector<Crossing> crossings;
  double time = 0.0;
  std::size_t loop_found = 0;
  const std::size_t max_steps = static_cast<std::size_t>(std::ceil(options.max_loops * 50.0 / h));
  for (std::size_t i = 0; i < max_steps && loop_found == 0; ++i) {
    const auto next = rk4_step(rhs, state, h);
    require_finite(next, "rossler_cycle");
    if (state[1] < 0.0 && next[1] >= 0.0) {
      const auto landed = land_on_section(state);
      crossings.push_back({{landed[0], 0.0, landed[2]}, time + landed[3]});
      if (crossings.size() > options.max_loops + 1) break;
      const auto& first = crossings.front().point;
      const auto& last = crossings.back().point;
      if (crossings.size() > 1 && std::hypot(last[0] - first[0], last[2] - first[2]) < options.return_tolerance) {
        loop_found = crossings.size() - 1;
      }
    }
    state = next;
    time += h;
  }
  if (loop_found == 0) {
    throw NumericError(fmt::format("rossler_cycle: no periodic return within {} loops at c = {}", options.max_loops, c));
  }

  const double period = crossings[loop_found].time - crossings.front().time;
  const auto period_steps = static_cast<std::size_t>(std::max(1.0, std::round(period / dt)));
  const double sample_dt = period / static_cast<double>(period_steps);
  const double sub_h = sample_dt / kSubsteps;

  Skeleton sk;
  sk.samples.resize(static_cast<Eigen::Index>(steps), 3);
  state = crossings.front().point;
  for (std::size_t k = 0; k < steps; ++k) {
    for (int j = 0; j < 3; ++j) sk.samples(static_cast<Eigen::Index>(k), j) = state[static_cast<std::size_t>(j)];
    for (int sub = 0; sub < kSubsteps; ++sub) state = rk4_step(rhs, state, sub_h);
    require_finite(state, "rossler_cycle");
  }
  sk.period_steps = period_steps;
  sk.label = "rossler";
  return sk;
}

Matrix resample_arc_length(const Matrix& points, std::size_t count, bool closed) {
  const Eigen::Index m = points.rows();
  if (m < 2) throw InputError("resample_arc_length: need at least 2 points");
  if (count < 2) throw InputError("resample_arc_length: need at least 2 output points");

  const Eigen::Index segments = closed ? m : m - 1;
  std::vector<double> cumulative(static_cast<std::size_t>(segments) + 1, 0.0);
  for (Eigen::Index i = 0; i < segments; ++i) {
    const Eigen::Index j = (i + 1) % m;
    cumulative[static_cast<std::size_t>(i) + 1] = cumulative[static_cast<std::size_t>(i)] + (points.row(j) - points.row(i)).norm();
  }
  const double total = cumulative.back();
  if (!(total > 0.0)) throw InputError("resample_arc_length: curve has zero length");

  const double spacing = closed ? total / static_cast<double>(count) : total / static_cast<double>(count - 1);
  Matrix out(static_cast<Eigen::Index>(count), points.cols());
  Eigen::Index seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double target = std::min(spacing * static_cast<double>(k), total);
    while (seg + 1 < segments && cumulative[static_cast<std::size_t>(seg) + 1] < target) ++seg;
    const double start = cumulative[static_cast<std::size_t>(seg)];
    const double length = cumulative[static_cast<std::size_t>(seg) + 1] - start;
    const double t = length > 0.0 ? std::clamp((target - start) / length, 0.0, 1.0) : 0.0;
    const Eigen::Index next = (seg + 1) % m;
    out.row(static_cast<Eigen::Index>(k)) = (1.0 - t) * points.row(seg) + t * points.row(next);
  }
  return out;
}

Matrix normalize_components(const Matrix& points) {
  Matrix out = points.rowwise() - points.colwise().mean();
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double scale = out.col(j).cwiseAbs().maxCoeff();
    if (scale > 0.0) out.col(j) /= scale;
  }
  return out;
}

NumericTable read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));

  NumericTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    std::vector<std::optional<double>> parsed;
    parsed.reserve(cells.size());
    for (const auto& cell : cells) parsed.push_back(parse_number(cell));

    const bool first_content_row = rows.empty() && table.header.empty();
    if (first_content_row && std::none_of(parsed.begin(), parsed.end(), [](const auto& v) { return v.has_value(); })) {
      table.header = cells;
      columns = cells.size();
      continue;
    }
    if (columns == 0) columns = cells.size();
    if (cells.size() != columns) {
      throw ParseError(fmt::format("{}: row {} has {} columns, expected {}", path.string(), line_no, cells.size(), columns));
    }
    std::vector<double> row;
    row.reserve(columns);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parsed[c]) {
        throw ParseError(fmt::format("{}: row {}, column {}: '{}' is not a number", path.string(), line_no, c + 1, cells[c]));
      }
      row.push_back(*parsed[c]);
    }
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < columns; ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return table;
}

Skeleton load_csv(const std::filesystem::path& path, const CurveCsvOptions& options) {
  NumericTable table = read_numeric_csv(path);
  if (table.values.rows() < 3) {
    throw ParseError(fmt::format("{}: need at least 3 points, found {}", path.string(), table.values.rows()));
  }
  Matrix points = std::move(table.values);
  if (options.resample_to > 0) {
    points = resample_arc_length(points, options.resample_to, options.close_curve);
  }
  if (options.normalize) {
    points = normalize_components(points);
  }
  Skeleton sk;
  sk.samples = std::move(points);
  sk.period_steps = sk.size();
  sk.label = "csv:" + path.filename().string();
  sk.validate();
  return sk;
}

void save_skeleton(const Skeleton& skeleton, const std::filesystem::path& csv_path) {
  skeleton.validate();
  {
    std::ofstream out(csv_path);
    if (!out) throw InputError(fmt::format("cannot write {}", csv_path.string()));
    for (Eigen::Index r = 0; r < skeleton.samples.rows(); ++r) {
      for (Eigen::Index c = 0; c < skeleton.samples.cols(); ++c) {
        out << (c ? "," : "") << fmt::format("{}", skeleton.samples(r, c));
      }
      out << '\n';
    }
  }
  nlohmann::json meta;
  meta["dim"] = skeleton.dim();
  meta["period_steps"] = skeleton.period_steps ? nlohmann::json(*skeleton.period_steps) : nlohmann::json("unknown");
  meta["label"] = skeleton.label;
  meta["samples"] = skeleton.size();
  std::ofstream out(sidecar_path(csv_path));
  out << meta.dump(2) << '\n';
}

Skeleton load_skeleton(const std::filesystem::path& csv_path) {
  Skeleton sk;
  sk.samples = read_numeric_csv(csv_path).values;
  sk.label = "csv:" + csv_path.filename().string();
  const auto sidecar = sidecar_path(csv_path);
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("{}: {}", sidecar.string(), e.what()));
    }
    if (meta.contains("label")) sk.label = meta["label"].get<std::string>();
    if (meta.contains("period_steps") && meta["period_steps"].is_number_unsigned()) {
      sk.period_steps = meta["period_steps"].get<std::size_t>();
    }
    if (meta.contains("dim") && meta["dim"].get<std::size_t>() != sk.dim()) {
      throw ParseError(fmt::format("{}: dim {} does not match the CSV's {} columns", sidecar.string(), meta["dim"].get<std::size_t>(), sk.dim()));
    }
  }
  sk.validate();
  return sk;
}

}  // namespace skelchaos
