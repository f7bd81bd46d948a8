#include <doctest.h>

#include <cmath>

#include "skelchaos/errors.hpp"
#include "skelchaos/search.hpp"
#include "test_util.hpp"

using namespace skelchaos;

namespace {

AnalysisReport report(double mle, double q) {
  AnalysisReport r;
  r.mle = mle;
  r.mean_q = q;
  r.shape_metric = "mean_q";
  r.shape_threshold = 1e-2;
  return r;
}

PipelineSettings fast_settings() {
  PipelineSettings ps;
  ps.training.t_init = 200;
  ps.training.t_train = 500;
  ps.tangent.steps = 1500;
  ps.tangent.transient = 300;
  ps.q_window = 500;
  ps.rmse_steps = 500;
  return ps;
}

}  // namespace

TEST_CASE("classification rule") {
  const SearchConfig cfg;
  CHECK(classify(report(0.003, 0.004), cfg) == Classification::semi_supervised_chaos);
  CHECK(classify(report(0.0, 1e-4), cfg) == Classification::supervised_periodic);
  CHECK(classify(report(-0.0009, 1e-4), cfg) == Classification::supervised_periodic);
  CHECK(classify(report(0.003, 0.5), cfg) == Classification::collapsed_chaos);
  CHECK(classify(report(-0.01, 1e-4), cfg) == Classification::untrained_other);
  CHECK(classify(report(0.0, 0.5), cfg) == Classification::untrained_other);
  CHECK(classify(report(0.001, 1e-4), cfg) == Classification::supervised_periodic);  // boundary: MLE must exceed tol
  AnalysisReport failed = report(0.003, 0.004);
  failed.error = "diverged";
  CHECK(classify(failed, cfg) == Classification::untrained_other);

  AnalysisReport shape = report(0.003, 0.0);
  shape.mean_q.reset();
  shape.shape_metric = "shape_dev";
  shape.shape_threshold = 0.05;
  shape.shape_dev = 0.01;
  CHECK(classify(shape, cfg) == Classification::semi_supervised_chaos);
  shape.shape_dev = 0.2;
  CHECK(classify(shape, cfg) == Classification::collapsed_chaos);
}

TEST_CASE("find_edge on a known monotone CLE") {
  SearchConfig cfg;
  const auto r = find_edge([](double rho) { return rho - 1.3; }, cfg);
  CHECK(r.rho_edge <= 1.3);
  CHECK(r.rho_edge > 1.3 - cfg.grid_step);
  CHECK(r.evaluations.size() <= cfg.prescan_points + cfg.max_bisections);
}

TEST_CASE("find_edge takes the outermost sign change") {
  SearchConfig cfg;
  // negative, positive bump around 1.0, negative again, crossing at 1.45
  const auto cle = [](double rho) { return std::abs(rho - 1.0) < 0.03 ? 0.01 : rho - 1.45; };
  const auto r = find_edge(cle, cfg);
  CHECK(r.rho_edge == doctest::Approx(1.45).epsilon(cfg.grid_step));
}

TEST_CASE("find_edge bracket error carries the endpoint CLEs") {
  SearchConfig cfg;
  cfg.rho_lo = 0.5;
  cfg.rho_hi = 0.8;
  try {
    find_edge([](double rho) { return rho - 2.0; }, cfg);
    FAIL("expected BracketError");
  } catch (const BracketError& e) {
    CHECK(e.rho_lo == 0.5);
    CHECK(e.cle_lo == doctest::Approx(-1.5));
    CHECK(e.cle_hi == doctest::Approx(-1.2));
  }
}

TEST_CASE("rho grid arithmetic") {
  CHECK(rho_grid(1.28, 1.30, 5e-4).size() == 41);
  CHECK(rho_grid(1.0, 1.0, 1e-3).size() == 1);
  CHECK(rho_grid(1.1, 1.0, 1e-3).empty());
  CHECK_THROWS_AS(rho_grid(0.0, 1.0, 0.0), InputError);
}

TEST_CASE("scan_interval on an empty interval returns no candidates") {
  ReservoirSpec spec;
  spec.n_nodes = 20;
  const Reservoir res = build_reservoir(spec);
  const SearchResult r = scan_interval(res, lissajous(100), fast_settings(), {}, 1.2, 1.2);
  CHECK(r.candidates.empty());
  CHECK(r.full_scan.empty());
}

TEST_CASE("find_supervised flags a zero skeleton as degenerate and accepts it") {
  ReservoirSpec spec;
  spec.n_nodes = 40;
  const Reservoir res = build_reservoir(spec);
  Skeleton zero;
  zero.samples = Matrix::Zero(100, 2);
  zero.period_steps = 100;
  zero.label = "zeros";
  SearchConfig cfg;
  cfg.grid_step = 0.01;
  const SupervisedSearch s = find_supervised(res, zero, fast_settings(), cfg, 0.9);
  CHECK(s.degenerate_target);
  REQUIRE(s.rho_supervised.has_value());
  CHECK(*s.rho_supervised < 0.9);
}

TEST_CASE("run_search end to end on a small reservoir") {
  ReservoirSpec spec;
  spec.n_nodes = 60;
  spec.seed = 3;
  const Reservoir res = build_reservoir(spec);
  SearchConfig cfg;
  cfg.rho_hi = 2.4;
  cfg.prescan_points = 8;
  cfg.grid_step = 5e-3;
  cfg.ladder_step = 0.05;
  cfg.scan_extension = 4;
  const SearchResult r = run_search(res, lissajous(100), fast_settings(), cfg);
  REQUIRE(r.rho_edge.has_value());
  // every recorded edge evaluation below the returned edge that was accepted is negative
  CHECK(std::any_of(r.edge_evaluations.begin(), r.edge_evaluations.end(),
                    [&](const auto& e) { return e.first == *r.rho_edge && e.second < 0.0; }));
  if (r.rho_supervised && *r.rho_supervised < *r.rho_edge) {
    const auto expected = rho_grid(*r.rho_supervised, *r.rho_edge, cfg.grid_step).size() + cfg.scan_extension;
    CHECK(r.full_scan.size() == expected);
  }
  for (const auto& c : r.candidates) {
    CHECK(classify(c, cfg) == Classification::semi_supervised_chaos);
    CHECK(c.mle > cfg.mle_periodic_tol);
    CHECK(c.shape_value() < c.shape_threshold);
  }
  for (const auto& p : r.full_scan) CHECK(classify(p, cfg) == p.classification);
  const nlohmann::json j = to_json(r);
  CHECK(j.at("full_scan").size() == r.full_scan.size());
}

TEST_CASE("search config validation") {
  SearchConfig cfg;
  cfg.rho_hi = cfg.rho_lo;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.seeds.clear();
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.grid_step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}
