#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "omplab/errors.hpp"
#include "omplab/experiments.hpp"
#include "omplab/guarantees.hpp"

using namespace omplab;

namespace {

ExperimentConfig small_two_ortho() {
  ExperimentConfig cfg;
  cfg.dict_kind = DictKind::TwoOrtho;
  cfg.n = 64;
  cfg.cols = 128;
  cfg.m = 2;
  cfg.snr_grid = {0.0, 1.0, 2.0};
  cfg.trials_per_point = 60;
  cfg.base_seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig cfg = small_two_ortho();
  CHECK_NOTHROW(cfg.validate());

  ExperimentConfig bad = cfg;
  bad.snr_grid = {1.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.trials_per_point = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.sigma = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.resample_dict = true;  // only defined for random-sphere
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("two-ortho curve shape") {
  RecoveryCurve curve = recovery_curve(small_two_ortho());
  REQUIRE(curve.points.size() == 3);

  // pure-noise point: the support is undetectable
  CHECK(curve.points[0].p_hat <= 0.05);
  // the known-sparsity sufficient line: essentially certain recovery
  CHECK(curve.points[2].p_hat >= 0.95);

  CHECK(curve.dict_coherence == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
  double beta = std::log(2.0) / std::log(128.0);
  CHECK(curve.beta == doctest::Approx(beta).epsilon(1e-12));
  CHECK(curve.ref_sharp == doctest::Approx(1.0 + std::sqrt(beta)).epsilon(1e-12));
  CHECK(curve.ref_approx_lower ==
        doctest::Approx(1.0 - 1.0 / 8.0 - std::sqrt(beta)).epsilon(1e-12));

  for (const CurvePoint& p : curve.points) {
    CHECK(p.successes <= p.trials);
    CHECK(p.ci_low >= 0.0);
    CHECK(p.ci_high <= 1.0);
    CHECK(p.ci_low <= p.p_hat);
    CHECK(p.p_hat <= p.ci_high);
  }
}

TEST_CASE("curves are deterministic across worker counts") {
  ExperimentConfig cfg = small_two_ortho();
  RecoveryCurve one = recovery_curve(cfg, 1);
  RecoveryCurve four = recovery_curve(cfg, 4);
  CHECK(curve_to_csv(one) == curve_to_csv(four));

  // and the env cap is honored without changing results
  setenv("OMPLAB_THREADS", "2", 1);
  RecoveryCurve two = recovery_curve(cfg, 0);
  unsetenv("OMPLAB_THREADS");
  CHECK(curve_to_csv(one) == curve_to_csv(two));
}

TEST_CASE("curve csv round trip") {
  RecoveryCurve curve = recovery_curve(small_two_ortho());
  std::string csv = curve_to_csv(curve);
  RecoveryCurve back = curve_from_csv(csv);
  CHECK(curve_to_csv(back) == csv);
  CHECK(back.config_echo == curve.config_echo);
  REQUIRE(back.points.size() == curve.points.size());
  for (std::size_t i = 0; i < back.points.size(); ++i) {
    CHECK(back.points[i].snr_norm == curve.points[i].snr_norm);
    CHECK(back.points[i].successes == curve.points[i].successes);
    CHECK(back.points[i].p_hat == curve.points[i].p_hat);
  }
  CHECK_THROWS_AS(curve_from_csv(std::string("not,a,curve\n")), Error);
}

TEST_CASE("random-sphere desk scale violates MIP for m 3") {
  // 512 sphere atoms in R^256 measure at coherence ~0.27: above 1/5, so the
  // normalized-SNR mapping is undefined and the curve must refuse.
  ExperimentConfig cfg;
  cfg.dict_kind = DictKind::RandomSphere;
  cfg.n = 256;
  cfg.cols = 512;
  cfg.m = 3;
  cfg.snr_grid = {1.0};
  cfg.trials_per_point = 2;
  CHECK_THROWS_AS(prepare_experiment(cfg), Error);
  try {
    prepare_experiment(cfg);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MipViolated);
  }

  // at m = 2 the same dictionary passes MIP (needs mu < 1/3)
  cfg.m = 2;
  PreparedExperiment prep = prepare_experiment(cfg);
  CHECK(prep.mu < 1.0 / 3.0);
  CHECK(prep.mu > 0.2);
}

TEST_CASE("wilson interval") {
  auto [lo0, hi0] = wilson_interval(0, 50);
  CHECK(lo0 == 0.0);
  CHECK(hi0 > 0.0);
  CHECK(hi0 < 0.12);
  auto [lo1, hi1] = wilson_interval(50, 50);
  CHECK(hi1 == 1.0);
  CHECK(lo1 < 1.0);
  CHECK(lo1 > 0.9);
  auto [lo, hi] = wilson_interval(30, 60);
  CHECK(lo < 0.5);
  CHECK(hi > 0.5);
  CHECK(hi - lo < 0.3);
}

TEST_CASE("sidak validation") {
  // independent coordinates
  SidakValidation indep = validate_sidak(100, 1000, 1.0, 0.0, 4000, 3);
  CHECK(indep.bound == doctest::Approx(0.97853372978330326).epsilon(1e-12));
  double stderr_ind = std::sqrt(indep.bound * (1 - indep.bound) / 4000.0);
  CHECK(indep.empirical >= indep.bound - 3.0 * stderr_ind);

  // positive equicorrelation is covered too
  SidakValidation corr = validate_sidak(100, 1000, 1.0, 0.3, 4000, 4);
  CHECK(corr.empirical >= corr.bound - 3.0 * stderr_ind);

  // scalar case against the Gaussian tail oracle
  SidakValidation scalar = validate_sidak(1, 1000, 1.0, 0.0, 20000, 5);
  double threshold = std::sqrt(2.0 * std::log(1000.0));
  double exact = 1.0 - std::erfc(threshold / std::sqrt(2.0));
  double se = std::sqrt(exact * (1 - exact) / 20000.0);
  CHECK(std::abs(scalar.empirical - exact) <= 3.0 * se + 1e-9);

  CHECK_THROWS_AS(validate_sidak(10, 100, 1.0, -0.5, 100, 1), Error);
}

TEST_CASE("random coherence validation") {
  RandomCoherenceValidation v = validate_random_coherence(1020, 2040, 24, 7);
  CHECK(v.bound == doctest::Approx(0.1728731268520386).epsilon(1e-12));
  CHECK(v.asymptote == doctest::Approx(0.93029138290376305).epsilon(1e-12));
  CHECK(v.fraction >= 0.0);
  CHECK(v.fraction <= 1.0);
  // the regime where the asymptote is meaningful: most seeds comply
  CHECK(v.fraction >= 0.7);
}

TEST_CASE("random coherence trend in the row count") {
  double prev = -1.0;
  for (int rows : {256, 512, 1024}) {
    RandomCoherenceValidation v =
        validate_random_coherence(rows, 2 * rows, 100, 17);
    CHECK(v.fraction >= prev - 0.1);  // monotone up to Monte-Carlo noise
    prev = v.fraction;
  }
  CHECK(prev >= 0.75);
}

TEST_CASE("adversarial curve and first-step failures") {
  ExperimentConfig cfg;
  cfg.dict_kind = DictKind::Adversarial;
  cfg.n = 100;
  cfg.cols = 200;
  cfg.m = 2;
  cfg.trials_per_point = 120;
  cfg.base_seed = 5;
  cfg.design_max_iters = 3000;

  PreparedExperiment prep = prepare_experiment(cfg);
  double beta = prep.beta;
  double low_line = 1.0 - prep.mu - std::sqrt(beta);
  double sharp_line = 1.0 + std::sqrt(beta);
  REQUIRE(low_line > 0.0);

  cfg.snr_grid = {low_line, sharp_line, 2.0};
  RecoveryCurve curve = recovery_curve(cfg, prep);
  // the transition lives between the lower and upper lines
  CHECK(curve.points[2].p_hat >= 0.9);
  CHECK(curve.points[0].p_hat <= curve.points[1].p_hat);

  // first-step failures dominate the failure mode and decrease with snr
  ExperimentConfig one = cfg;
  one.snr_grid = {low_line};
  double rate_low = first_step_failure_rate(one, prep);
  one.snr_grid = {2.0};
  double rate_high = first_step_failure_rate(one, prep);
  CHECK(rate_low >= rate_high);
  CHECK(rate_low >= 0.0);
  CHECK(rate_low <= 1.0);

  // overall failure at the low line is at least the first-step share
  double p_fail = 1.0 - curve.points[0].p_hat;
  CHECK(rate_low <= p_fail + 0.1);

  ExperimentConfig wrong = cfg;
  wrong.dict_kind = DictKind::TwoOrtho;
  wrong.n = 100;  // two-ortho would also reject the dims, but the kind gate fires first
  CHECK_THROWS_AS(first_step_failure_rate(wrong), Error);
}

TEST_CASE("omp-star stop statistics") {
  ExperimentConfig cfg = small_two_ortho();
  cfg.solver = SolverKind::OmpStar;
  cfg.trials_per_point = 150;

  double beta = std::log(2.0) / std::log(128.0);
  cfg.snr_grid = {1.0 + std::sqrt(beta)};
  StopStats at_line = omp_star_stop_stats(cfg);
  CHECK(at_line.trials == 150);
  long mass = 0;
  for (long c : at_line.histogram) mass += c;
  CHECK(mass == at_line.trials);

  ProblemParams p{cfg.n, cfg.cols, cfg.m, 1.0 / 8.0, 1.0, 0.0, -1.0};
  double bound = sharp_prob(p);
  double se = std::sqrt(0.25 / 150.0);
  CHECK(at_line.frac_exact_m_correct >= std::max(0.0, bound) - 3.0 * se);

  // pure noise: stops well before m almost always
  cfg.snr_grid = {0.0};
  StopStats noise = omp_star_stop_stats(cfg);
  long below_m = 0;
  for (int i = 0; i < cfg.m; ++i) below_m += noise.histogram[i];
  CHECK(double(below_m) / noise.trials >= 0.8);

  cfg.solver = SolverKind::Omp;
  CHECK_THROWS_AS(omp_star_stop_stats(cfg), Error);
}

TEST_CASE("curve filename") {
  ExperimentConfig cfg = small_two_ortho();
  CHECK(curve_filename(cfg) == "curve_two-ortho_2.csv");
  cfg.dict_kind = DictKind::Adversarial;
  cfg.m = 4;
  CHECK(curve_filename(cfg) == "curve_adversarial_4.csv");
}
