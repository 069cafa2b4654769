#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "omplab/dictionary.hpp"
#include "omplab/signal.hpp"

namespace omplab {

enum class DictKind { TwoOrtho, RandomSphere, Adversarial, File };
enum class SolverKind { Omp, OmpStar };
enum class TailSource { Designed, RandomSphere };

const char* to_string(DictKind k);
const char* to_string(SolverKind k);
const char* to_string(TailSource k);

// One Monte-Carlo sweep. The x axis is the normalized signal-to-noise ratio
// snr_norm = x_min / (sigma_eff sqrt(2 ln N)), which puts the three
// reference conditions at the constants 2, 1+sqrt(beta) and
// 1-mu-sqrt(beta).
struct ExperimentConfig {
  DictKind dict_kind = DictKind::TwoOrtho;
  std::string dict_file;
  int n = 256;
  int cols = 512;  // N
  int m = 3;
  double sigma = 1.0;
  std::vector<double> snr_grid;
  int trials_per_point = 500;
  std::uint64_t base_seed = 1;
  SolverKind solver = SolverKind::Omp;
  double alpha = 0.0;  // threshold exponent for omp-star
  double beta = -1.0;  // <= 0: ln(m)/ln(N)
  SignMode sign_mode = SignMode::AllPositive;
  bool resample_dict = false;  // redraw the dictionary per trial (random-sphere)
  TailSource tail_source = TailSource::Designed;
  double adversarial_mu = -1.0;  // <= 0: coherence-window midpoint
  double tail_target = -1.0;     // <= 0: automatic, below the sparsity bound
  int design_max_iters = 5000;
  double design_tol = 1e-3;

  void validate() const;
  void validate_dims() const;  // everything except the grid/trial fields
  // Fully-resolved key=value echo (sorted by key), embedded in every CSV.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

struct CurvePoint {
  double snr_norm = 0.0;
  int trials = 0;
  int successes = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;   // Wilson score interval, 95%
  double ci_high = 0.0;
};

struct RecoveryCurve {
  std::vector<CurvePoint> points;
  double ref_benhaim = 2.0;
  double ref_sharp = 0.0;        // 1 + sqrt(beta)
  double ref_approx_lower = 0.0; // 1 - mu - sqrt(beta)
  double dict_coherence = 0.0;
  double sigma_eff = 0.0;
  double beta = 0.0;
  std::vector<std::pair<std::string, std::string>> config_echo;
};

// Dictionary + derived constants shared by every operation below.
struct PreparedExperiment {
  Dictionary dict;
  std::vector<int> fixed_support;  // non-empty only for the adversarial kind
  double mu = 0.0;
  double sigma_eff = 0.0;
  double beta = 0.0;
  double tail_L = 0.0;  // adversarial only
};
PreparedExperiment prepare_experiment(const ExperimentConfig& cfg);

// workers = 0 resolves from OMPLAB_THREADS / hardware. Results are
// bit-identical for any worker count: trial t of point p always uses seed
// subseed(base_seed, p, t) and aggregation sums integers. The prep overloads
// reuse an already-built dictionary (prepare once, sweep many grids).
RecoveryCurve recovery_curve(const ExperimentConfig& cfg, int workers = 0);
RecoveryCurve recovery_curve(const ExperimentConfig& cfg,
                             const PreparedExperiment& prep, int workers = 0);

// Fraction of trials whose first selected atom lies outside the true
// support. Requires an adversarial dictionary and a single-point snr_grid.
double first_step_failure_rate(const ExperimentConfig& cfg, int workers = 0);
double first_step_failure_rate(const ExperimentConfig& cfg,
                               const PreparedExperiment& prep, int workers = 0);

// Distribution of the iteration count at which omp-star stopped.
struct StopStats {
  std::vector<long> histogram;  // index = iterations at stop
  long trials = 0;
  double frac_exact_m = 0.0;
  double frac_exact_m_correct = 0.0;  // stopped at m with the true support
};
StopStats omp_star_stop_stats(const ExperimentConfig& cfg, int workers = 0);
StopStats omp_star_stop_stats(const ExperimentConfig& cfg,
                              const PreparedExperiment& prep, int workers = 0);

// Monte-Carlo check of the joint absolute-value bound for equicorrelated
// Gaussians: empirical P[max_{i<=n1} |X_i| < sqrt(2 eta ln n2)] vs the bound.
struct SidakValidation {
  double empirical = 0.0;
  double bound = 0.0;
  long trials = 0;
};
SidakValidation validate_sidak(int n1, int n2, double eta, double correlation,
                               long trials, std::uint64_t seed, int workers = 0);

// Fraction of random-sphere dictionaries whose coherence is below
// 2 sqrt(ln(cols)/rows), reported beside the asymptotic value
// exp(-1/sqrt(8 pi ln cols)).
struct RandomCoherenceValidation {
  double fraction = 0.0;
  double bound = 0.0;       // 2 sqrt(ln(cols)/rows)
  double asymptote = 0.0;   // exp(-1/sqrt(8 pi ln cols))
  long trials = 0;
};
RandomCoherenceValidation validate_random_coherence(int rows, int cols,
                                                    long trials,
                                                    std::uint64_t seed,
                                                    int workers = 0);

// Curve CSV: "#" header lines echoing the config and reference lines, then
// snr_norm,trials,successes,p_hat,ci_low,ci_high rows.
std::string curve_to_csv(const RecoveryCurve& curve);
RecoveryCurve curve_from_csv(std::istream& in);
RecoveryCurve curve_from_csv(const std::string& text);
std::string curve_filename(const ExperimentConfig& cfg);

// Wilson score interval at 95% confidence.
std::pair<double, double> wilson_interval(int successes, int trials);

// OMPLAB_THREADS caps the worker count; 0 requests the default.
int worker_count(int requested = 0);

}  // namespace omplab
