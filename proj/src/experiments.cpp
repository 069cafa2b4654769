#include "omplab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <thread>

#include "omplab/errors.hpp"
#include "omplab/guarantees.hpp"
#include "omplab/rng.hpp"
#include "omplab/solver.hpp"

namespace omplab {

namespace {

constexpr std::uint64_t kDictStream = 0xd1c7u;
constexpr std::uint64_t kTailStream = 0x7a11u;
constexpr double kZ95 = 1.959963984540054;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Static contiguous chunking; merge order is fixed by chunk index, so the
// result is independent of the worker count and of scheduling.
void parallel_chunks(long count, int workers,
                     const std::function<void(long, long, int)>& body) {
  if (count <= 0) return;
  int used = static_cast<int>(std::max<long>(1, std::min<long>(workers, count)));
  if (used == 1) {
    body(0, count, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (int w = 0; w < used; ++w) {
    long first = count * w / used;
    long last = count * (w + 1) / used;
    pool.emplace_back([&body, first, last, w] { body(first, last, w); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

const char* to_string(DictKind k) {
  switch (k) {
    case DictKind::TwoOrtho: return "two-ortho";
    case DictKind::RandomSphere: return "random-sphere";
    case DictKind::Adversarial: return "adversarial";
    case DictKind::File: return "file";
  }
  return "?";
}

const char* to_string(SolverKind k) {
  return k == SolverKind::Omp ? "omp" : "omp-star";
}

const char* to_string(TailSource k) {
  return k == TailSource::Designed ? "designed" : "random-sphere";
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("OMPLAB_THREADS")) {
    char* end = nullptr;
    long parsed = std::strtol(env, &end, 10);
    if (end && *end == '\0' && parsed >= 1)
      return std::min<long>(hw, parsed);
  }
  return hw;
}

void ExperimentConfig::validate_dims() const {
  if (n < 1 || cols < 2 || m < 1)
    fail(ErrorCode::BadParameter, "need n >= 1, N >= 2, m >= 1");
  if (m > std::min(n, cols)) fail(ErrorCode::BadSparsity, "m exceeds min(n, N)");
  if (sigma <= 0.0)
    fail(ErrorCode::BadParameter, "curves need sigma > 0 (the SNR axis divides by it)");
  if (alpha < 0.0) fail(ErrorCode::BadParameter, "negative alpha");
  if (resample_dict && dict_kind != DictKind::RandomSphere)
    fail(ErrorCode::BadParameter, "resampling is only defined for random-sphere");
  if (dict_kind == DictKind::File && dict_file.empty())
    fail(ErrorCode::BadParameter, "dict file path missing");
}

void ExperimentConfig::validate() const {
  validate_dims();
  if (snr_grid.empty()) fail(ErrorCode::BadParameter, "empty snr grid");
  for (std::size_t i = 0; i < snr_grid.size(); ++i) {
    if (snr_grid[i] < 0.0) fail(ErrorCode::BadParameter, "negative snr point");
    if (i > 0 && snr_grid[i] <= snr_grid[i - 1])
      fail(ErrorCode::BadParameter, "snr grid must be strictly increasing");
  }
  if (trials_per_point < 1) fail(ErrorCode::BadParameter, "need at least one trial");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("adversarial_mu",
                  adversarial_mu > 0.0 ? fmt(adversarial_mu) : "auto");
  kv.emplace_back("alpha", fmt(alpha));
  kv.emplace_back("base_seed", std::to_string(base_seed));
  kv.emplace_back("beta", beta > 0.0 ? fmt(beta) : "auto");
  kv.emplace_back("design_max_iters", std::to_string(design_max_iters));
  kv.emplace_back("design_tol", fmt(design_tol));
  kv.emplace_back("dict", to_string(dict_kind));
  if (dict_kind == DictKind::File) kv.emplace_back("dict_file", dict_file);
  kv.emplace_back("m", std::to_string(m));
  kv.emplace_back("n", std::to_string(n));
  kv.emplace_back("N", std::to_string(cols));
  kv.emplace_back("resample_dict", resample_dict ? "1" : "0");
  kv.emplace_back("sigma", fmt(sigma));
  kv.emplace_back("sign_mode",
                  sign_mode == SignMode::AllPositive ? "all-positive" : "random-sign");
  std::ostringstream grid;
  for (std::size_t i = 0; i < snr_grid.size(); ++i) {
    if (i) grid << ",";
    grid << fmt(snr_grid[i]);
  }
  kv.emplace_back("snr_grid", grid.str());
  kv.emplace_back("solver", to_string(solver));
  kv.emplace_back("tail_source", to_string(tail_source));
  kv.emplace_back("tail_target", tail_target > 0.0 ? fmt(tail_target) : "auto");
  kv.emplace_back("trials_per_point", std::to_string(trials_per_point));
  return kv;
}

namespace {

// Largest tail coherence for which the sparsity bound still admits m.
double tail_coherence_limit(int m) {
  double b = 6.0 * m - 2.0;
  double a = double(m + 1) * double(m + 1);
  return (b - std::sqrt(b * b - 4.0 * a)) / (2.0 * a);
}

Dictionary make_tail(const ExperimentConfig& cfg) {
  const int sub_rows = cfg.n - cfg.m;
  const int sub_cols = cfg.cols - cfg.m;
  if (sub_rows < 1 || sub_cols < 2)
    fail(ErrorCode::BadParameter, "adversarial construction needs n-m >= 1, N-m >= 2");
  if (cfg.tail_source == TailSource::RandomSphere)
    return build_random_sphere(sub_rows, sub_cols, subseed(cfg.base_seed, kTailStream));

  double target = cfg.tail_target;
  if (target <= 0.0) {
    if (sub_cols <= sub_rows)
      fail(ErrorCode::BadParameter, "designed tail needs N - m > n - m");
    double welch = coherence_bounds(sub_rows, sub_cols).welch_lower;
    double limit = tail_coherence_limit(cfg.m);
    double lo = 1.05 * welch;
    double hi = 0.98 * limit;
    if (lo >= hi)
      fail(ErrorCode::TargetInfeasible,
           "no tail coherence target fits between the Welch bound and the "
           "sparsity limit at these dimensions");
    target = std::clamp(0.88 * limit, lo, hi);
  }
  return design_incoherent(cfg.n - cfg.m, cfg.cols - cfg.m, target,
                           cfg.design_max_iters, cfg.design_tol,
                           subseed(cfg.base_seed, kTailStream))
      .dict;
}

}  // namespace

PreparedExperiment prepare_experiment(const ExperimentConfig& cfg) {
  cfg.validate_dims();
  PreparedExperiment prep;
  switch (cfg.dict_kind) {
    case DictKind::TwoOrtho:
      if (cfg.cols != 2 * cfg.n)
        fail(ErrorCode::BadParameter, "two-ortho needs N = 2n");
      prep.dict = build_two_ortho(cfg.n);
      break;
    case DictKind::RandomSphere:
      prep.dict = build_random_sphere(cfg.n, cfg.cols, subseed(cfg.base_seed, kDictStream));
      break;
    case DictKind::Adversarial: {
      Dictionary tail = make_tail(cfg);
      double measured_L = coherence(tail);
      double mu = cfg.adversarial_mu;
      if (mu <= 0.0) {
        MuInterval window = mu_feasible_interval(cfg.m, measured_L);
        if (window.empty)
          fail(ErrorCode::ConditionViolated,
               "empty coherence window: tail coherence " + std::to_string(measured_L) +
                   " exceeds the sparsity bound for m = " + std::to_string(cfg.m),
               "sparsity-bound", measured_L);
        mu = 0.5 * (window.lo + window.hi);
      }
      AdversarialInstance inst =
          build_adversarial(cfg.n, cfg.cols, cfg.m, mu, tail, measured_L);
      prep.dict = std::move(inst.dict);
      prep.fixed_support = inst.support_template.support;
      prep.tail_L = measured_L;
      break;
    }
    case DictKind::File: {
      prep.dict = load_dictionary(cfg.dict_file);
      if (prep.dict.rows() != cfg.n || prep.dict.cols() != cfg.cols)
        fail(ErrorCode::DimensionMismatch,
             "dictionary file is " + std::to_string(prep.dict.rows()) + "x" +
                 std::to_string(prep.dict.cols()) + ", config says " +
                 std::to_string(cfg.n) + "x" + std::to_string(cfg.cols));
      break;
    }
  }

  prep.mu = coherence(prep.dict);
  ProblemParams params{cfg.n, cfg.cols, cfg.m, prep.mu, cfg.sigma, cfg.alpha, cfg.beta};
  prep.sigma_eff = sigma_eff(cfg.sigma, cfg.m, prep.mu);  // throws MipViolated
  prep.beta = resolved_beta(params);
  if (static_cast<double>(cfg.m) >
      std::pow(double(cfg.cols), prep.beta) * (1.0 + 1e-12))
    fail(ErrorCode::BetaInconsistent, "m exceeds N^beta");
  return prep;
}

namespace {

struct PointAggregates {
  long successes = 0;
  long first_step_failures = 0;
  long exact_m = 0;
  long exact_m_correct = 0;
  std::vector<long> stop_histogram;
  double max_defect = 0.0;

  void merge(const PointAggregates& other) {
    successes += other.successes;
    first_step_failures += other.first_step_failures;
    exact_m += other.exact_m;
    exact_m_correct += other.exact_m_correct;
    if (stop_histogram.size() < other.stop_histogram.size())
      stop_histogram.resize(other.stop_histogram.size(), 0);
    for (std::size_t i = 0; i < other.stop_histogram.size(); ++i)
      stop_histogram[i] += other.stop_histogram[i];
    max_defect = std::max(max_defect, other.max_defect);
  }
};

PointAggregates run_point(const ExperimentConfig& cfg, const PreparedExperiment& prep,
                          int point_index, double snr_norm, int workers) {
  const int cap = std::min(cfg.n, cfg.cols);
  const double nu =
      snr_norm * prep.sigma_eff * std::sqrt(2.0 * std::log(double(cfg.cols)));
  const double tau =
      cfg.sigma * std::sqrt(2.0 * (1.0 + cfg.alpha) * std::log(double(cfg.cols)));

  std::vector<PointAggregates> slots(worker_count(workers));
  parallel_chunks(
      cfg.trials_per_point, static_cast<int>(slots.size()),
      [&](long first, long last, int slot) {
        PointAggregates& agg = slots[slot];
        agg.stop_histogram.assign(cap + 1, 0);
        for (long trial = first; trial < last; ++trial) {
          std::uint64_t trial_seed =
              subseed(cfg.base_seed, static_cast<std::uint64_t>(point_index),
                      static_cast<std::uint64_t>(trial));
          SparseVector x;
          if (!prep.fixed_support.empty()) {
            // the construction's own equal-coefficient vector
            x.length = cfg.cols;
            x.support = prep.fixed_support;
            x.values.assign(prep.fixed_support.size(), nu);
          } else {
            x = random_support_vector(cfg.cols, cfg.m, nu, cfg.sign_mode,
                                      subseed(trial_seed, 1));
          }
          const Dictionary* dict = &prep.dict;
          Dictionary resampled;
          if (cfg.resample_dict) {
            resampled = build_random_sphere(cfg.n, cfg.cols, subseed(trial_seed, 3));
            dict = &resampled;
          }
          SignalInstance sig = synthesize(*dict, x, cfg.sigma, subseed(trial_seed, 2));
          SolveTrace trace = cfg.solver == SolverKind::Omp
                                 ? omp(*dict, sig.observation, cfg.m)
                                 : omp_star(*dict, sig.observation, tau, cap);
          bool success = support_recovered(trace, std::span<const int>(x.support));
          agg.successes += success;
          bool first_in = !trace.selected.empty() &&
                          std::find(x.support.begin(), x.support.end(),
                                    trace.selected.front()) != x.support.end();
          agg.first_step_failures += !first_in;
          std::size_t stop_at = trace.selected.size();
          agg.stop_histogram[stop_at] += 1;
          if (static_cast<int>(stop_at) == cfg.m) {
            agg.exact_m += 1;
            agg.exact_m_correct += success;
          }
          agg.max_defect = std::max(agg.max_defect, trace.orthogonality_defect);
        }
      });

  PointAggregates total;
  total.stop_histogram.assign(cap + 1, 0);
  for (const PointAggregates& slot : slots) total.merge(slot);
  return total;
}

}  // namespace

std::pair<double, double> wilson_interval(int successes, int trials) {
  if (trials < 1) fail(ErrorCode::BadParameter, "empty sample");
  double p = double(successes) / trials;
  double z2 = kZ95 * kZ95;
  double denom = 1.0 + z2 / trials;
  double center = (p + z2 / (2.0 * trials)) / denom;
  double half = kZ95 *
                std::sqrt(p * (1.0 - p) / trials + z2 / (4.0 * double(trials) * trials)) /
                denom;
  // the endpoints are 0/1 exactly at empty/full counts; keep them there
  double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

RecoveryCurve recovery_curve(const ExperimentConfig& cfg,
                             const PreparedExperiment& prep, int workers) {
  cfg.validate();
  RecoveryCurve curve;
  curve.dict_coherence = prep.mu;
  curve.sigma_eff = prep.sigma_eff;
  curve.beta = prep.beta;
  curve.ref_benhaim = 2.0;
  curve.ref_sharp = 1.0 + std::sqrt(prep.beta);
  curve.ref_approx_lower = 1.0 - prep.mu - std::sqrt(prep.beta);
  curve.config_echo = cfg.echo();
  for (std::size_t pi = 0; pi < cfg.snr_grid.size(); ++pi) {
    PointAggregates agg =
        run_point(cfg, prep, static_cast<int>(pi), cfg.snr_grid[pi], workers);
    CurvePoint point;
    point.snr_norm = cfg.snr_grid[pi];
    point.trials = cfg.trials_per_point;
    point.successes = static_cast<int>(agg.successes);
    point.p_hat = double(agg.successes) / cfg.trials_per_point;
    auto [lo, hi] = wilson_interval(point.successes, point.trials);
    point.ci_low = lo;
    point.ci_high = hi;
    curve.points.push_back(point);
  }
  return curve;
}

RecoveryCurve recovery_curve(const ExperimentConfig& cfg, int workers) {
  return recovery_curve(cfg, prepare_experiment(cfg), workers);
}

double first_step_failure_rate(const ExperimentConfig& cfg,
                               const PreparedExperiment& prep, int workers) {
  cfg.validate();
  if (cfg.dict_kind != DictKind::Adversarial)
    fail(ErrorCode::BadParameter, "first-step failure rate is defined for the adversarial dictionary");
  if (cfg.snr_grid.size() != 1)
    fail(ErrorCode::BadParameter, "pass a single-point snr grid");
  PointAggregates agg = run_point(cfg, prep, 0, cfg.snr_grid[0], workers);
  return double(agg.first_step_failures) / cfg.trials_per_point;
}

double first_step_failure_rate(const ExperimentConfig& cfg, int workers) {
  if (cfg.dict_kind != DictKind::Adversarial)
    fail(ErrorCode::BadParameter, "first-step failure rate is defined for the adversarial dictionary");
  return first_step_failure_rate(cfg, prepare_experiment(cfg), workers);
}

StopStats omp_star_stop_stats(const ExperimentConfig& cfg,
                              const PreparedExperiment& prep, int workers) {
  cfg.validate();
  if (cfg.solver != SolverKind::OmpStar)
    fail(ErrorCode::BadParameter, "stop statistics need the omp-star solver");
  StopStats stats;
  stats.histogram.assign(std::min(cfg.n, cfg.cols) + 1, 0);
  for (std::size_t pi = 0; pi < cfg.snr_grid.size(); ++pi) {
    PointAggregates agg =
        run_point(cfg, prep, static_cast<int>(pi), cfg.snr_grid[pi], workers);
    for (std::size_t i = 0; i < agg.stop_histogram.size(); ++i)
      stats.histogram[i] += agg.stop_histogram[i];
    stats.trials += cfg.trials_per_point;
    stats.frac_exact_m += double(agg.exact_m);
    stats.frac_exact_m_correct += double(agg.exact_m_correct);
  }
  stats.frac_exact_m /= double(stats.trials);
  stats.frac_exact_m_correct /= double(stats.trials);
  return stats;
}

StopStats omp_star_stop_stats(const ExperimentConfig& cfg, int workers) {
  if (cfg.solver != SolverKind::OmpStar)
    fail(ErrorCode::BadParameter, "stop statistics need the omp-star solver");
  return omp_star_stop_stats(cfg, prepare_experiment(cfg), workers);
}

SidakValidation validate_sidak(int n1, int n2, double eta, double correlation,
                               long trials, std::uint64_t seed, int workers) {
  if (correlation < 0.0 || correlation >= 1.0)
    fail(ErrorCode::BadParameter, "equicorrelation must lie in [0, 1)");
  if (trials < 1) fail(ErrorCode::BadParameter, "need at least one trial");
  SidakValidation out;
  out.bound = sidak_bound(n1, n2, eta);
  out.trials = trials;
  const double threshold = std::sqrt(2.0 * eta * std::log(double(n2)));
  const double shared = std::sqrt(correlation);
  const double own = std::sqrt(1.0 - correlation);

  std::vector<long> counts(worker_count(workers), 0);
  parallel_chunks(trials, static_cast<int>(counts.size()),
                  [&](long first, long last, int slot) {
                    long hits = 0;
                    for (long t = first; t < last; ++t) {
                      Rng rng(subseed(seed, static_cast<std::uint64_t>(t)));
                      double z0 = correlation > 0.0 ? rng.normal() : 0.0;
                      double worst = 0.0;
                      for (int i = 0; i < n1; ++i) {
                        double x = own * rng.normal() + shared * z0;
                        worst = std::max(worst, std::abs(x));
                      }
                      hits += worst < threshold;
                    }
                    counts[slot] = hits;
                  });
  long hits = 0;
  for (long c : counts) hits += c;
  out.empirical = double(hits) / double(trials);
  return out;
}

RandomCoherenceValidation validate_random_coherence(int rows, int cols,
                                                    long trials,
                                                    std::uint64_t seed,
                                                    int workers) {
  if (rows < 1 || cols <= rows) fail(ErrorCode::BadParameter, "need rows < cols");
  if (trials < 1) fail(ErrorCode::BadParameter, "need at least one trial");
  RandomCoherenceValidation out;
  out.bound = 2.0 * std::sqrt(std::log(double(cols)) / rows);
  out.asymptote = std::exp(-1.0 / std::sqrt(8.0 * M_PI * std::log(double(cols))));
  out.trials = trials;

  std::vector<long> counts(worker_count(workers), 0);
  parallel_chunks(trials, static_cast<int>(counts.size()),
                  [&](long first, long last, int slot) {
                    long hits = 0;
                    for (long t = first; t < last; ++t) {
                      Dictionary d = build_random_sphere(
                          rows, cols, subseed(seed, static_cast<std::uint64_t>(t)));
                      hits += coherence(d) <= out.bound;
                    }
                    counts[slot] = hits;
                  });
  long hits = 0;
  for (long c : counts) hits += c;
  out.fraction = double(hits) / double(trials);
  return out;
}

std::string curve_to_csv(const RecoveryCurve& curve) {
  std::ostringstream out;
  out << "# omplab-curve v1\n";
  for (const auto& [key, value] : curve.config_echo)
    out << "# cfg." << key << "=" << value << "\n";
  out << "# axis=x_min/(sigma_eff*sqrt(2*ln(N)))\n";
  out << "# beta=" << fmt(curve.beta) << "\n";
  out << "# dict_coherence=" << fmt(curve.dict_coherence) << "\n";
  out << "# sigma_eff=" << fmt(curve.sigma_eff) << "\n";
  out << "# ref.benhaim=" << fmt(curve.ref_benhaim) << "\n";
  out << "# ref.sharp=" << fmt(curve.ref_sharp) << "\n";
  out << "# ref.approx_lower=" << fmt(curve.ref_approx_lower) << "\n";
  out << "snr_norm,trials,successes,p_hat,ci_low,ci_high\n";
  for (const CurvePoint& p : curve.points)
    out << fmt(p.snr_norm) << "," << p.trials << "," << p.successes << ","
        << fmt(p.p_hat) << "," << fmt(p.ci_low) << "," << fmt(p.ci_high) << "\n";
  return out.str();
}

RecoveryCurve curve_from_csv(std::istream& in) {
  RecoveryCurve curve;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      std::string body = line.substr(2);
      auto eq = body.find('=');
      if (eq == std::string::npos) continue;  // banner line
      std::string key = body.substr(0, eq);
      std::string value = body.substr(eq + 1);
      if (key.rfind("cfg.", 0) == 0)
        curve.config_echo.emplace_back(key.substr(4), value);
      else if (key == "beta")
        curve.beta = std::stod(value);
      else if (key == "dict_coherence")
        curve.dict_coherence = std::stod(value);
      else if (key == "sigma_eff")
        curve.sigma_eff = std::stod(value);
      else if (key == "ref.benhaim")
        curve.ref_benhaim = std::stod(value);
      else if (key == "ref.sharp")
        curve.ref_sharp = std::stod(value);
      else if (key == "ref.approx_lower")
        curve.ref_approx_lower = std::stod(value);
      continue;
    }
    if (!header_seen) {
      if (line != "snr_norm,trials,successes,p_hat,ci_low,ci_high")
        fail(ErrorCode::IoError, "unexpected curve column header: " + line);
      header_seen = true;
      continue;
    }
    CurvePoint p;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    if (!(row >> p.snr_norm >> p.trials >> p.successes >> p.p_hat >> p.ci_low >>
          p.ci_high))
      fail(ErrorCode::IoError, "malformed curve row: " + line);
    curve.points.push_back(p);
  }
  if (!header_seen) fail(ErrorCode::IoError, "not a curve file");
  return curve;
}

RecoveryCurve curve_from_csv(const std::string& text) {
  std::istringstream in(text);
  return curve_from_csv(in);
}

std::string curve_filename(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "curve_" << to_string(cfg.dict_kind) << "_" << cfg.m << ".csv";
  return out.str();
}

}  // namespace omplab
