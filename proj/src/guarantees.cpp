#include "omplab/guarantees.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "omplab/dictionary.hpp"
#include "omplab/errors.hpp"

namespace omplab {

namespace {

void require_dims(const ProblemParams& p) {
  if (p.m < 1 || p.cols < 2 || p.n < 1)
    fail(ErrorCode::BadParameter, "need m >= 1, n >= 1, N >= 2");
  if (p.sigma < 0.0) fail(ErrorCode::BadParameter, "negative sigma");
  if (p.alpha < 0.0) fail(ErrorCode::BadParameter, "negative alpha");
}

void require_mip(const ProblemParams& p) {
  if (!mip_holds(p.m, p.mu))
    fail(ErrorCode::MipViolated,
         "MIP violated: mu = " + std::to_string(p.mu) +
             " must be below 1/(2m-1) = " + std::to_string(1.0 / (2 * p.m - 1)));
}

double checked_beta(const ProblemParams& p) {
  double beta = resolved_beta(p);
  if (beta <= 0.0 || beta >= 1.0)
    fail(ErrorCode::BadParameter, "beta must lie in (0, 1)");
  if (static_cast<double>(p.m) > std::pow(double(p.cols), beta) * (1.0 + 1e-12))
    fail(ErrorCode::BetaInconsistent,
         "m = " + std::to_string(p.m) + " exceeds N^beta = " +
             std::to_string(std::pow(double(p.cols), beta)));
  return beta;
}

}  // namespace

double resolved_beta(const ProblemParams& p) {
  if (p.beta > 0.0) return p.beta;
  if (p.m < 2) return 1e-9;  // ln(1)/ln(N) = 0 is outside (0,1); pick the floor
  return std::log(double(p.m)) / std::log(double(p.cols));
}

bool mip_holds(int m, double mu) {
  if (m < 1) fail(ErrorCode::BadParameter, "m must be >= 1");
  if (mu < 0.0) fail(ErrorCode::BadParameter, "negative coherence");
  return mu < 1.0 / (2 * m - 1);
}

double sigma_eff(double sigma, int m, double mu) {
  if (!mip_holds(m, mu))
    fail(ErrorCode::MipViolated,
         "MIP violated: mu = " + std::to_string(mu) + " must be below 1/(2m-1) = " +
             std::to_string(1.0 / (2 * m - 1)));
  return sigma / (1.0 - (2 * m - 1) * mu);
}

double benhaim_threshold(const ProblemParams& p) {
  require_dims(p);
  return 2.0 * sigma_eff(p.sigma, p.m, p.mu) *
         std::sqrt(2.0 * (1.0 + p.alpha) * std::log(double(p.cols)));
}

double benhaim_prob(const ProblemParams& p) {
  require_dims(p);
  double logN = std::log(double(p.cols));
  return 1.0 - 1.0 / (std::pow(double(p.cols), p.alpha) *
                      std::sqrt(M_PI * (1.0 + p.alpha) * logN));
}

double sharp_threshold(const ProblemParams& p) {
  require_dims(p);
  double beta = checked_beta(p);
  return sigma_eff(p.sigma, p.m, p.mu) * (1.0 + std::sqrt(beta)) *
         std::sqrt(2.0 * (1.0 + p.alpha) * std::log(double(p.cols)));
}

double sharp_prob(const ProblemParams& p) {
  require_dims(p);
  double beta = checked_beta(p);
  double logN = std::log(double(p.cols));
  double lead = 1.0 / std::sqrt(M_PI * (1.0 + p.alpha) * logN);
  return 1.0 - lead * (1.0 / std::pow(double(p.cols), p.alpha) +
                       1.0 / (std::pow(double(p.cols), p.alpha * beta) *
                              std::sqrt(beta)));
}

double approx_sufficient(const ProblemParams& p) {
  require_dims(p);
  double beta = checked_beta(p);
  return sigma_eff(p.sigma, p.m, p.mu) * (1.0 + std::sqrt(beta)) *
         std::sqrt(2.0 * std::log(double(p.cols)));
}

double approx_lower(const ProblemParams& p) {
  require_dims(p);
  double beta = checked_beta(p);
  return sigma_eff(p.sigma, p.m, p.mu) * (1.0 - p.mu - std::sqrt(beta)) *
         std::sqrt(2.0 * std::log(double(p.cols)));
}

double rho(int m, double mu) {
  if (m < 1) fail(ErrorCode::BadParameter, "m must be >= 1");
  double margin = 1.0 - (m - 1) * mu;
  if (margin <= 0.0)
    fail(ErrorCode::Degenerate, "1 - (m-1) mu must be positive");
  return std::sqrt(margin / m);
}

double mu_tilde(int m, double mu) {
  if (m < 1) fail(ErrorCode::BadParameter, "m must be >= 1");
  double margin = 1.0 - (m - 1) * mu;
  if (margin <= 0.0)
    fail(ErrorCode::Degenerate, "1 - (m-1) mu must be positive");
  return mu * mu * m / margin;
}

double sparsity_tail_bound(double L) {
  if (L <= 0.0 || L >= 1.0) fail(ErrorCode::BadParameter, "need 0 < L < 1");
  return (3.0 - L - std::sqrt(8.0 - 8.0 * L)) / L;
}

MuInterval mu_feasible_interval(int m, double L) {
  if (m < 1) fail(ErrorCode::BadParameter, "m must be >= 1");
  if (L <= 0.0 || L >= 1.0) fail(ErrorCode::BadParameter, "need 0 < L < 1");
  double a = 2.0 * m - 1.0 - L * m;  // > m-1 >= 0 since L < 1
  double b = 1.0 + L * (m - 1);
  double disc = 1.0 - 4.0 * L * a / (b * b);
  MuInterval out;
  if (disc < 0.0) return out;
  out.empty = false;
  out.lo = b * (1.0 - std::sqrt(disc)) / (2.0 * a);
  out.hi = b * (1.0 + std::sqrt(disc)) / (2.0 * a);
  return out;
}

ConditionFlags tightness_conditions(int m, double mu, double L, double beta,
                                    int n, int cols) {
  if (n - m < 1) fail(ErrorCode::BadParameter, "need n - m >= 1");
  if (beta <= 0.0 || beta >= 1.0) fail(ErrorCode::BadParameter, "beta in (0,1)");
  ConditionFlags flags;
  flags.mip = mip_holds(m, mu);
  flags.sparsity_dims =
      static_cast<double>(m) <= std::min(std::pow(double(cols), beta), double(n));
  flags.sparsity_tail = static_cast<double>(m) <= sparsity_tail_bound(L);
  MuInterval window = mu_feasible_interval(m, L);
  flags.coherence_window = !window.empty && window.lo <= mu && mu <= window.hi;
  return flags;
}

double xmin_thm3(const ProblemParams& p, int sub_cols, double c0) {
  require_dims(p);
  require_mip(p);
  if (sub_cols < 3 || p.cols < 3)
    fail(ErrorCode::Degenerate, "log log needs N and N - m at least 3");
  if (c0 <= 0.0) fail(ErrorCode::BadParameter, "c0 must be positive");
  double beta = checked_beta(p);
  double mt = mu_tilde(p.m, p.mu);
  double r = rho(p.m, p.mu);
  double log_sub = std::log(double(sub_cols));
  double log_full = std::log(double(p.cols));
  double term1 = std::sqrt(2.0 * (1.0 - p.mu) * (1.0 - mt) * log_sub);
  double term2 = std::sqrt(2.0 * beta * (1.0 - r * r) * log_full);
  double term3 = c0 * std::sqrt((1.0 - mt) * std::log(log_sub));
  double term4 = (r + std::sqrt(mt)) * std::sqrt(2.0 * std::log(log_full));
  return sigma_eff(p.sigma, p.m, p.mu) * (term1 - term2 - term3 - term4);
}

double failure_prob_p0(int sub_cols, int cols, double mu, double beta, double C) {
  if (sub_cols < 3 || cols < 3)
    fail(ErrorCode::Degenerate, "log log needs N and N - m at least 3");
  if (mu <= 0.0 || beta <= 0.0 || C <= 0.0)
    fail(ErrorCode::BadParameter, "need mu, beta, C positive");
  double log_sub = std::log(double(sub_cols));
  double log_full = std::log(double(cols));
  double concentration =
      6.0 * std::exp(-C * std::sqrt(std::log(log_sub) *
                                    std::min(1.0 / mu, log_sub)));
  double common = 1.0 / (log_full * std::sqrt(M_PI * std::log(log_full)));
  double support = 1.0 / std::sqrt(M_PI * beta * log_full);
  return 1.0 - concentration - common - support;
}

double sidak_bound(int n1, int n2, double eta) {
  if (n1 < 0 || n2 < std::max(n1, 2)) fail(ErrorCode::BadParameter, "need n2 >= max(n1, 2)");
  if (eta <= 0.0) fail(ErrorCode::BadParameter, "eta must be positive");
  if (n1 == 0) return 1.0;
  double logn = std::log(double(n2));
  return 1.0 - double(n1) / (std::pow(double(n2), eta) *
                             std::sqrt(M_PI * eta * logn));
}

std::vector<RegionRow> region_scan(int sub_rows, int sub_cols, double supplied_L) {
  double L = supplied_L > 0.0 ? supplied_L
                              : coherence_bounds(sub_rows, sub_cols).welch_lower;
  if (L <= 0.0 || L >= 1.0) fail(ErrorCode::BadParameter, "need 0 < L < 1");
  int m_max_tail = static_cast<int>(std::floor(sparsity_tail_bound(L) + 1e-12));
  std::vector<RegionRow> rows;
  for (int m = 1; L < 1.0 / (2 * m - 1); ++m) {
    RegionRow row;
    row.m = m;
    row.mu_lo_mip = L;
    row.mu_hi_mip = 1.0 / (2 * m - 1);
    MuInterval window = mu_feasible_interval(m, L);
    row.window_nonempty = !window.empty;
    if (!window.empty) {
      row.window_lo = window.lo;
      row.window_hi = window.hi;
    }
    row.m_max_tail = m_max_tail;
    rows.push_back(row);
  }
  return rows;
}

std::string region_to_csv(const std::vector<RegionRow>& rows, double L) {
  std::ostringstream out;
  out.precision(17);
  out << "# L=" << L << "\n";
  out << "m,mu_lo_mip,mu_hi_mip,window_lo,window_hi,m_max_tail\n";
  for (const RegionRow& r : rows) {
    out << r.m << "," << r.mu_lo_mip << "," << r.mu_hi_mip << ",";
    if (r.window_nonempty)
      out << r.window_lo << "," << r.window_hi;
    else
      out << ",";
    out << "," << r.m_max_tail << "\n";
  }
  return out.str();
}

GuaranteeReport analyze(const ProblemParams& p, std::optional<double> tail_L,
                        double c0, double big_c) {
  require_dims(p);
  require_mip(p);
  GuaranteeReport r;
  r.params = p;
  r.beta = checked_beta(p);
  r.mip_ok = true;
  r.sigma_eff = sigma_eff(p.sigma, p.m, p.mu);
  r.benhaim_threshold = benhaim_threshold(p);
  r.sharp_threshold = sharp_threshold(p);
  r.approx_sufficient = approx_sufficient(p);
  r.approx_lower = approx_lower(p);
  r.approx_lower_nonpositive = r.approx_lower <= 0.0;
  r.benhaim_prob = benhaim_prob(p);
  r.sharp_prob = sharp_prob(p);
  r.rho = rho(p.m, p.mu);
  r.mu_tilde = mu_tilde(p.m, p.mu);
  r.c0 = c0;
  r.big_c = big_c;
  int sub_cols = p.cols - p.m;
  if (sub_cols >= 3 && p.mu > 0.0) {
    r.xmin_worst = xmin_thm3(p, sub_cols, c0);
    r.xmin_worst_negative = *r.xmin_worst <= 0.0;
    r.p0 = failure_prob_p0(sub_cols, p.cols, p.mu, r.beta, big_c);
    r.p0_vacuous = *r.p0 <= 0.0;
  }
  if (tail_L) {
    r.tail_L = tail_L;
    r.conditions = tightness_conditions(p.m, p.mu, *tail_L, r.beta, p.n, p.cols);
  }
  return r;
}

namespace {

std::string flag(bool ok) { return ok ? "pass" : "FAIL"; }

}  // namespace

std::string format_report(const GuaranteeReport& r) {
  std::ostringstream out;
  out << std::setprecision(10);
  auto line = [&out](const std::string& key, auto value) {
    out << std::left << std::setw(22) << key << ": " << value << "\n";
  };
  line("n", r.params.n);
  line("N", r.params.cols);
  line("m", r.params.m);
  line("mu", r.params.mu);
  line("sigma", r.params.sigma);
  line("alpha", r.params.alpha);
  line("beta", r.beta);
  line("mip", r.mip_ok ? "holds" : "violated");
  line("sigma_eff", r.sigma_eff);
  line("benhaim_threshold", r.benhaim_threshold);
  line("benhaim_prob", r.benhaim_prob);
  line("sharp_threshold", r.sharp_threshold);
  line("sharp_prob", r.sharp_prob);
  line("approx_sufficient", r.approx_sufficient);
  out << std::left << std::setw(22) << "approx_lower" << ": " << r.approx_lower;
  if (r.approx_lower_nonpositive) out << "  (non-positive)";
  out << "\n";
  line("rho", r.rho);
  line("mu_tilde", r.mu_tilde);
  line("c0", r.c0);
  line("C", r.big_c);
  if (r.xmin_worst) {
    out << std::left << std::setw(22) << "xmin_worst" << ": " << *r.xmin_worst;
    if (r.xmin_worst_negative) out << "  (non-positive)";
    out << "\n";
    out << std::left << std::setw(22) << "p0" << ": " << *r.p0;
    if (r.p0_vacuous) out << "  (vacuous)";
    out << "\n";
  } else {
    line("xmin_worst", "n/a");
    line("p0", "n/a");
  }
  if (r.tail_L) {
    line("L", *r.tail_L);
    const ConditionFlags& c = *r.conditions;
    line("cond.mip", flag(c.mip));
    line("cond.sparsity_dims", flag(c.sparsity_dims));
    line("cond.sparsity_tail", flag(c.sparsity_tail));
    line("cond.coherence_window", flag(c.coherence_window));
  }
  return out.str();
}

std::string report_csv_header() {
  return "n,N,m,mu,sigma,alpha,beta,mip,sigma_eff,benhaim_threshold,benhaim_prob,"
         "sharp_threshold,sharp_prob,approx_sufficient,approx_lower,rho,mu_tilde,"
         "c0,C,xmin_worst,p0,L,cond_mip,cond_sparsity_dims,cond_sparsity_tail,"
         "cond_coherence_window";
}

std::string report_csv_row(const GuaranteeReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << r.params.n << "," << r.params.cols << "," << r.params.m << ","
      << r.params.mu << "," << r.params.sigma << "," << r.params.alpha << ","
      << r.beta << "," << (r.mip_ok ? 1 : 0) << "," << r.sigma_eff << ","
      << r.benhaim_threshold << "," << r.benhaim_prob << "," << r.sharp_threshold
      << "," << r.sharp_prob << "," << r.approx_sufficient << "," << r.approx_lower
      << "," << r.rho << "," << r.mu_tilde << "," << r.c0 << "," << r.big_c << ",";
  if (r.xmin_worst)
    out << *r.xmin_worst << "," << *r.p0;
  else
    out << ",";
  out << ",";
  if (r.tail_L) {
    const ConditionFlags& c = *r.conditions;
    out << *r.tail_L << "," << c.mip << "," << c.sparsity_dims << ","
        << c.sparsity_tail << "," << c.coherence_window;
  } else {
    out << ",,,,";
  }
  return out.str();
}

}  // namespace omplab
