#pragma once

#include <optional>
#include <string>
#include <vector>

namespace omplab {

// Parameter bundle feeding the guarantee formulas. beta <= 0 selects the
// default rule beta = ln(m)/ln(N), the smallest exponent with m <= N^beta.
struct ProblemParams {
  int n = 0;
  int cols = 0;  // N
  int m = 0;
  double mu = 0.0;
  double sigma = 1.0;
  double alpha = 0.0;
  double beta = -1.0;
};

double resolved_beta(const ProblemParams& p);

// MIP: mu < 1/(2m - 1), strict.
bool mip_holds(int m, double mu);

// sigma / (1 - (2m-1) mu); throws MipViolated.
double sigma_eff(double sigma, int m, double mu);

// Known-sparsity sufficient condition: x_min scale and success probability.
double benhaim_threshold(const ProblemParams& p);
double benhaim_prob(const ProblemParams& p);

// Sharper condition (threshold lower by (1+sqrt(beta))/2); throws
// BetaInconsistent when m > N^beta.
double sharp_threshold(const ProblemParams& p);
double sharp_prob(const ProblemParams& p);

// alpha = 0 specializations used for the figure reference lines. The lower
// formula may be <= 0; it is returned as-is.
double approx_sufficient(const ProblemParams& p);
double approx_lower(const ProblemParams& p);

// rho = sqrt((1-(m-1)mu)/m), mu_tilde = mu^2 m / (1-(m-1)mu); throw
// Degenerate when 1-(m-1)mu <= 0.
double rho(int m, double mu);
double mu_tilde(int m, double mu);

// Largest sparsity admitted by the tail-coherence bound: (3-L-sqrt(8-8L))/L.
double sparsity_tail_bound(double L);

// Two-sided coherence window for the worst-case construction; empty when the
// discriminant is negative. Endpoints are the roots of
// mu^2 (2m-1-Lm) - mu (L(m-1)+1) + L = 0.
struct MuInterval {
  bool empty = true;
  double lo = 0.0;
  double hi = 0.0;
};
MuInterval mu_feasible_interval(int m, double L);

// Pass/fail for each precondition of the worst-case construction.
struct ConditionFlags {
  bool mip = false;
  bool sparsity_dims = false;   // m <= min(N^beta, n)
  bool sparsity_tail = false;   // m <= (3-L-sqrt(8-8L))/L
  bool coherence_window = false;
};
ConditionFlags tightness_conditions(int m, double mu, double L, double beta,
                                    int n, int cols);

// The four-term worst-case x_min scale. sub_cols is the tail column count
// (N - m); must be >= 3 so log log is positive. May be negative.
double xmin_thm3(const ProblemParams& p, int sub_cols, double c0);

// 1 - 6 exp(-C sqrt(loglog(sub_cols) min(1/mu, log(sub_cols))))
//   - 1/(log(N) sqrt(pi loglog N)) - 1/sqrt(pi beta log N). May be <= 0.
double failure_prob_p0(int sub_cols, int cols, double mu, double beta, double C);

// Joint absolute-value bound: 1 - n1 / (n2^eta sqrt(pi eta ln n2)); n1 = 0
// gives exactly 1.
double sidak_bound(int n1, int n2, double eta);

// One row per sparsity m while the [L, 1/(2m-1)) band is non-empty. The
// window fields mirror mu_feasible_interval(m, L); m_max_tail repeats
// floor(sparsity_tail_bound(L)).
struct RegionRow {
  int m = 0;
  double mu_lo_mip = 0.0;  // = L
  double mu_hi_mip = 0.0;  // = 1/(2m-1)
  bool window_nonempty = false;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int m_max_tail = 0;
};
std::vector<RegionRow> region_scan(int sub_rows, int sub_cols,
                                   double supplied_L = -1.0);
std::string region_to_csv(const std::vector<RegionRow>& rows, double L);

// Everything the analyze command prints. Optional values are absent when
// their extra inputs (L, sub_cols) were not supplied.
struct GuaranteeReport {
  ProblemParams params;
  double beta = 0.0;  // resolved
  bool mip_ok = false;
  double sigma_eff = 0.0;
  double benhaim_threshold = 0.0;
  double sharp_threshold = 0.0;
  double approx_sufficient = 0.0;
  double approx_lower = 0.0;
  bool approx_lower_nonpositive = false;
  double benhaim_prob = 0.0;
  double sharp_prob = 0.0;
  double rho = 0.0;
  double mu_tilde = 0.0;
  double c0 = 1.0;
  double big_c = 1.0;
  std::optional<double> tail_L;
  std::optional<double> xmin_worst;
  bool xmin_worst_negative = false;
  std::optional<double> p0;
  bool p0_vacuous = false;
  std::optional<ConditionFlags> conditions;
};

// Builds the report; throws MipViolated when the MIP precondition fails
// (the remaining quantities are undefined without it).
GuaranteeReport analyze(const ProblemParams& p, std::optional<double> tail_L,
                        double c0 = 1.0, double big_c = 1.0);

std::string format_report(const GuaranteeReport& r);
std::string report_csv_header();
std::string report_csv_row(const GuaranteeReport& r);

}  // namespace omplab
