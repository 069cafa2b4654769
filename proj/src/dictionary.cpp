#include "omplab/dictionary.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "omplab/errors.hpp"
#include "omplab/guarantees.hpp"
#include "omplab/rng.hpp"

namespace omplab {

namespace {

constexpr double kNormTol = 1e-9;
constexpr int kCoherenceBlock = 1024;

std::string dims_label(const std::string& kind, int n, int cols) {
  std::ostringstream out;
  out << kind << "(" << n << "x" << cols << ")";
  return out.str();
}

}  // namespace

void Dictionary::validate() const {
  if (rows() < 1) fail(ErrorCode::BadParameter, "dictionary needs at least one row");
  if (cols() < 2) fail(ErrorCode::BadParameter, "dictionary needs at least two columns");
  if (!atoms.allFinite()) fail(ErrorCode::BadParameter, "non-finite dictionary entry");
  for (int j = 0; j < cols(); ++j) {
    double norm = atoms.col(j).norm();
    if (std::abs(norm - 1.0) > kNormTol)
      fail(ErrorCode::BadParameter,
           "column " + std::to_string(j) + " has norm " + std::to_string(norm));
  }
}

double coherence_of_columns(const Eigen::MatrixXd& m) {
  const int cols = static_cast<int>(m.cols());
  double best = 0.0;
  // every unordered pair lands in exactly one block product
  for (int j0 = 0; j0 < cols; j0 += kCoherenceBlock) {
    const int width = std::min(kCoherenceBlock, cols - j0);
    Eigen::MatrixXd gram =
        m.leftCols(j0 + width).transpose() * m.middleCols(j0, width);
    for (int c = 0; c < width; ++c) gram(j0 + c, c) = 0.0;
    best = std::max(best, gram.cwiseAbs().maxCoeff());
  }
  return best;
}

double coherence(const Dictionary& d) { return coherence_of_columns(d.atoms); }

Dictionary normalize_columns(Eigen::MatrixXd m, std::string label) {
  for (int j = 0; j < m.cols(); ++j) {
    double norm = m.col(j).norm();
    if (norm < 1e-12)
      fail(ErrorCode::ZeroColumn, "column " + std::to_string(j) + " is zero");
    m.col(j) /= norm;
  }
  Dictionary d{std::move(m), std::move(label)};
  d.validate();
  return d;
}

Dictionary build_two_ortho(int n) {
  if (n < 2 || (n & (n - 1)) != 0)
    fail(ErrorCode::NotPowerOfTwo, "two-ortho size must be 2^k with k >= 1, got " +
                                       std::to_string(n));
  // Sylvester recursion, then scale by 1/sqrt(n).
  Eigen::MatrixXd h(1, 1);
  h(0, 0) = 1.0;
  for (int size = 1; size < n; size *= 2) {
    Eigen::MatrixXd next(2 * size, 2 * size);
    next.topLeftCorner(size, size) = h;
    next.topRightCorner(size, size) = h;
    next.bottomLeftCorner(size, size) = h;
    next.bottomRightCorner(size, size) = -h;
    h = std::move(next);
  }
  Eigen::MatrixXd atoms(n, 2 * n);
  atoms.leftCols(n) = Eigen::MatrixXd::Identity(n, n);
  atoms.rightCols(n) = h / std::sqrt(static_cast<double>(n));
  Dictionary d{std::move(atoms), dims_label("two-ortho", n, 2 * n)};
  d.validate();
  return d;
}

Dictionary build_random_sphere(int n, int cols, std::uint64_t seed) {
  if (n < 1 || cols < 2) fail(ErrorCode::BadParameter, "bad random-sphere dims");
  Rng rng(seed);
  Eigen::MatrixXd atoms(n, cols);
  for (int j = 0; j < cols; ++j) {
    double norm = 0.0;
    do {
      for (int i = 0; i < n; ++i) atoms(i, j) = rng.normal();
      norm = atoms.col(j).norm();
    } while (norm < 1e-12);
    atoms.col(j) /= norm;
  }
  Dictionary d{std::move(atoms), dims_label("random-sphere", n, cols)};
  d.validate();
  return d;
}

EquiangularBlock build_equiangular_block(int m, double mu) {
  if (m < 2) fail(ErrorCode::BadParameter, "equiangular block needs m >= 2");
  if (mu < 0.0) fail(ErrorCode::BadParameter, "negative target correlation");
  if (mu >= 1.0 / (m - 1))
    fail(ErrorCode::MuTooLarge, "mu must be below 1/(m-1) = " +
                                    std::to_string(1.0 / (m - 1)));

  // Orthogonal V with first column (1/sqrt(m)) * ones, via the Householder
  // reflection mapping e1 onto it.
  Eigen::VectorXd target = Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(double(m)));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  u[0] = 1.0;
  u -= target;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(m, m);
  double usq = u.squaredNorm();
  if (usq > 0.0) v -= (2.0 / usq) * (u * u.transpose());

  Eigen::MatrixXd y(m, m);
  y.row(0) = std::sqrt((1.0 - (m - 1) * mu) / m) * Eigen::RowVectorXd::Ones(m);
  double scale = std::sqrt(1.0 + mu);
  for (int k = 1; k < m; ++k) y.row(k) = scale * v.col(k).transpose();

  return EquiangularBlock{std::move(y), mu};
}

CoherenceBounds coherence_bounds(int sub_rows, int sub_cols) {
  if (sub_rows < 1 || sub_cols <= sub_rows)
    fail(ErrorCode::BadParameter, "bounds need 1 <= rows < cols");
  double a = sub_rows;
  double b = sub_cols;
  CoherenceBounds out;
  out.welch_lower = std::sqrt((b - a) / (a * (b - 1.0)));
  out.tropp_upper = 2.0 * std::sqrt(std::log(b) / a);
  out.sub_rows = sub_rows;
  out.sub_cols = sub_cols;
  return out;
}

AdversarialInstance build_adversarial(int n, int cols, int m, double mu,
                                      const Dictionary& tail,
                                      double tail_coherence_bound) {
  if (m < 1 || m >= n || n >= cols)
    fail(ErrorCode::BadParameter, "need 1 <= m < n < N");
  const int sub_rows = n - m;
  const int sub_cols = cols - m;
  if (tail.rows() != sub_rows || tail.cols() != sub_cols)
    fail(ErrorCode::DimensionMismatch,
         "tail must be " + std::to_string(sub_rows) + "x" + std::to_string(sub_cols));

  const double measured_tail = coherence(tail);
  const double L =
      tail_coherence_bound > 0.0 ? tail_coherence_bound : measured_tail;
  if (measured_tail > L + 1e-12)
    fail(ErrorCode::ConditionViolated,
         "tail coherence " + std::to_string(measured_tail) + " exceeds L = " +
             std::to_string(L),
         "tail-coherence", measured_tail);
  if (!mip_holds(m, mu))
    fail(ErrorCode::ConditionViolated,
         "mu = " + std::to_string(mu) + " fails MIP (needs mu < 1/(2m-1) = " +
             std::to_string(1.0 / (2 * m - 1)) + ")",
         "mip", mu);
  if (static_cast<double>(m) > sparsity_tail_bound(L))
    fail(ErrorCode::ConditionViolated,
         "m = " + std::to_string(m) + " exceeds the tail sparsity bound " +
             std::to_string(sparsity_tail_bound(L)),
         "sparsity-bound", sparsity_tail_bound(L));
  MuInterval window = mu_feasible_interval(m, L);
  if (window.empty || mu < window.lo || mu > window.hi)
    fail(ErrorCode::ConditionViolated,
         "mu = " + std::to_string(mu) + " outside the feasible window [" +
             std::to_string(window.lo) + ", " + std::to_string(window.hi) + "]",
         "coherence-interval", mu);

  // Support block: equiangular vectors padded with zeros.
  Eigen::MatrixXd block;
  if (m == 1) {
    block = Eigen::MatrixXd::Ones(1, 1);
  } else {
    block = build_equiangular_block(m, mu).vectors;
  }
  Eigen::VectorXd sum = block.rowwise().sum();
  Eigen::VectorXd e_bar = sum / sum.norm();
  const double mt = mu_tilde(m, mu);

  Eigen::MatrixXd atoms = Eigen::MatrixXd::Zero(n, cols);
  atoms.topLeftCorner(m, m) = block;
  const double head = std::sqrt(mt);
  const double body = std::sqrt(1.0 - mt);
  for (int j = 0; j < sub_cols; ++j) {
    atoms.col(m + j).head(m) = head * e_bar;
    atoms.col(m + j).tail(sub_rows) = body * tail.atoms.col(j);
  }

  AdversarialInstance out;
  out.dict = Dictionary{std::move(atoms), dims_label("adversarial", n, cols)};
  out.dict.validate();
  out.support_template.length = cols;
  for (int k = 0; k < m; ++k) {
    out.support_template.support.push_back(k);
    out.support_template.values.push_back(1.0);
  }
  out.tail_coherence = L;
  return out;
}

DesignResult design_incoherent(int n, int cols, double mu_target, int max_iters,
                               double tol, std::uint64_t seed) {
  if (n < 1 || cols < 2) fail(ErrorCode::BadParameter, "bad design dims");
  if (max_iters < 1) fail(ErrorCode::BadParameter, "max_iters must be >= 1");
  if (cols > n) {
    double welch = coherence_bounds(n, cols).welch_lower;
    if (mu_target <= welch)
      fail(ErrorCode::TargetInfeasible,
           "target " + std::to_string(mu_target) + " is at or below the Welch bound " +
               std::to_string(welch),
           {}, welch);
  }
  if (mu_target >= 1.0) fail(ErrorCode::BadParameter, "target must be below 1");

  Eigen::MatrixXd start = build_random_sphere(n, cols, seed).atoms;
  Eigen::MatrixXd gram = start.transpose() * start;

  Eigen::MatrixXd best_gram;
  double best_coherence = std::numeric_limits<double>::infinity();
  int used = 0;
  bool converged = false;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  for (int it = 0; it < max_iters; ++it) {
    used = it + 1;
    // (a) unit diagonal, off-diagonals clipped to |.| <= target
    Eigen::VectorXd d = gram.diagonal().cwiseMax(1e-24).cwiseSqrt();
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < cols; ++i) {
        double g = gram(i, j) / (d[i] * d[j]);
        if (i == j)
          gram(i, j) = 1.0;
        else
          gram(i, j) = std::clamp(g, -mu_target, mu_target);
      }
    // (b) nearest rank-<=n positive semidefinite matrix
    eig.compute(gram);
    Eigen::VectorXd w = eig.eigenvalues();
    const int keep_from = std::max(0, cols - n);
    for (int k = 0; k < cols; ++k)
      w[k] = (k < keep_from) ? 0.0 : std::max(w[k], 0.0);
    gram = eig.eigenvectors() * w.asDiagonal() * eig.eigenvectors().transpose();

    // coherence of the normalized factor, read off the Gram directly
    d = gram.diagonal().cwiseMax(1e-24).cwiseSqrt();
    double coh = 0.0;
    for (int j = 0; j < cols; ++j)
      for (int i = j + 1; i < cols; ++i)
        coh = std::max(coh, std::abs(gram(i, j)) / (d[i] * d[j]));

    if (coh < best_coherence) {
      best_coherence = coh;
      best_gram = gram;
    }
    if (coh <= mu_target + tol) {
      converged = true;
      break;
    }
  }

  // Factor the best Gram and renormalize.
  eig.compute(best_gram);
  Eigen::VectorXd w = eig.eigenvalues().cwiseMax(0.0);
  const int rank = std::min(n, cols);
  Eigen::MatrixXd factor(rank, cols);
  for (int k = 0; k < rank; ++k) {
    int src = cols - 1 - k;  // eigenvalues ascend
    factor.row(k) = std::sqrt(w[src]) * eig.eigenvectors().col(src).transpose();
  }
  Eigen::MatrixXd atoms = Eigen::MatrixXd::Zero(n, cols);
  atoms.topRows(rank) = factor;

  DesignResult out;
  out.dict = normalize_columns(std::move(atoms), dims_label("designed", n, cols));
  out.achieved_coherence = coherence(out.dict);
  out.converged = converged;
  out.iterations = used;
  return out;
}

namespace {

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

constexpr char kMagic[8] = {'O', 'M', 'P', 'L', 'A', 'B', '0', '1'};

}  // namespace

void save_dictionary(const Dictionary& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  out.write(kMagic, 8);
  write_u64(out, static_cast<std::uint64_t>(d.rows()));
  write_u64(out, static_cast<std::uint64_t>(d.cols()));
  // column-major float64, which is Eigen's storage order
  out.write(reinterpret_cast<const char*>(d.atoms.data()),
            static_cast<std::streamsize>(sizeof(double)) * d.rows() * d.cols());
  write_u64(out, d.label.size());
  out.write(d.label.data(), static_cast<std::streamsize>(d.label.size()));
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

Dictionary load_dictionary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    fail(ErrorCode::IoError, path + " is not a dictionary file (bad magic)");
  std::uint64_t rows = read_u64(in);
  std::uint64_t cols = read_u64(in);
  if (!in || rows < 1 || cols < 2 || rows > (1u << 24) || cols > (1u << 24))
    fail(ErrorCode::IoError, "implausible dictionary dimensions in " + path);
  Dictionary d;
  d.atoms.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char*>(d.atoms.data()),
          static_cast<std::streamsize>(sizeof(double) * rows * cols));
  std::uint64_t label_len = read_u64(in);
  if (!in || label_len > (1u << 20)) fail(ErrorCode::IoError, "truncated file " + path);
  d.label.resize(label_len);
  in.read(d.label.data(), static_cast<std::streamsize>(label_len));
  if (!in) fail(ErrorCode::IoError, "truncated file " + path);
  d.validate();
  return d;
}

}  // namespace omplab
