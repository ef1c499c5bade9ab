#include "qtm/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace qtm {

namespace detail {

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void require(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

}  // namespace detail

DenseOperator::DenseOperator(CMatrix m) : mat(std::move(m)) {
  detail::require(mat.rows() > 0 && mat.cols() > 0, "DenseOperator: dimensions must be positive");
}

DenseOperator::DenseOperator(RMatrix m) : DenseOperator(CMatrix(m.cast<Complex>())) {}

DenseOperator DenseOperator::identity(Eigen::Index n) {
  return DenseOperator(CMatrix(CMatrix::Identity(n, n)));
}

double DenseOperator::hermiticity_error() const {
  if (!is_square()) return std::numeric_limits<double>::infinity();
  return (mat - mat.adjoint()).cwiseAbs().maxCoeff();
}

bool DenseOperator::is_hermitian(double tol) const {
  return is_square() && hermiticity_error() <= tol;
}

bool DenseOperator::is_density_matrix(double tol) const {
  return is_hermitian(tol) && std::abs(trace() - Complex(1.0, 0.0)) <= tol;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

RMatrix kron(const RMatrix& a, const RMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
  return DenseOperator(kron(a.mat, b.mat));
}

DenseOperator partial_trace(const DenseOperator& op, const std::vector<int>& site_dims,
                            const std::vector<int>& keep) {
  detail::require(op.is_square(), "partial_trace: operator must be square");
  long total = 1;
  for (int d : site_dims) {
    detail::require(d > 0, "partial_trace: site dimensions must be positive");
    total *= d;
  }
  if (total != op.rows()) {
    std::ostringstream os;
    os << "partial_trace: dimension mismatch, product of site dims is " << total
       << " but operator is " << op.rows() << "x" << op.cols();
    detail::fail(os.str());
  }
  const int n = static_cast<int>(site_dims.size());
  std::vector<char> kept(n, 0);
  for (int k : keep) {
    detail::require(k >= 0 && k < n, "partial_trace: keep index out of range");
    kept[k] = 1;
  }

  long keep_dim = 1, tr_dim = 1;
  for (int s = 0; s < n; ++s) (kept[s] ? keep_dim : tr_dim) *= site_dims[s];

  // Decompose each full index into its kept / traced components once.
  const long dim = op.rows();
  std::vector<long> keep_of(dim), tr_of(dim);
  for (long i = 0; i < dim; ++i) {
    long rest = i, kc = 0, tc = 0;
    // site 0 is the most significant factor
    long stride = dim;
    for (int s = 0; s < n; ++s) {
      stride /= site_dims[s];
      const long digit = rest / stride;
      rest %= stride;
      if (kept[s])
        kc = kc * site_dims[s] + digit;
      else
        tc = tc * site_dims[s] + digit;
    }
    keep_of[i] = kc;
    tr_of[i] = tc;
  }

  std::vector<std::vector<long>> rows_by_tr(tr_dim);
  for (long i = 0; i < dim; ++i) rows_by_tr[tr_of[i]].push_back(i);

  CMatrix out = CMatrix::Zero(keep_dim, keep_dim);
  for (long t = 0; t < tr_dim; ++t) {
    const auto& idx = rows_by_tr[t];
    for (long i : idx)
      for (long j : idx) out(keep_of[i], keep_of[j]) += op.mat(i, j);
  }
  return DenseOperator(std::move(out));
}

HermitianEig hermitian_eig(const DenseOperator& op, double tol) {
  detail::require(op.is_square(), "hermitian_eig: operator must be square");
  const double herr = op.hermiticity_error();
  if (herr > tol) {
    std::ostringstream os;
    os << "hermitian_eig: operator not Hermitian, max |A - A^dag| = " << herr << " > " << tol;
    detail::fail(os.str());
  }
  CMatrix sym = (op.mat + op.mat.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  detail::require(es.info() == Eigen::Success, "hermitian_eig: solver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

DenseOperator matrix_exp_hermitian(const DenseOperator& h, double scale, double tol) {
  const HermitianEig eig = hermitian_eig(h, tol);
  RVector w = (scale * eig.values.array()).exp();
  CMatrix out = eig.vectors * w.asDiagonal() * eig.vectors.adjoint();
  return DenseOperator(std::move(out));
}

namespace {

void fix_phase_and_normalize(BiorthogonalPair& p) {
  Eigen::Index imax = 0;
  p.right.cwiseAbs().maxCoeff(&imax);
  const Complex piv = p.right(imax);
  if (std::abs(piv) > 0) p.right *= std::abs(piv) / piv;
  p.right.normalize();
  const Complex overlap = p.left.transpose() * p.right;
  detail::require(std::abs(overlap) > 1e-300, "leading_eigenpair: left/right vectors are bilinear-orthogonal");
  p.left /= overlap;
}

BiorthogonalPair leading_eigenpair_dense(const DenseOperator& op, double tol) {
  Eigen::ComplexEigenSolver<CMatrix> es(op.mat);
  detail::require(es.info() == Eigen::Success, "leading_eigenpair: dense solver failed");
  const CVector vals = es.eigenvalues();
  Eigen::Index i0 = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (std::abs(vals(i)) > best) {
      best = std::abs(vals(i));
      i0 = i;
    }
  double second = -1.0;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (i != i0) second = std::max(second, std::abs(vals(i)));

  if (vals.size() > 1) {
    const double gap = (best - second) / best;
    if (gap < tol) {
      std::ostringstream os;
      os << "leading_eigenpair: relative gap " << gap << " below tolerance " << tol
         << "; leading pair near-degenerate (criticality, or beta too large for this M)";
      throw NearDegenerateError(os.str(), gap);
    }
  }

  BiorthogonalPair p;
  p.lambda = vals(i0);
  p.right = es.eigenvectors().col(i0);
  if (second >= 0) p.subleading_modulus = second;

  // Left eigenvector: right eigenvector of A^T for the same eigenvalue.
  Eigen::ComplexEigenSolver<CMatrix> est(CMatrix(op.mat.transpose()));
  detail::require(est.info() == Eigen::Success, "leading_eigenpair: dense solver failed (transpose)");
  Eigen::Index j0 = 0;
  double bestmatch = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < est.eigenvalues().size(); ++i) {
    const double d = std::abs(est.eigenvalues()(i) - p.lambda);
    if (d < bestmatch) {
      bestmatch = d;
      j0 = i;
    }
  }
  p.left = est.eigenvectors().col(j0);
  fix_phase_and_normalize(p);

  const double scale = op.mat.norm();
  p.residual_right = (op.mat * p.right - p.lambda * p.right).norm() / std::max(1.0, scale);
  p.residual_left = (op.mat.transpose() * p.left - p.lambda * p.left).norm() /
                    (std::max(1.0, scale) * p.left.norm());
  return p;
}

BiorthogonalPair leading_eigenpair_power(const DenseOperator& op, double tol, int max_iter) {
  const Eigen::Index n = op.rows();
  CVector v = CVector::Ones(n) + 0.5 * CVector::Random(n);
  CVector w = CVector::Ones(n) + 0.5 * CVector::Random(n);
  v.normalize();
  w.normalize();
  const double scale = op.mat.norm();
  Complex lambda(0.0, 0.0);
  double resid = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iter; ++it) {
    v = op.mat * v;
    w = op.mat.transpose() * w;
    v.normalize();
    w.normalize();
    if (it % 5 == 0 || it == max_iter) {
      const Complex num = w.transpose() * (op.mat * v);
      const Complex den = w.transpose() * v;
      if (std::abs(den) < 1e-300) continue;  // re-biorthonormalization degenerate, keep iterating
      lambda = num / den;
      resid = (op.mat * v - lambda * v).norm() / std::max(1.0, scale);
      const double residl = (op.mat.transpose() * w - lambda * w).norm() / std::max(1.0, scale);
      if (resid <= tol && residl <= tol) {
        BiorthogonalPair p;
        p.lambda = lambda;
        p.right = v;
        p.left = w;
        p.iterations = it;
        fix_phase_and_normalize(p);
        p.residual_right = resid;
        p.residual_left = residl;
        return p;
      }
    }
  }
  std::ostringstream os;
  os << "leading_eigenpair: power iteration did not converge in " << max_iter
     << " iterations, last residual " << resid;
  throw ConvergenceError(os.str(), max_iter, resid);
}

}  // namespace

BiorthogonalPair leading_eigenpair_general(const DenseOperator& op, double tol, int max_iter,
                                           Eigen::Index dense_limit) {
  detail::require(op.is_square(), "leading_eigenpair: operator must be square");
  if (op.rows() <= dense_limit) return leading_eigenpair_dense(op, tol);
  return leading_eigenpair_power(op, tol, max_iter);
}

double von_neumann_entropy(const std::vector<double>& weights, const Tolerances& tol) {
  double sum = 0.0;
  for (double w : weights) {
    if (w < -tol.weight_clip) {
      std::ostringstream os;
      os << "von_neumann_entropy: negative weight " << w;
      detail::fail(os.str());
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > tol.weight_sum) {
    std::ostringstream os;
    os << "von_neumann_entropy: weights sum to " << sum << ", more than " << tol.weight_sum
       << " away from 1";
    detail::fail(os.str());
  }
  double s = 0.0;
  for (double w : weights) {
    const double p = w / sum;
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double von_neumann_entropy(const RVector& weights, const Tolerances& tol) {
  return von_neumann_entropy(std::vector<double>(weights.data(), weights.data() + weights.size()), tol);
}

CleanedSpectrum clean_real_spectrum(const CVector& values, const Tolerances& tol) {
  CleanedSpectrum out;
  double lead = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) lead = std::max(lead, std::abs(values(i)));
  const double cutoff = tol.spectrum_imag * std::max(lead, 1e-300);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i).imag()) > cutoff) out.offenders.push_back(values(i));
    out.values.push_back(values(i).real());
  }
  std::sort(out.values.begin(), out.values.end(), std::greater<double>());
  return out;
}

}  // namespace qtm
