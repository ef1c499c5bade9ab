#include "qtm/eigensolver.hpp"

#include <cmath>

namespace qtm {

namespace {

// Dominant Ritz pair of the k x k Hessenberg block. Returns false when the
// leading Ritz value has a significant imaginary part (conjugate pair).
bool dominant_ritz(const RMatrix& H, int k, double& theta, RVector& y, double& sub) {
  Eigen::EigenSolver<RMatrix> es(H.topLeftCorner(k, k));
  if (es.info() != Eigen::Success) return false;
  const CVector vals = es.eigenvalues();
  int i0 = 0;
  double best = -1.0;
  for (int i = 0; i < k; ++i)
    if (std::abs(vals(i)) > best) {
      best = std::abs(vals(i));
      i0 = i;
    }
  sub = 0.0;
  for (int i = 0; i < k; ++i) {
    if (i == i0) continue;
    // skip the conjugate partner of a complex pair
    if (std::abs(vals(i) - std::conj(vals(i0))) < 1e-12 * best && vals(i0).imag() != 0.0) continue;
    sub = std::max(sub, std::abs(vals(i)));
  }
  if (std::abs(vals(i0).imag()) > 1e-8 * std::max(best, 1e-300)) return false;
  theta = vals(i0).real();
  y = es.eigenvectors().col(i0).real();
  const double n = y.norm();
  if (n > 0) y /= n;
  return true;
}

}  // namespace

ArnoldiResult leading_eigenpair_arnoldi(const ApplyFn& apply, Eigen::Index dim,
                                        const RVector& guess, const ArnoldiOptions& opt) {
  ArnoldiResult res;
  const int kmax = std::max(2, opt.krylov_dim);

  RVector v0;
  if (guess.size() == dim && guess.norm() > 0)
    v0 = guess;
  else
    v0 = RVector::Ones(dim) + 0.1 * RVector::Random(dim);
  if (opt.project) opt.project(v0);
  v0.normalize();

  RMatrix V(dim, kmax + 1);
  RMatrix H = RMatrix::Zero(kmax + 1, kmax);

  while (res.matvecs < opt.max_matvecs) {
    V.col(0) = v0;
    int k = 0;
    bool exact_break = false;
    for (; k < kmax && res.matvecs < opt.max_matvecs; ++k) {
      RVector w = apply(V.col(k));
      ++res.matvecs;
      if (opt.project) opt.project(w);
      // modified Gram-Schmidt, two passes
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j <= k; ++j) {
          const double h = V.col(j).dot(w);
          w -= h * V.col(j);
          H(j, k) += h;
        }
      const double hnext = w.norm();
      H(k + 1, k) = hnext;
      if (hnext < 1e-14) {  // invariant subspace reached
        exact_break = true;
        ++k;
        break;
      }
      V.col(k + 1) = w / hnext;
    }
    if (k == 0) break;

    double theta = 0.0, sub = 0.0;
    RVector y;
    if (!dominant_ritz(H, k, theta, y, sub)) {
      res.status = ArnoldiStatus::complex_leading;
      // restart from a perturbed vector; a genuinely complex leading pair will
      // keep tripping this path until the matvec budget runs out
      v0 = V.col(0) + 0.05 * RVector::Random(dim);
      if (opt.project) opt.project(v0);
      v0.normalize();
      H.setZero();
      continue;
    }

    RVector ritz = V.leftCols(k) * y;
    ritz.normalize();
    const double resid_est = exact_break ? 0.0 : std::abs(H(k, k - 1) * y(k - 1));

    res.lambda = theta;
    res.vec = ritz;
    res.residual = resid_est / std::max(std::abs(theta), 1e-300);
    res.subleading_modulus = sub;
    if (res.residual <= opt.tol || exact_break) {
      res.status = ArnoldiStatus::ok;
      return res;
    }
    v0 = ritz;
    H.setZero();
  }
  if (res.vec.size() == 0) {
    res.vec = v0;
    res.status = ArnoldiStatus::max_matvecs;
  } else if (res.residual > opt.tol) {
    res.status = ArnoldiStatus::max_matvecs;
  }
  return res;
}

}  // namespace qtm
