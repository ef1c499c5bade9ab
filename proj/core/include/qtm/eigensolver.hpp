#pragma once

#include <functional>

#include "qtm/dense.hpp"

namespace qtm {

/// Matrix-free leading-eigenpair solver for real operators with a real,
/// positive, separated leading eigenvalue (transfer matrices). Implicitly
/// restarted Arnoldi: build a Krylov basis, take the dominant Ritz pair,
/// restart from it until the residual estimate passes.
struct ArnoldiOptions {
  double tol = 1e-12;  // residual relative to |lambda|
  int krylov_dim = 24;
  int max_matvecs = 4000;
  // Optional in-place symmetry projector applied after every matvec; used to
  // pin the iteration to a symmetry sector (e.g. spin-flip even).
  std::function<void(RVector&)> project;
};

enum class ArnoldiStatus { ok, max_matvecs, complex_leading };

struct ArnoldiResult {
  double lambda = 0.0;
  RVector vec;
  double residual = 0.0;
  int matvecs = 0;
  double subleading_modulus = 0.0;  // best Ritz estimate, 0 if unavailable
  ArnoldiStatus status = ArnoldiStatus::ok;
};

using ApplyFn = std::function<RVector(const RVector&)>;

ArnoldiResult leading_eigenpair_arnoldi(const ApplyFn& apply, Eigen::Index dim,
                                        const RVector& guess, const ArnoldiOptions& opt = {});

}  // namespace qtm
