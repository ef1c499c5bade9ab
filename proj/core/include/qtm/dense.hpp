#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtm {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Raised when a leading eigenpair cannot be separated from the subleading one.
/// For a QTM this usually means criticality or a temperature too low for the
/// current Trotter number.
class NearDegenerateError : public std::runtime_error {
 public:
  NearDegenerateError(const std::string& msg, double gap) : std::runtime_error(msg), relative_gap(gap) {}
  double relative_gap;
};

/// Raised when an iterative solver exhausts its budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& msg, int iters, double resid)
      : std::runtime_error(msg), iterations(iters), last_residual(resid) {}
  int iterations;
  double last_residual;
};

/// Default tolerances of the numerical kernels. All of them can be overridden
/// per call where it matters.
struct Tolerances {
  double hermiticity = 1e-10;    // max elementwise |A - A^dag|
  double spectrum_imag = 1e-10;  // imaginary part cutoff, relative to leading modulus
  double weight_clip = 1e-12;    // negative entanglement weights below this are rejected
  double weight_sum = 1e-6;      // allowed deviation of a weight sum from 1
  double density_trace = 1e-10;  // trace deviation for density-matrix checks
};

/// Dense complex matrix with explicit dimensions; the universal carrier for
/// Hamiltonians, density matrices and transfer operators.
struct DenseOperator {
  CMatrix mat;

  DenseOperator() = default;
  explicit DenseOperator(CMatrix m);
  explicit DenseOperator(RMatrix m);

  static DenseOperator identity(Eigen::Index n);

  Eigen::Index rows() const { return mat.rows(); }
  Eigen::Index cols() const { return mat.cols(); }
  bool is_square() const { return mat.rows() == mat.cols(); }

  Complex trace() const { return mat.trace(); }
  double hermiticity_error() const;  // max elementwise |A - A^dag|
  bool is_hermitian(double tol = Tolerances{}.hermiticity) const;
  // trace = 1 and Hermitian, both within tol
  bool is_density_matrix(double tol = Tolerances{}.density_trace) const;
};

/// Eigenvalues sorted by descending modulus.
struct Spectrum {
  CVector values;
  bool hermitian_flag = false;
};

struct HermitianEig {
  RVector values;   // ascending
  CMatrix vectors;  // orthonormal columns
};

/// Leading eigenvalue with right/left eigenvectors, normalized to the bilinear
/// pairing left^T right = 1; the largest-modulus component of `right` is made
/// real positive.
struct BiorthogonalPair {
  Complex lambda{0.0, 0.0};
  CVector right, left;
  double residual_right = 0.0, residual_left = 0.0;
  int iterations = 0;
  std::optional<double> subleading_modulus;  // available on the dense path
};

DenseOperator kron(const DenseOperator& a, const DenseOperator& b);
CMatrix kron(const CMatrix& a, const CMatrix& b);
RMatrix kron(const RMatrix& a, const RMatrix& b);

/// Partial trace over the sites not in `keep`. `site_dims` lists the local
/// dimensions with site 0 the most significant index factor (kron order).
DenseOperator partial_trace(const DenseOperator& op, const std::vector<int>& site_dims,
                            const std::vector<int>& keep);

HermitianEig hermitian_eig(const DenseOperator& op, double tol = Tolerances{}.hermiticity);

/// exp(scale*h) for Hermitian h, via eigendecomposition.
DenseOperator matrix_exp_hermitian(const DenseOperator& h, double scale,
                                   double tol = Tolerances{}.hermiticity);

/// Leading eigenpair of a general square operator. Dense Schur decomposition up
/// to `dense_limit`, two-sided power iteration with periodic renormalization
/// above it. The relative gap to the subleading eigenvalue is checked
/// a posteriori on the dense path; a gap below `tol` raises NearDegenerateError.
BiorthogonalPair leading_eigenpair_general(const DenseOperator& op, double tol = 1e-10,
                                           int max_iter = 10000, Eigen::Index dense_limit = 4096);

/// -sum w ln w with 0 ln 0 = 0. Weights must be >= -weight_clip and sum to 1
/// within weight_sum (they are renormalized internally).
double von_neumann_entropy(const std::vector<double>& weights, const Tolerances& tol = {});
double von_neumann_entropy(const RVector& weights, const Tolerances& tol = {});

/// Cleanup policy for spectra that are real on physical grounds: imaginary
/// parts below spectrum_imag * (leading modulus) are dropped; larger ones are
/// reported in `offenders`, never silently discarded.
struct CleanedSpectrum {
  std::vector<double> values;     // real parts, descending
  std::vector<Complex> offenders; // eigenvalues whose imaginary part exceeded the cutoff
};
CleanedSpectrum clean_real_spectrum(const CVector& values, const Tolerances& tol = {});

namespace detail {
[[noreturn]] void fail(const std::string& msg);
void require(bool cond, const std::string& msg);
}  // namespace detail

}  // namespace qtm
