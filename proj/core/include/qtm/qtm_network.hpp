#pragma once

#include <optional>

#include "qtm/dense.hpp"
#include "qtm/models.hpp"

namespace qtm {

/// Imaginary-time discretization: beta = M * delta_beta.
struct TrotterGrid {
  double delta_beta = 0.0;
  int trotter_m = 0;
  double beta = 0.0;
  double temperature = 0.0;

  TrotterGrid() = default;
  TrotterGrid(double dbeta, int m);
  /// M chosen so that 1/(M*dbeta) hits `t` exactly (within 1e-9 relative).
  static TrotterGrid for_temperature(double dbeta, double t);
};

// ---------------------------------------------------------------------------
// Index conventions of the checkerboard network.
//
// The partition function of a periodic chain of L sites is Trotterized
// row-to-row as Z = Tr[(V_e V_o)^M] with V_e = prod_{j even} tau_{j,j+1},
// V_o = prod_{j odd} tau_{j,j+1} and tau = exp(-dbeta h). Every application
// of V_e or V_o adds one row of plaquettes, so the space-time lattice carries
// 2M rows of spins per site column and the plaquettes tile it like a
// checkerboard: bond (j, j+1) carries plaquettes at rows r with r = j (mod 2).
//
// A plaquette at rows (r, r+1) between site columns (j, j+1) is
//
//        s_{r+1} --- u_{r+1}        top    = row r+1
//           |  tau  |               bottom = row r
//        s_r ------- u_r            s = column j, u = column j+1
//
// with amplitude tau(t1 t2 | b1 b2) = <t1 t2| exp(-dbeta h) |b1 b2>,
// t1 = s_{r+1}, t2 = u_{r+1}, b1 = s_r, b2 = u_r.
//
// Read horizontally the plaquette becomes a gate on two adjacent sites of the
// auxiliary (imaginary-time) ring of 2M sites:
//
//   g[(u_r u_{r+1}), (s_r s_{r+1})] = tau[(s_{r+1} u_{r+1}), (s_r u_r)]
//
// One column transfer matrix covers TWO physical sites and consists of the
// M even-row gates (pairs (2k, 2k+1), the tau_R plaquettes) followed by the
// M odd-row gates (pairs (2k+1, 2k+2 mod 2M), the tau_L plaquettes):
//
//   T = T_o * T_e,   Tr(T^{L/2}) = Z_row(L)   exactly.
//
// Its leading eigenvalue Lambda_col therefore describes two sites; the
// per-site value is lambda_site = sqrt(Lambda_col) and the free energy per
// site is f = -T ln(lambda_site). Auxiliary ring states are indexed with
// row 0 as the most significant bit, bit 0 = spin up.
// ---------------------------------------------------------------------------

/// Rotated plaquette tau_{R,L} = T_{R,L} exp(-dbeta h) as a two-site operator
/// (the R/L distinction is the checkerboard placement, the tensor is shared).
enum class PlaquetteOrientation { R, L };
struct Plaquette {
  Eigen::Matrix4d shifted;  // SWAP * exp(-dbeta h), the operator form
  Eigen::Matrix4d gate;     // checkerboard gate g, see diagram above
  PlaquetteOrientation orientation;
  double delta_beta;
};
Plaquette plaquette(const BondHamiltonian& bond, double delta_beta, PlaquetteOrientation o);

/// Quantum transfer matrix of the checkerboard column at fixed Trotter number.
/// Stored in gate form; materialized on demand for small dimensions.
class QTMOperator {
 public:
  QTMOperator(const SpinChainModel& model, const TrotterGrid& grid);
  /// Network of a single bond evolving in imaginary time (coupled qubits):
  /// the odd layer degenerates to identity plaquettes (pure shifts).
  static QTMOperator single_bond(const SpinChainModel& model, const TrotterGrid& grid);

  int aux_sites() const { return 2 * grid.trotter_m; }
  Eigen::Index dim() const { return Eigen::Index(1) << aux_sites(); }

  RVector apply(const RVector& v) const;            // T_o T_e v
  RVector apply_transpose(const RVector& v) const;  // (T_o T_e)^T v
  RVector apply_even_layer(const RVector& v) const; // T_e v
  RVector apply_odd_layer(const RVector& v) const;  // T_o v

  const RMatrix& materialize() const;  // cached; dimension capped
  /// Tr(T^{L/2}) = row-to-row Trotter partition function of the periodic
  /// L-site chain (L even).
  double partition_function_trace(int chain_length) const;

  const Eigen::Matrix4d& gate_even() const { return gate_e_; }
  const Eigen::Matrix4d& gate_odd() const { return gate_o_; }

  SpinChainModel model;
  TrotterGrid grid;

 private:
  QTMOperator() = default;
  Eigen::Matrix4d gate_e_, gate_o_;
  mutable RMatrix dense_;  // lazily materialized
};

QTMOperator build_qtm(const SpinChainModel& model, const TrotterGrid& grid,
                      Eigen::Index max_dim = Eigen::Index(1) << 16);

/// Leading eigenpair of the QTM column with the per-site normalization.
struct LeadingState {
  double lambda_column = 0.0;  // eigenvalue of the two-site column
  double lambda_site = 0.0;    // sqrt(lambda_column), per physical site
  RVector psi_right, psi_left; // psi_left^T psi_right = 1
  double residual = 0.0;
  int aux_sites = 0;
  std::optional<double> subleading_modulus;   // column normalization
  std::optional<double> correlation_length;   // per-site units
};
LeadingState leading_state(const QTMOperator& qtm, double tol = 1e-12);

/// Free energy per site, f = -T ln(lambda_site).
double free_energy(const LeadingState& state, const TrotterGrid& grid);

/// Contiguous cut of the auxiliary ring: rows [start, start+count) mod 2M.
struct AuxCut {
  int start = 0;
  int count = 0;
};

/// rho_bar_A = Tr_complement |Psi_R><Psi_L|; trace 1 by the eigenvector
/// normalization. The cut must contain an even number of auxiliary sites so
/// that it holds as many right- as left-leaning plaquettes.
DenseOperator rho_bar_reduced(const LeadingState& state, AuxCut cut);

struct EntanglementSpectrum {
  std::vector<double> weights;  // descending, sum 1
  std::vector<int> labels;      // alternating-Sz sector per weight; empty if unlabeled
  double entropy = 0.0;
};

/// Eigenvalues of a (generally nonsymmetric) reduced density matrix, cleaned
/// per the linalg policy, clipped at -1e-12, renormalized and sorted. When
/// `basis_charges` is given the matrix is block-diagonalized by charge and
/// every weight carries its sector label.
EntanglementSpectrum entanglement_spectrum(const DenseOperator& rho_bar_a,
                                           const std::vector<int>* basis_charges = nullptr,
                                           const Tolerances& tol = {});

/// Alternating charge 2*sum_r (-1)^r s_r for every basis state of an
/// auxiliary ring of `aux_sites` rows.
std::vector<int> ring_alternating_charges(int aux_sites);
/// Same, restricted to the rows of a cut (labels for rho_bar_A of that cut).
std::vector<int> cut_alternating_charges(int aux_sites, AuxCut cut);

/// Row-to-row Trotter partition function Tr[(V_e V_o)^M] of the periodic
/// L-site chain (dense; L <= 12).
double trotter_partition_function_row(const SpinChainModel& model, int length,
                                      const TrotterGrid& grid);

}  // namespace qtm
