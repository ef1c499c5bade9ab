#pragma once

#include <vector>

#include "qtm/dense.hpp"
#include "qtm/models.hpp"
#include "qtm/qtm_network.hpp"

namespace qtm {

struct TMRGConfig {
  int kept_states = 64;                       // bond dimension m
  double delta_beta = 0.025;
  std::vector<double> target_temperatures;    // descending; each 1/(M delta_beta)
  double truncation_floor = 1e-8;             // discarded-weight alarm threshold
  double gram_condition_limit = 1e8;          // biorthogonalization conditioning limit
  double eig_tol_sweep = 1e-9;                // Arnoldi tolerance between recorded points
  double eig_tol_record = 1e-12;              // Arnoldi tolerance at recorded points
  int krylov_dim = 24;
  int max_matvecs_per_step = 6000;
  bool spin_flip_projection = true;           // project onto the flip-even sector
  int mirror_audit_interval = 50;             // steps between T^T = R T R spot checks
};

struct TMRGPoint {
  double temperature = 0.0;
  double s_bar = 0.0;                 // symmetric-cut entropy
  double s_bar_complement = 0.0;      // same from the complementary half
  EntanglementSpectrum spectrum;      // symmetric cut, with sector labels when conserved
  double free_energy = 0.0;           // per site
  double discarded_weight = 0.0;
  int kept = 0;
  int trotter_m = 0;
  bool symmetrized_fallback = false;  // biorthogonalization fell back at this point
  bool quasi_degenerate = false;      // leading pair separation was marginal
};

/// Transfer-matrix DMRG sweep: grows the checkerboard column one plaquette
/// pair per step (M -> M+1, so T_M = 1/(M delta_beta) walks down a temperature
/// ladder) and truncates the auxiliary space to the dominant eigenstates of
/// the imaginary-time reduced density matrix. Points are emitted in
/// decreasing temperature order.
std::vector<TMRGPoint> tmrg_sweep(const SpinChainModel& model, const TMRGConfig& config);

struct TruncationResult {
  RMatrix right_projector;  // dim x kept
  RMatrix left_projector;   // dim x kept, left^T right = identity
  double discarded_weight = 0.0;
  int kept = 0;
  bool multiplet_audit_ok = true;   // kept set never splits a degenerate multiplet
  bool symmetrized_fallback = false;
};

/// Dominant-eigenstate truncation of a (generally nonsymmetric) reduced
/// density matrix. Degenerate multiplets are kept or discarded whole; under
/// ill-conditioned biorthogonalization the symmetrized matrix is used instead
/// and the result flagged.
TruncationResult truncate(const DenseOperator& rho_bar_a, int m, const TMRGConfig& config);
TruncationResult truncate_real(const RMatrix& rho, int m, const TMRGConfig& config);

}  // namespace qtm
