#pragma once

#include "qtm/dense.hpp"
#include "qtm/qtm_network.hpp"

namespace qtm {

/// The four temperature-dependent measures of the coupled-qubit demonstrator.
struct QubitMeasures {
  double temperature = 0.0;
  double s_pure = 0.0;       // entropy of |Psi_beta> reduced to one spin
  double s_canonical = 0.0;  // entropy of rho_c reduced to one spin (= ln 2)
  double mutual_info = 0.0;  // I_{A,B} = 2 s_canonical - S_th
  double s_bar = 0.0;        // imaginary-time-cut entropy
};

/// exp(-beta H)|up down>, normalized. Basis order: uu, ud, du, dd.
CVector imaginary_time_state(double beta);

double pure_state_entropy(double beta);

/// Fills s_canonical and mutual_info (and temperature).
QubitMeasures canonical_measures(double temperature);

/// Two-column network of the qubit pair: a column of shift plaquettes against
/// a column of tau plaquettes, tau = exp(-dbeta H), dbeta = beta/(plaquettes/2).
/// Returns the unnormalized rho_bar; its trace equals Z = Tr exp(-beta H).
DenseOperator build_rho_bar_qubits(double temperature, int plaquettes);

/// S_bar of the symmetric two-plaquette cut of the four-plaquette network.
double sbar_qubits(double temperature);

/// Same at an arbitrary even plaquette count (computed through the rank-1
/// projector form, so large counts stay cheap).
double sbar_qubits_at(double temperature, int plaquettes, int cut_start = 0);

/// All four measures at once.
QubitMeasures qubit_measures(double temperature);

}  // namespace qtm
