#pragma once

#include <vector>

#include "qtm/dense.hpp"
#include "qtm/models.hpp"
#include "qtm/qtm_network.hpp"

namespace qtm {

/// Canonical thermal state of a finite chain, exact dense construction.
struct ThermalState {
  SpinChainModel model;
  int length = 0;
  Boundary boundary = Boundary::Periodic;
  double temperature = 0.0;
  DenseOperator hamiltonian;
  DenseOperator rho_c;  // exp(-H/T)/Z, trace 1
  double partition_function = 0.0;
  RVector energies;  // ascending
};

ThermalState thermal_state(const SpinChainModel& model, int length, Boundary boundary,
                           double temperature);

struct SpatialMeasures {
  double s_a = 0.0;          // entropy of Tr_B rho_c
  double s_b = 0.0;          // entropy of Tr_A rho_c
  double s_th = 0.0;         // thermal entropy of the whole chain
  double mutual_info = 0.0;  // s_a + s_b - s_th
};

/// Entropies for a contiguous (or any) site region A and its complement.
SpatialMeasures spatial_measures(const ThermalState& state, const std::vector<int>& region);

struct TrotterErrorPoint {
  double delta_beta = 0.0;
  double relative_error = 0.0;  // |Z_trotter - Z_exact| / Z_exact
};
struct TrotterErrorStudy {
  std::vector<TrotterErrorPoint> points;
  double fitted_exponent = 0.0;  // power-law exponent of error vs delta_beta
};

/// Relative Trotter error of the row-to-row checkerboard partition function
/// against the exact Z, for each step size (beta/delta_beta must be integral).
TrotterErrorStudy trotter_error_study(const SpinChainModel& model, int length, double temperature,
                                      const std::vector<double>& delta_beta_list);

}  // namespace qtm
