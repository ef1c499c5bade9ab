#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qtm/models.hpp"

namespace qtm {

enum class PhaseTag { IsingOrdered, IsingDisordered, XXZMassive };

/// Single-particle levels of the corner-transfer-matrix entanglement
/// Hamiltonian H = sum_j eps_j n_j, with the orbital degeneracy per level.
struct FreeFermionSpectrum {
  std::vector<double> levels;            // ascending
  std::vector<int> orbital_degeneracy;   // 1 or 2
  PhaseTag phase = PhaseTag::IsingOrdered;
  double spacing_unit = 0.0;             // the elementary level spacing
};

/// Levels from the closed-form expressions:
///   lambda > 1: eps_j = (2j+1) pi K(sqrt(1-1/lambda^2)) / K(1/lambda), all twofold
///   lambda < 1: eps_j = j pi K(sqrt(1-lambda^2)) / K(lambda), eps_0 single, rest twofold
///   Delta > 1:  eps_j = 2 j arccosh(Delta), same degeneracies as lambda < 1
FreeFermionSpectrum single_particle_levels(const SpinChainModel& model, int count);

/// Distinct many-body energies with multiplicities, enumerating occupations
/// n_j in {0..orbital_degeneracy} up to the energy cutoff.
std::vector<std::pair<double, long>> many_body_spectrum(const FreeFermionSpectrum& levels,
                                                        double energy_cutoff,
                                                        long state_budget = 4000000);

/// S_bar(T -> 0) from the levels: per fermionic orbital
/// ln(1+e^-eps) + eps e^-eps/(1+e^-eps), which is ln 2 for a zero mode.
double entropy_from_levels(const FreeFermionSpectrum& levels);

struct ScalingFit {
  double central_charge = 0.0;   // -3 * slope of s_bar vs ln T
  double intercept = 0.0;        // (c/3) ln v + C1
  std::optional<double> c1;      // resolved only when a velocity is supplied
  double residual = 0.0;         // rms deviation of the fit
};

/// Least squares of s_bar against ln T; (temperature, s_bar) points.
ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points,
                       std::optional<double> velocity = std::nullopt);

/// Spinon velocity of the critical XXZ chain, v = J pi sqrt(1-Delta^2)/(2 arccos Delta),
/// with the Delta -> 1 limit J pi/2 taken analytically.
double bethe_velocity(double delta, double j = 1.0);

}  // namespace qtm
