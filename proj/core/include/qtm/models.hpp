#pragma once

#include <string>
#include <vector>

#include "qtm/dense.hpp"

namespace qtm {

enum class ModelKind { TransverseIsing, XXZ, HeisenbergPair };
enum class Boundary { Open, Periodic };

/// Spin-1/2 chain model. Exactly the parameters relevant to `kind` are set;
/// use the factory functions.
struct SpinChainModel {
  ModelKind kind = ModelKind::HeisenbergPair;
  double lambda = 0.0;     // transverse field (TransverseIsing only)
  double delta = 0.0;      // exchange anisotropy (XXZ only)
  double j_coupling = 1.0; // overall scale J

  static SpinChainModel transverse_ising(double lambda, double j = 1.0);
  static SpinChainModel xxz(double delta, double j = 1.0);
  static SpinChainModel heisenberg_pair();

  int site_dim() const { return 2; }
  /// Total Sz (alternating charge on the QTM ring) is conserved.
  bool conserves_sz() const { return kind != ModelKind::TransverseIsing; }
  std::string name() const;
};

/// Two-site bond term h_{j,j+1}, with single-site fields already shared
/// between adjacent bonds so that summing bonds over a periodic chain
/// reproduces the full Hamiltonian exactly.
struct BondHamiltonian {
  DenseOperator matrix;  // 4x4 Hermitian
  std::string field_split;
};

BondHamiltonian bond_hamiltonian(const SpinChainModel& model);

/// Dense Hamiltonian of a chain of `length` sites (2 <= length <= 14). For
/// open boundaries the split single-site fields at the two ends are completed.
DenseOperator chain_hamiltonian(const SpinChainModel& model, int length, Boundary boundary);

/// Alternating quantum number 2 * sum_k (-1)^k s_k for a configuration of spin
/// projections (+1/2 or -1/2, even length). Integer-valued.
int sz_alternating_charge(const std::vector<double>& aux_config);

// Pauli matrices and the two-site swap, as building blocks.
namespace pauli {
CMatrix sx();
CMatrix sy();
CMatrix sz();
CMatrix id();
CMatrix swap();  // 4x4 permutation of two sites
}  // namespace pauli

}  // namespace qtm
