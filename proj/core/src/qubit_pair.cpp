#include "qtm/qubit_pair.hpp"

#include <cmath>
#include <sstream>

namespace qtm {

namespace {

// entropy of a small Hermitian density matrix, tolerant of tiny negatives
double density_entropy(const DenseOperator& rho) {
  const HermitianEig eig = hermitian_eig(rho, 1e-9);
  std::vector<double> w;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) w.push_back(std::max(0.0, eig.values(i)));
  return von_neumann_entropy(w);
}

// Apply a transposed even-layer gate sweep to a vector (helper for Psi_L).
void apply_even_layer_transposed(RVector& v, int n, int m, const Eigen::Matrix4d& gate_t) {
  const long dim = 1L << n;
  for (int k = 0; k < m; ++k) {
    const int a = 2 * k, b = 2 * k + 1;
    const long sa = 1L << (n - 1 - a), sb = 1L << (n - 1 - b);
    RVector out(dim);
    for (long base = 0; base < dim; ++base) {
      if ((base & sa) || (base & sb)) continue;
      const long i00 = base, i01 = base | sb, i10 = base | sa, i11 = base | sa | sb;
      const double v00 = v(i00), v01 = v(i01), v10 = v(i10), v11 = v(i11);
      out(i00) = gate_t(0, 0) * v00 + gate_t(0, 1) * v01 + gate_t(0, 2) * v10 + gate_t(0, 3) * v11;
      out(i01) = gate_t(1, 0) * v00 + gate_t(1, 1) * v01 + gate_t(1, 2) * v10 + gate_t(1, 3) * v11;
      out(i10) = gate_t(2, 0) * v00 + gate_t(2, 1) * v01 + gate_t(2, 2) * v10 + gate_t(2, 3) * v11;
      out(i11) = gate_t(3, 0) * v00 + gate_t(3, 1) * v01 + gate_t(3, 2) * v10 + gate_t(3, 3) * v11;
    }
    v.swap(out);
  }
}

// The qubit network T_o T_e has an exact rank-1 structure: T_o is the wiring
// projector |Phi><Phi|, so
//   Psi_R = Phi,  Lambda = Z = Tr tau^M,  Psi_L = T_e^T Phi / Z.
LeadingState qubit_leading_state(double temperature, int plaquettes) {
  detail::require(temperature > 0.0, "qubit network: temperature must be positive");
  if (plaquettes < 4 || plaquettes % 2 != 0) {
    std::ostringstream os;
    os << "qubit network: plaquette count " << plaquettes << " must be even and >= 4";
    detail::fail(os.str());
  }
  const int m = plaquettes / 2;
  const double beta = 1.0 / temperature;
  const TrotterGrid grid(beta / m, m);
  const QTMOperator net = QTMOperator::single_bond(SpinChainModel::heisenberg_pair(), grid);

  const int n = net.aux_sites();
  const long dim = 1L << n;
  RVector phi = RVector::Zero(dim);
  for (long i = 0; i < dim; ++i) {
    bool ok = true;
    for (int k = 0; k < m && ok; ++k) {
      const int a = 2 * k + 1, b = (2 * k + 2) % n;
      ok = (((i >> (n - 1 - a)) & 1L) == ((i >> (n - 1 - b)) & 1L));
    }
    if (ok) phi(i) = 1.0;
  }

  RVector chi = phi;
  apply_even_layer_transposed(chi, n, m, net.gate_even().transpose());

  const double z = chi.dot(phi);
  detail::require(z > 0.0, "qubit network: partition function not positive");

  LeadingState st;
  st.aux_sites = n;
  st.lambda_column = z;
  st.lambda_site = std::sqrt(z);
  st.psi_right = phi;
  st.psi_left = chi / z;
  st.residual = 0.0;
  return st;
}

}  // namespace

CVector imaginary_time_state(double beta) {
  const DenseOperator h = bond_hamiltonian(SpinChainModel::heisenberg_pair()).matrix;
  const HermitianEig eig = hermitian_eig(h);
  CVector start = CVector::Zero(4);
  start(1) = 1.0;  // |up down>
  // overflow-safe exp(-beta H): factor out the ground-state weight
  const double e0 = eig.values(0);
  CVector psi = CVector::Zero(4);
  for (Eigen::Index k = 0; k < 4; ++k) {
    const Complex amp = eig.vectors.col(k).dot(start);  // <k|start>
    psi += std::exp(-beta * (eig.values(k) - e0)) * amp * eig.vectors.col(k);
  }
  psi.normalize();
  return psi;
}

double pure_state_entropy(double beta) {
  const CVector psi = imaginary_time_state(beta);
  const CMatrix rho = psi * psi.adjoint();
  const DenseOperator red = partial_trace(DenseOperator(rho), {2, 2}, {0});
  return density_entropy(red);
}

QubitMeasures canonical_measures(double temperature) {
  detail::require(temperature > 0.0, "canonical_measures: temperature must be positive");
  const double beta = 1.0 / temperature;
  const DenseOperator h = bond_hamiltonian(SpinChainModel::heisenberg_pair()).matrix;
  const HermitianEig eig = hermitian_eig(h);

  // Boltzmann weights, overflow-safe
  RVector w(4);
  const double e0 = eig.values(0);
  for (int k = 0; k < 4; ++k) w(k) = std::exp(-beta * (eig.values(k) - e0));
  const double z = w.sum();
  w /= z;

  CMatrix rho_c = CMatrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k) rho_c += w(k) * (eig.vectors.col(k) * eig.vectors.col(k).adjoint());

  QubitMeasures m;
  m.temperature = temperature;
  m.s_canonical = density_entropy(partial_trace(DenseOperator(rho_c), {2, 2}, {0}));
  double s_th = 0.0;
  for (int k = 0; k < 4; ++k)
    if (w(k) > 0) s_th -= w(k) * std::log(w(k));
  m.mutual_info = 2.0 * m.s_canonical - s_th;
  return m;
}

DenseOperator build_rho_bar_qubits(double temperature, int plaquettes) {
  if (plaquettes % 2 != 0 || plaquettes < 4) {
    std::ostringstream os;
    os << "build_rho_bar_qubits: plaquette count " << plaquettes << " must be even and >= 4";
    detail::fail(os.str());
  }
  detail::require(plaquettes <= 12, "build_rho_bar_qubits: plaquette count too large to materialize");
  const int m = plaquettes / 2;
  const double beta = 1.0 / temperature;
  const TrotterGrid grid(beta / m, m);
  const QTMOperator net = QTMOperator::single_bond(SpinChainModel::heisenberg_pair(), grid);
  return DenseOperator(net.materialize());
}

double sbar_qubits_at(double temperature, int plaquettes, int cut_start) {
  const LeadingState st = qubit_leading_state(temperature, plaquettes);
  const AuxCut cut{cut_start, st.aux_sites / 2};
  const DenseOperator rho = rho_bar_reduced(st, cut);
  return entanglement_spectrum(rho).entropy;
}

double sbar_qubits(double temperature) { return sbar_qubits_at(temperature, 4, 0); }

QubitMeasures qubit_measures(double temperature) {
  QubitMeasures m = canonical_measures(temperature);
  m.s_pure = pure_state_entropy(1.0 / temperature);
  m.s_bar = sbar_qubits(temperature);
  return m;
}

}  // namespace qtm
