#include "qtm/models.hpp"

#include <cmath>
#include <sstream>

namespace qtm {

namespace pauli {

CMatrix sx() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMatrix sy() {
  CMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

CMatrix sz() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

CMatrix id() { return CMatrix::Identity(2, 2); }

CMatrix swap() {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 2) = 1;
  m(2, 1) = 1;
  m(3, 3) = 1;
  return m;
}

}  // namespace pauli

SpinChainModel SpinChainModel::transverse_ising(double lambda, double j) {
  SpinChainModel m;
  m.kind = ModelKind::TransverseIsing;
  m.lambda = lambda;
  m.j_coupling = j;
  return m;
}

SpinChainModel SpinChainModel::xxz(double delta, double j) {
  SpinChainModel m;
  m.kind = ModelKind::XXZ;
  m.delta = delta;
  m.j_coupling = j;
  return m;
}

SpinChainModel SpinChainModel::heisenberg_pair() {
  SpinChainModel m;
  m.kind = ModelKind::HeisenbergPair;
  m.j_coupling = 1.0;
  return m;
}

std::string SpinChainModel::name() const {
  std::ostringstream os;
  switch (kind) {
    case ModelKind::TransverseIsing:
      os << "transverse-ising(lambda=" << lambda << ", J=" << j_coupling << ")";
      break;
    case ModelKind::XXZ:
      os << "xxz(delta=" << delta << ", J=" << j_coupling << ")";
      break;
    case ModelKind::HeisenbergPair:
      os << "heisenberg-pair(J=" << j_coupling << ")";
      break;
  }
  return os.str();
}

BondHamiltonian bond_hamiltonian(const SpinChainModel& model) {
  using namespace pauli;
  BondHamiltonian b;
  switch (model.kind) {
    case ModelKind::TransverseIsing: {
      // sigma^z sigma^z with the field split as lambda/2 per adjacent bond
      CMatrix h = kron(sz(), sz()) +
                  (model.lambda / 2.0) * (kron(sx(), id()) + kron(id(), sx()));
      b.matrix = DenseOperator(CMatrix(model.j_coupling * h));
      b.field_split = "transverse field lambda split symmetrically, lambda/2 per adjacent bond; "
                      "open ends completed in chain_hamiltonian";
      break;
    }
    case ModelKind::XXZ: {
      // spin operators S = sigma/2
      CMatrix h = 0.25 * (kron(sx(), sx()) + kron(sy(), sy()) + model.delta * kron(sz(), sz()));
      b.matrix = DenseOperator(CMatrix(model.j_coupling * h));
      b.field_split = "no single-site terms";
      break;
    }
    case ModelKind::HeisenbergPair: {
      // S1.S2 = P/2 - Id/4
      CMatrix h = 0.5 * swap() - 0.25 * CMatrix::Identity(4, 4);
      b.matrix = DenseOperator(CMatrix(model.j_coupling * h));
      b.field_split = "no single-site terms";
      break;
    }
    default:
      detail::fail("bond_hamiltonian: unknown model kind");
  }
  return b;
}

namespace {

// Embed a two-site operator on sites (i, j) of an L-site chain, i != j.
CMatrix embed_two_site(const CMatrix& op4, int length, int i, int j) {
  const long dim = 1L << length;
  CMatrix out = CMatrix::Zero(dim, dim);
  const long rest_dim = dim / 4;
  // enumerate the states of all other sites
  std::vector<int> others;
  for (int s = 0; s < length; ++s)
    if (s != i && s != j) others.push_back(s);
  for (long r = 0; r < rest_dim; ++r) {
    // place the bits of r on the `others` sites
    long base = 0;
    for (size_t t = 0; t < others.size(); ++t) {
      const long bt = (r >> (others.size() - 1 - t)) & 1L;
      base |= bt << (length - 1 - others[t]);
    }
    for (int a = 0; a < 4; ++a) {
      const long row = base | (long(a >> 1) << (length - 1 - i)) | (long(a & 1) << (length - 1 - j));
      for (int bcol = 0; bcol < 4; ++bcol) {
        const Complex v = op4(a, bcol);
        if (v == Complex(0.0, 0.0)) continue;
        const long col =
            base | (long(bcol >> 1) << (length - 1 - i)) | (long(bcol & 1) << (length - 1 - j));
        out(row, col) += v;
      }
    }
  }
  return out;
}

}  // namespace

DenseOperator chain_hamiltonian(const SpinChainModel& model, int length, Boundary boundary) {
  if (length < 2 || length > 14) {
    std::ostringstream os;
    os << "chain_hamiltonian: length " << length << " outside the dense range [2, 14]";
    detail::fail(os.str());
  }
  const CMatrix h = bond_hamiltonian(model).matrix.mat;
  const long dim = 1L << length;
  CMatrix H = CMatrix::Zero(dim, dim);
  const int nbonds = (boundary == Boundary::Periodic) ? length : length - 1;
  if (model.kind == ModelKind::HeisenbergPair && length != 2)
    detail::fail("chain_hamiltonian: HeisenbergPair is a two-site model");
  for (int bidx = 0; bidx < nbonds; ++bidx) H += embed_two_site(h, length, bidx, (bidx + 1) % length);
  if (boundary == Boundary::Open && model.kind == ModelKind::TransverseIsing) {
    // complete the split field at the two chain ends
    const CMatrix fx = model.j_coupling * (model.lambda / 2.0) * pauli::sx();
    H += embed_two_site(kron(fx, pauli::id()), length, 0, 1);
    H += embed_two_site(kron(pauli::id(), fx), length, length - 2, length - 1);
  }
  return DenseOperator(std::move(H));
}

int sz_alternating_charge(const std::vector<double>& aux_config) {
  if (aux_config.size() % 2 != 0)
    detail::fail("sz_alternating_charge: configuration length must be even");
  long q2 = 0;
  for (size_t k = 0; k < aux_config.size(); ++k) {
    const double s = aux_config[k];
    if (std::abs(std::abs(s) - 0.5) > 1e-12)
      detail::fail("sz_alternating_charge: entries must be +1/2 or -1/2");
    const int sign = (k % 2 == 0) ? 1 : -1;
    q2 += sign * (s > 0 ? 1 : -1);
  }
  return static_cast<int>(q2);
}

}  // namespace qtm
