#include "qtm/qtm_network.hpp"

#include <cmath>
#include <sstream>

#include "qtm/eigensolver.hpp"

namespace qtm {

TrotterGrid::TrotterGrid(double dbeta, int m) {
  detail::require(dbeta > 0.0, "TrotterGrid: delta_beta must be positive");
  detail::require(m > 0, "TrotterGrid: Trotter number must be positive");
  delta_beta = dbeta;
  trotter_m = m;
  beta = dbeta * m;
  temperature = 1.0 / beta;
}

TrotterGrid TrotterGrid::for_temperature(double dbeta, double t) {
  detail::require(t > 0.0, "TrotterGrid: temperature must be positive");
  const double m_real = 1.0 / (t * dbeta);
  const int m = static_cast<int>(std::lround(m_real));
  if (m < 1 || std::abs(m_real - m) > 1e-9 * m_real) {
    std::ostringstream os;
    os << "TrotterGrid: temperature " << t << " is not 1/(M*delta_beta) for integer M at delta_beta "
       << dbeta;
    detail::fail(os.str());
  }
  return TrotterGrid(dbeta, m);
}

namespace {

Eigen::Matrix4d real_exp_bond(const BondHamiltonian& bond, double delta_beta) {
  detail::require(bond.matrix.rows() == 4 && bond.matrix.cols() == 4,
                  "plaquette: bond must be 4x4");
  const DenseOperator tau = matrix_exp_hermitian(bond.matrix, -delta_beta);
  detail::require(tau.mat.imag().cwiseAbs().maxCoeff() < 1e-13,
                  "plaquette: bond exponential expected to be real");
  return tau.mat.real();
}

// g[(u_r u_{r+1}), (s_r s_{r+1})] = tau[(s_{r+1} u_{r+1}), (s_r u_r)]
Eigen::Matrix4d checkerboard_gate(const Eigen::Matrix4d& tau) {
  Eigen::Matrix4d g;
  for (int u0 = 0; u0 < 2; ++u0)
    for (int u1 = 0; u1 < 2; ++u1)
      for (int s0 = 0; s0 < 2; ++s0)
        for (int s1 = 0; s1 < 2; ++s1) g(u0 * 2 + u1, s0 * 2 + s1) = tau(s1 * 2 + u1, s0 * 2 + u0);
  return g;
}

Eigen::Matrix4d swap4() {
  Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
  p(0, 0) = p(1, 2) = p(2, 1) = p(3, 3) = 1.0;
  return p;
}

// Apply a two-site gate on ring sites (a, b) of an n-site register,
// w[.. x_a x_b ..] = sum g[(x_a x_b), (y_a y_b)] v[.. y_a y_b ..].
// Site 0 is the most significant bit.
void apply_gate_inplace(RVector& v, int n, int a, int b, const Eigen::Matrix4d& g) {
  const long dim = 1L << n;
  const long sa = 1L << (n - 1 - a);
  const long sb = 1L << (n - 1 - b);
  RVector out(dim);
  for (long base = 0; base < dim; ++base) {
    if ((base & sa) || (base & sb)) continue;
    const long i00 = base, i01 = base | sb, i10 = base | sa, i11 = base | sa | sb;
    const double v00 = v(i00), v01 = v(i01), v10 = v(i10), v11 = v(i11);
    out(i00) = g(0, 0) * v00 + g(0, 1) * v01 + g(0, 2) * v10 + g(0, 3) * v11;
    out(i01) = g(1, 0) * v00 + g(1, 1) * v01 + g(1, 2) * v10 + g(1, 3) * v11;
    out(i10) = g(2, 0) * v00 + g(2, 1) * v01 + g(2, 2) * v10 + g(2, 3) * v11;
    out(i11) = g(3, 0) * v00 + g(3, 1) * v01 + g(3, 2) * v10 + g(3, 3) * v11;
  }
  v.swap(out);
}

}  // namespace

Plaquette plaquette(const BondHamiltonian& bond, double delta_beta, PlaquetteOrientation o) {
  detail::require(delta_beta >= 0.0, "plaquette: delta_beta must be >= 0");
  Plaquette p;
  const Eigen::Matrix4d tau = real_exp_bond(bond, delta_beta);
  p.shifted = swap4() * tau;
  p.gate = checkerboard_gate(tau);
  p.orientation = o;
  p.delta_beta = delta_beta;
  return p;
}

QTMOperator::QTMOperator(const SpinChainModel& m, const TrotterGrid& g) : model(m), grid(g) {
  const Eigen::Matrix4d tau = real_exp_bond(bond_hamiltonian(m), g.delta_beta);
  gate_e_ = checkerboard_gate(tau);
  gate_o_ = gate_e_;
}

QTMOperator QTMOperator::single_bond(const SpinChainModel& m, const TrotterGrid& g) {
  QTMOperator q;
  q.model = m;
  q.grid = g;
  const Eigen::Matrix4d tau = real_exp_bond(bond_hamiltonian(m), g.delta_beta);
  q.gate_e_ = checkerboard_gate(tau);
  q.gate_o_ = checkerboard_gate(Eigen::Matrix4d::Identity());
  return q;
}

RVector QTMOperator::apply_even_layer(const RVector& v) const {
  const int n = aux_sites();
  RVector w = v;
  for (int k = 0; k < grid.trotter_m; ++k) apply_gate_inplace(w, n, 2 * k, 2 * k + 1, gate_e_);
  return w;
}

RVector QTMOperator::apply_odd_layer(const RVector& v) const {
  const int n = aux_sites();
  RVector w = v;
  for (int k = 0; k < grid.trotter_m; ++k)
    apply_gate_inplace(w, n, 2 * k + 1, (2 * k + 2) % n, gate_o_);
  return w;
}

RVector QTMOperator::apply(const RVector& v) const { return apply_odd_layer(apply_even_layer(v)); }

RVector QTMOperator::apply_transpose(const RVector& v) const {
  const int n = aux_sites();
  RVector w = v;
  const Eigen::Matrix4d get = gate_o_.transpose();
  for (int k = 0; k < grid.trotter_m; ++k)
    apply_gate_inplace(w, n, 2 * k + 1, (2 * k + 2) % n, get);
  const Eigen::Matrix4d gee = gate_e_.transpose();
  for (int k = 0; k < grid.trotter_m; ++k) apply_gate_inplace(w, n, 2 * k, 2 * k + 1, gee);
  return w;
}

const RMatrix& QTMOperator::materialize() const {
  if (dense_.size() == 0) {
    const Eigen::Index d = dim();
    detail::require(d <= 4096, "QTMOperator::materialize: dimension too large, use the gate form");
    dense_.resize(d, d);
    RVector e = RVector::Zero(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      e(j) = 1.0;
      dense_.col(j) = apply(e);
      e(j) = 0.0;
    }
  }
  return dense_;
}

double QTMOperator::partition_function_trace(int chain_length) const {
  detail::require(chain_length >= 2 && chain_length % 2 == 0,
                  "partition_function_trace: chain length must be even and >= 2");
  const RMatrix& t = materialize();
  RMatrix p = t;
  for (int k = 1; k < chain_length / 2; ++k) p = p * t;
  return p.trace();
}

QTMOperator build_qtm(const SpinChainModel& model, const TrotterGrid& grid, Eigen::Index max_dim) {
  const Eigen::Index d = Eigen::Index(1) << (2 * grid.trotter_m);
  if (d > max_dim) {
    std::ostringstream os;
    os << "build_qtm: auxiliary dimension 2^" << 2 * grid.trotter_m << " exceeds the budget "
       << max_dim << "; reduce M to " << static_cast<int>(std::log2(double(max_dim)) / 2);
    detail::fail(os.str());
  }
  return QTMOperator(model, grid);
}

LeadingState leading_state(const QTMOperator& qtm, double tol) {
  ArnoldiOptions opt;
  opt.tol = tol;
  opt.krylov_dim = static_cast<int>(std::min<Eigen::Index>(30, qtm.dim()));
  opt.max_matvecs = 20000;

  const ApplyFn fwd = [&qtm](const RVector& v) { return qtm.apply(v); };
  const ApplyFn bwd = [&qtm](const RVector& v) { return qtm.apply_transpose(v); };

  ArnoldiResult right = leading_eigenpair_arnoldi(fwd, qtm.dim(), RVector(), opt);
  if (right.status == ArnoldiStatus::max_matvecs)
    throw ConvergenceError("leading_state: right eigenvector did not converge", right.matvecs,
                           right.residual);
  if (right.status == ArnoldiStatus::complex_leading)
    throw NearDegenerateError("leading_state: leading eigenvalue appears complex", 0.0);
  ArnoldiResult left = leading_eigenpair_arnoldi(bwd, qtm.dim(), right.vec, opt);
  if (left.status == ArnoldiStatus::max_matvecs)
    throw ConvergenceError("leading_state: left eigenvector did not converge", left.matvecs,
                           left.residual);
  if (left.status == ArnoldiStatus::complex_leading)
    throw NearDegenerateError("leading_state: leading eigenvalue appears complex (transpose)", 0.0);

  LeadingState st;
  st.lambda_column = right.lambda;
  detail::require(right.lambda > 0.0, "leading_state: leading eigenvalue not positive");
  st.lambda_site = std::sqrt(right.lambda);
  st.aux_sites = qtm.aux_sites();
  st.residual = std::max(right.residual, left.residual);

  RVector r = right.vec, l = left.vec;
  Eigen::Index imax = 0;
  r.cwiseAbs().maxCoeff(&imax);
  if (r(imax) < 0) r = -r;
  const double overlap = l.dot(r);
  detail::require(std::abs(overlap) > 1e-14,
                  "leading_state: left/right eigenvectors nearly orthogonal");
  l /= overlap;
  st.psi_right = std::move(r);
  st.psi_left = std::move(l);

  if (right.subleading_modulus > 0.0 && right.subleading_modulus < right.lambda) {
    st.subleading_modulus = right.subleading_modulus;
    const double ratio_site = std::sqrt(right.subleading_modulus / right.lambda);
    if (ratio_site < 1.0) st.correlation_length = -1.0 / std::log(ratio_site);
  }
  return st;
}

double free_energy(const LeadingState& state, const TrotterGrid& grid) {
  if (!(state.lambda_site > 0.0)) {
    std::ostringstream os;
    os << "free_energy: nonpositive leading eigenvalue " << state.lambda_column
       << " (bad convergence or sign problem)";
    throw std::runtime_error(os.str());
  }
  return -grid.temperature * std::log(state.lambda_site);
}

DenseOperator rho_bar_reduced(const LeadingState& state, AuxCut cut) {
  const int n = state.aux_sites;
  detail::require(cut.count > 0 && cut.count <= n, "rho_bar_reduced: cut size out of range");
  if (cut.count % 2 != 0)
    detail::fail("rho_bar_reduced: cut must contain an even number of auxiliary sites "
                 "(plaquette pairing)");
  detail::require(cut.start >= 0 && cut.start < n, "rho_bar_reduced: cut start out of range");

  const long dim = 1L << n;
  const long da = 1L << cut.count;
  const long db = dim / da;

  // bit position of ring site s (site 0 most significant)
  const auto pos = [n](int s) { return n - 1 - s; };
  std::vector<long> a_of(dim, 0), b_of(dim, 0);
  std::vector<int> arows(cut.count), brows(n - cut.count);
  for (int k = 0; k < cut.count; ++k) arows[k] = (cut.start + k) % n;
  for (int k = 0; k < n - cut.count; ++k) brows[k] = (cut.start + cut.count + k) % n;
  for (long i = 0; i < dim; ++i) {
    long a = 0, b = 0;
    for (int r : arows) a = (a << 1) | ((i >> pos(r)) & 1L);
    for (int r : brows) b = (b << 1) | ((i >> pos(r)) & 1L);
    a_of[i] = a;
    b_of[i] = b;
  }

  RMatrix mr = RMatrix::Zero(da, db), ml = RMatrix::Zero(da, db);
  for (long i = 0; i < dim; ++i) {
    mr(a_of[i], b_of[i]) = state.psi_right(i);
    ml(a_of[i], b_of[i]) = state.psi_left(i);
  }
  RMatrix rho = mr * ml.transpose();
  return DenseOperator(std::move(rho));
}

EntanglementSpectrum entanglement_spectrum(const DenseOperator& rho_bar_a,
                                           const std::vector<int>* basis_charges,
                                           const Tolerances& tol) {
  detail::require(rho_bar_a.is_square(), "entanglement_spectrum: matrix must be square");
  const Complex tr = rho_bar_a.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > 1e-8) {
    std::ostringstream os;
    os << "entanglement_spectrum: trace " << tr << " deviates from 1 by more than 1e-8";
    detail::fail(os.str());
  }

  std::vector<std::pair<double, int>> labeled;  // (weight, label)
  CVector values;

  if (basis_charges != nullptr) {
    detail::require(static_cast<Eigen::Index>(basis_charges->size()) == rho_bar_a.rows(),
                    "entanglement_spectrum: charge list size mismatch");
    // group basis states by charge, check leakage, diagonalize blockwise
    std::vector<int> charges = *basis_charges;
    std::vector<int> distinct = charges;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const double scale = rho_bar_a.mat.cwiseAbs().maxCoeff();
    double leakage = 0.0;
    for (Eigen::Index i = 0; i < rho_bar_a.rows(); ++i)
      for (Eigen::Index j = 0; j < rho_bar_a.cols(); ++j)
        if (charges[i] != charges[j]) leakage = std::max(leakage, std::abs(rho_bar_a.mat(i, j)));
    if (leakage > 1e-10 * std::max(scale, 1e-300)) {
      std::ostringstream os;
      os << "entanglement_spectrum: cross-sector leakage " << leakage
         << " despite a conserved alternating charge";
      throw std::runtime_error(os.str());
    }
    for (int q : distinct) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < rho_bar_a.rows(); ++i)
        if (charges[i] == q) idx.push_back(i);
      CMatrix block(idx.size(), idx.size());
      for (size_t i = 0; i < idx.size(); ++i)
        for (size_t j = 0; j < idx.size(); ++j) block(i, j) = rho_bar_a.mat(idx[i], idx[j]);
      Eigen::ComplexEigenSolver<CMatrix> es(block, false);
      detail::require(es.info() == Eigen::Success, "entanglement_spectrum: block solver failed");
      const CleanedSpectrum cs = clean_real_spectrum(es.eigenvalues(), tol);
      if (!cs.offenders.empty()) {
        std::ostringstream os;
        os << "entanglement_spectrum: eigenvalue " << cs.offenders.front()
           << " has imaginary part above the cleanup threshold";
        throw std::runtime_error(os.str());
      }
      for (double w : cs.values) labeled.emplace_back(w, q);
    }
  } else {
    Eigen::ComplexEigenSolver<CMatrix> es(rho_bar_a.mat, false);
    detail::require(es.info() == Eigen::Success, "entanglement_spectrum: solver failed");
    const CleanedSpectrum cs = clean_real_spectrum(es.eigenvalues(), tol);
    if (!cs.offenders.empty()) {
      std::ostringstream os;
      os << "entanglement_spectrum: eigenvalue " << cs.offenders.front()
         << " has imaginary part above the cleanup threshold";
      throw std::runtime_error(os.str());
    }
    for (double w : cs.values) labeled.emplace_back(w, 0);
  }

  // clip small negatives, reject anything clearly negative
  double sum = 0.0;
  for (auto& [w, q] : labeled) {
    if (w < -tol.weight_clip) {
      std::ostringstream os;
      os << "entanglement_spectrum: negative weight " << w;
      throw std::runtime_error(os.str());
    }
    w = std::max(w, 0.0);
    sum += w;
  }
  detail::require(sum > 0.0, "entanglement_spectrum: all weights vanish");
  std::sort(labeled.begin(), labeled.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  EntanglementSpectrum out;
  for (const auto& [w, q] : labeled) {
    out.weights.push_back(w / sum);
    if (basis_charges != nullptr) out.labels.push_back(q);
  }
  Tolerances loose = tol;
  loose.weight_sum = 1e-6;
  out.entropy = von_neumann_entropy(out.weights, loose);
  return out;
}

std::vector<int> ring_alternating_charges(int aux_sites) {
  return cut_alternating_charges(aux_sites, AuxCut{0, aux_sites});
}

std::vector<int> cut_alternating_charges(int aux_sites, AuxCut cut) {
  const long da = 1L << cut.count;
  std::vector<int> q(da, 0);
  for (long a = 0; a < da; ++a) {
    int sum = 0;
    for (int k = 0; k < cut.count; ++k) {
      const int row = (cut.start + k) % aux_sites;
      const int bit = static_cast<int>((a >> (cut.count - 1 - k)) & 1L);
      const int twosz = 1 - 2 * bit;  // bit 0 = up
      sum += (row % 2 == 0 ? twosz : -twosz);
    }
    q[a] = sum;
  }
  return q;
}

double trotter_partition_function_row(const SpinChainModel& model, int length,
                                      const TrotterGrid& grid) {
  detail::require(length >= 2 && length % 2 == 0 && length <= 12,
                  "trotter_partition_function_row: length must be even, 2..12");
  const Eigen::Matrix4d tau = real_exp_bond(bond_hamiltonian(model), grid.delta_beta);
  const long dim = 1L << length;

  // V_e and V_o as dense matrices via the same gate applier used columnwise
  RMatrix ve(dim, dim), vo(dim, dim);
  RVector e = RVector::Zero(dim);
  for (long j = 0; j < dim; ++j) {
    e(j) = 1.0;
    RVector we = e;
    for (int k = 0; 2 * k + 1 < length; ++k) {
      // plain two-site operator application: out = tau (on sites 2k, 2k+1) * in
      apply_gate_inplace(we, length, 2 * k, 2 * k + 1, tau);
    }
    ve.col(j) = we;
    RVector wo = e;
    for (int k = 0; 2 * k + 1 < length; ++k)
      apply_gate_inplace(wo, length, 2 * k + 1, (2 * k + 2) % length, tau);
    vo.col(j) = wo;
    e(j) = 0.0;
  }
  RMatrix step = vo * ve;
  RMatrix p = RMatrix::Identity(dim, dim);
  for (int m = 0; m < grid.trotter_m; ++m) p = step * p;
  return p.trace();
}

}  // namespace qtm
