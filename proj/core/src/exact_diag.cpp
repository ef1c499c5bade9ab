#include "qtm/exact_diag.hpp"

#include <cmath>
#include <sstream>

namespace qtm {

ThermalState thermal_state(const SpinChainModel& model, int length, Boundary boundary,
                           double temperature) {
  detail::require(temperature > 0.0, "thermal_state: temperature must be positive");
  if (length > 14) {
    std::ostringstream os;
    os << "thermal_state: length " << length << " exceeds the dense budget of 14 sites";
    detail::fail(os.str());
  }
  ThermalState st;
  st.model = model;
  st.length = length;
  st.boundary = boundary;
  st.temperature = temperature;
  st.hamiltonian = chain_hamiltonian(model, length, boundary);

  const HermitianEig eig = hermitian_eig(st.hamiltonian, 1e-9);
  st.energies = eig.values;
  const double beta = 1.0 / temperature;
  const double e0 = eig.values(0);
  RVector w(eig.values.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = std::exp(-beta * (eig.values(k) - e0));
  const double zshift = w.sum();
  st.partition_function = zshift * std::exp(-beta * e0);
  w /= zshift;
  CMatrix rho = CMatrix::Zero(eig.vectors.rows(), eig.vectors.cols());
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (w(k) > 1e-300) rho += w(k) * (eig.vectors.col(k) * eig.vectors.col(k).adjoint());
  st.rho_c = DenseOperator(std::move(rho));
  return st;
}

namespace {

double entropy_of_density(const DenseOperator& rho) {
  const HermitianEig eig = hermitian_eig(rho, 1e-8);
  std::vector<double> w;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) w.push_back(std::max(0.0, eig.values(i)));
  return von_neumann_entropy(w);
}

}  // namespace

SpatialMeasures spatial_measures(const ThermalState& state, const std::vector<int>& region) {
  const int n = state.length;
  detail::require(!region.empty() && static_cast<int>(region.size()) < n,
                  "spatial_measures: region must be a nonempty proper subset");
  std::vector<int> dims(n, 2);
  std::vector<int> complement;
  {
    std::vector<char> in(n, 0);
    for (int s : region) {
      detail::require(s >= 0 && s < n, "spatial_measures: region site out of range");
      in[s] = 1;
    }
    for (int s = 0; s < n; ++s)
      if (!in[s]) complement.push_back(s);
  }

  SpatialMeasures m;
  m.s_a = entropy_of_density(partial_trace(state.rho_c, dims, region));
  m.s_b = entropy_of_density(partial_trace(state.rho_c, dims, complement));

  // thermal entropy from the exact Boltzmann weights
  const double beta = 1.0 / state.temperature;
  const double e0 = state.energies(0);
  double z = 0.0, s = 0.0;
  for (Eigen::Index k = 0; k < state.energies.size(); ++k) z += std::exp(-beta * (state.energies(k) - e0));
  for (Eigen::Index k = 0; k < state.energies.size(); ++k) {
    const double p = std::exp(-beta * (state.energies(k) - e0)) / z;
    if (p > 0) s -= p * std::log(p);
  }
  m.s_th = s;
  m.mutual_info = m.s_a + m.s_b - m.s_th;
  return m;
}

TrotterErrorStudy trotter_error_study(const SpinChainModel& model, int length, double temperature,
                                      const std::vector<double>& delta_beta_list) {
  const ThermalState exact = thermal_state(model, length, Boundary::Periodic, temperature);
  const double beta = 1.0 / temperature;

  TrotterErrorStudy study;
  for (double db : delta_beta_list) {
    const double m_real = beta / db;
    const int m = static_cast<int>(std::lround(m_real));
    if (m < 1 || std::abs(m_real - m) > 1e-9 * m_real) {
      std::ostringstream os;
      os << "trotter_error_study: beta/delta_beta = " << m_real << " is not an integer step count";
      detail::fail(os.str());
    }
    const TrotterGrid grid(db, m);
    const double z_trotter = trotter_partition_function_row(model, length, grid);
    study.points.push_back({db, std::abs(z_trotter - exact.partition_function) /
                                    exact.partition_function});
  }

  // power-law fit of the error; only points clearly above roundoff contribute
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& p : study.points) {
    if (p.relative_error < 1e-13) continue;
    const double x = std::log(p.delta_beta), y = std::log(p.relative_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n >= 2) {
    const double var = sxx - sx * sx / n;
    study.fitted_exponent = var > 1e-12 ? (sxy - sx * sy / n) / var : 0.0;
  }
  return study;
}

}  // namespace qtm
