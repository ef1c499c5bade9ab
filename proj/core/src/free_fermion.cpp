#include "qtm/free_fermion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "qtm/special_functions.hpp"

namespace qtm {

FreeFermionSpectrum single_particle_levels(const SpinChainModel& model, int count) {
  detail::require(count > 0, "single_particle_levels: count must be positive");
  FreeFermionSpectrum out;
  if (model.kind == ModelKind::TransverseIsing) {
    const double lambda = model.lambda;
    if (lambda == 1.0) detail::fail("single_particle_levels: no massive CTM spectrum at lambda = 1");
    if (lambda <= 0.0) detail::fail("single_particle_levels: lambda must be positive");
    if (lambda > 1.0) {
      out.phase = PhaseTag::IsingDisordered;
      const double eps = std::numbers::pi * elliptic_K(std::sqrt(1.0 - 1.0 / (lambda * lambda))) /
                         elliptic_K(1.0 / lambda);
      out.spacing_unit = eps;
      for (int j = 0; j < count; ++j) {
        out.levels.push_back((2 * j + 1) * eps);
        out.orbital_degeneracy.push_back(2);
      }
    } else {
      out.phase = PhaseTag::IsingOrdered;
      const double eps =
          std::numbers::pi * elliptic_K(std::sqrt(1.0 - lambda * lambda)) / elliptic_K(lambda);
      out.spacing_unit = eps;
      for (int j = 0; j < count; ++j) {
        out.levels.push_back(j * eps);
        out.orbital_degeneracy.push_back(j == 0 ? 1 : 2);
      }
    }
  } else if (model.kind == ModelKind::XXZ) {
    const double delta = model.delta;
    if (!(delta > 1.0)) {
      std::ostringstream os;
      os << "single_particle_levels: XXZ CTM spectrum requires Delta > 1, got " << delta;
      detail::fail(os.str());
    }
    out.phase = PhaseTag::XXZMassive;
    const double eps = 2.0 * std::log(delta + std::sqrt(delta * delta - 1.0));  // 2 arccosh
    out.spacing_unit = eps;
    for (int j = 0; j < count; ++j) {
      out.levels.push_back(j * eps);
      out.orbital_degeneracy.push_back(j == 0 ? 1 : 2);
    }
  } else {
    detail::fail("single_particle_levels: no CTM spectrum for this model");
  }
  return out;
}

namespace {

void enumerate_levels(const FreeFermionSpectrum& ff, size_t j, double energy, long states,
                      double cutoff, long budget, long& used,
                      std::map<double, long>& found) {
  // merge energies that coincide up to rounding
  if (j == ff.levels.size() || energy + ff.levels[j] > cutoff) {
    const double key = energy;
    auto it = found.lower_bound(key - 1e-9);
    if (it != found.end() && std::abs(it->first - key) < 1e-9)
      it->second += states;
    else
      found.emplace(key, states);
    ++used;
    if (used > budget) {
      std::ostringstream os;
      os << "many_body_spectrum: enumeration exceeds the state budget " << budget;
      throw std::invalid_argument(os.str());
    }
    return;
  }
  const int deg = ff.orbital_degeneracy[j];
  for (int n = 0; n <= deg; ++n) {
    const double e = energy + n * ff.levels[j];
    if (e > cutoff && n > 0) break;
    // binomial(deg, n) occupation patterns of a (possibly) twofold orbital
    const long mult = (deg == 2 && n == 1) ? 2 : 1;
    enumerate_levels(ff, j + 1, e, states * mult, cutoff, budget, used, found);
  }
}

}  // namespace

std::vector<std::pair<double, long>> many_body_spectrum(const FreeFermionSpectrum& ff,
                                                        double energy_cutoff, long state_budget) {
  detail::require(energy_cutoff > 0.0, "many_body_spectrum: cutoff must be positive");
  detail::require(!ff.levels.empty(), "many_body_spectrum: empty level list");
  std::map<double, long> found;
  long used = 0;
  enumerate_levels(ff, 0, 0.0, 1, energy_cutoff, state_budget, used, found);
  std::vector<std::pair<double, long>> out(found.begin(), found.end());
  return out;
}

double entropy_from_levels(const FreeFermionSpectrum& ff) {
  detail::require(!ff.levels.empty(), "entropy_from_levels: empty level list");
  double s = 0.0;
  for (size_t j = 0; j < ff.levels.size(); ++j) {
    const double eps = ff.levels[j];
    const double per_orbital =
        (eps == 0.0) ? std::numbers::ln2
                     : std::log1p(std::exp(-eps)) + eps * std::exp(-eps) / (1.0 + std::exp(-eps));
    s += ff.orbital_degeneracy[j] * per_orbital;
  }
  return s;
}

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points,
                       std::optional<double> velocity) {
  detail::require(points.size() >= 3, "fit_scaling: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(points.size());
  for (const auto& [t, s] : points) {
    detail::require(t > 0.0, "fit_scaling: temperatures must be positive");
    const double x = std::log(t);
    sx += x;
    sy += s;
    sxx += x * x;
    sxy += x * s;
  }
  const double var = sxx - sx * sx / n;
  if (var < 1e-12) detail::fail("fit_scaling: degenerate abscissas");
  const double slope = (sxy - sx * sy / n) / var;
  const double intercept = (sy - slope * sx) / n;

  ScalingFit fit;
  fit.central_charge = -3.0 * slope;
  fit.intercept = intercept;
  if (velocity) {
    detail::require(*velocity > 0.0, "fit_scaling: velocity must be positive");
    fit.c1 = intercept - (fit.central_charge / 3.0) * std::log(*velocity);
  }
  double ss = 0.0;
  for (const auto& [t, s] : points) {
    const double r = s - (slope * std::log(t) + intercept);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

double bethe_velocity(double delta, double j) {
  if (!(delta > -1.0 && delta <= 1.0)) {
    std::ostringstream os;
    os << "bethe_velocity: Delta = " << delta << " outside the critical range (-1, 1]";
    detail::fail(os.str());
  }
  if (delta == 1.0) return j * std::numbers::pi / 2.0;
  return j * std::numbers::pi * std::sqrt(1.0 - delta * delta) / (2.0 * std::acos(delta));
}

}  // namespace qtm
