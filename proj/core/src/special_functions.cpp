#include "qtm/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qtm {

double elliptic_K(double k) {
  if (!(k >= 0.0 && k < 1.0)) {
    std::ostringstream os;
    os << "elliptic_K: modulus k = " << k << " outside [0, 1)";
    throw std::invalid_argument(os.str());
  }
  double a = 1.0;
  double b = std::sqrt(1.0 - k * k);
  // AGM converges quadratically; 64 iterations is far beyond what double needs.
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return std::numbers::pi / (2.0 * a);
}

}  // namespace qtm
