#pragma once

namespace qtm {

/// Complete elliptic integral of the first kind K(k), modulus convention,
/// computed by arithmetic-geometric-mean iteration. Valid for 0 <= k < 1.
double elliptic_K(double k);

}  // namespace qtm
