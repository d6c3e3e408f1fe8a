#pragma once

#include <vector>

#include "qbcsim/grid.hpp"

namespace qbc {

// In-place complex FFT of a field's values, forward (sign -1) or inverse
// (sign +1). The inverse is scaled by 1/n so forward followed by inverse is
// the identity. Backed by FFTW with a process-wide plan cache.
void fft_forward(std::vector<complexd>& data);
void fft_inverse(std::vector<complexd>& data);

}  // namespace qbc
