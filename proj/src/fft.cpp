#include "qbcsim/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace qbc {
namespace {

// FFTW planning is not thread safe, and plans are expensive to build, so we
// keep one cached plan per (size, direction) behind a mutex. Execution uses
// fftw_execute_dft on caller buffers, which is safe once the plan exists.
struct PlanCache {
  std::mutex mu;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans;

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = plans.find({n, sign});
    if (it != plans.end()) return it->second;
    // FFTW_ESTIMATE picks the algorithm from a fixed heuristic rather than
    // timing runs, so two processes produce bit-identical transforms. That
    // matters more here than the last factor of two in speed: run outputs
    // are required to be byte-stable for a given seed.
    fftw_complex* buf = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE);
    fftw_free(buf);
    plans.emplace(std::make_pair(n, sign), p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void run(std::vector<complexd>& data, int sign) {
  const std::size_t n = data.size();
  if (n == 0) return;
  fftw_plan plan = cache().get(n, sign);
  // fftw_execute_dft requires FFTW-aligned buffers when the plan was built
  // with default flags; copy through an aligned scratch block.
  // std::complex<double> is layout-compatible with fftw_complex by the
  // standard's array-oriented access guarantee.
  fftw_complex* buf = fftw_alloc_complex(n);
  std::memcpy(static_cast<void*>(buf), static_cast<const void*>(data.data()),
              n * sizeof(fftw_complex));
  fftw_execute_dft(plan, buf, buf);
  std::memcpy(static_cast<void*>(data.data()), static_cast<const void*>(buf),
              n * sizeof(fftw_complex));
  fftw_free(buf);
  if (sign == FFTW_BACKWARD) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& v : data) v *= inv;
  }
}

}  // namespace

void fft_forward(std::vector<complexd>& data) { run(data, FFTW_FORWARD); }
void fft_inverse(std::vector<complexd>& data) { run(data, FFTW_BACKWARD); }

}  // namespace qbc
