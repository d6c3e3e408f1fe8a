#include "oracles.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace testsupport {

namespace {

using cx = std::complex<double>;

// Thomas algorithm for a constant-coefficient complex tridiagonal system
// (diag b, off-diagonals a) with Dirichlet ends folded into the band.
std::vector<cx> solve_tridiagonal_const(cx off, cx diag, std::vector<cx> rhs) {
  const std::size_t n = rhs.size();
  std::vector<cx> c_prime(n);
  c_prime[0] = off / diag;
  rhs[0] /= diag;
  for (std::size_t i = 1; i < n; ++i) {
    const cx denom = diag - off * c_prime[i - 1];
    c_prime[i] = off / denom;
    rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c_prime[i] * rhs[i + 1];
  return rhs;
}

double simpson(const std::function<double(double)>& f, double a, double b,
               double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (!(b > a)) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = simpson(f, a, b, fa, fm, fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 60);
}

}  // namespace

std::vector<cx> crank_nicolson_free(std::vector<cx> psi, double dx, double dt,
                                    std::uint64_t steps, double mass, double hbar) {
  if (psi.size() < 3) throw std::invalid_argument("crank_nicolson_free: field too small");
  // (1 + i dt H / 2 hbar) psi' = (1 - i dt H / 2 hbar) psi with
  // H = -(hbar^2 / 2m) D2; beta collects dt hbar / (4 m dx^2).
  const double beta = dt * hbar / (4.0 * mass * dx * dx);
  const cx i_beta(0.0, beta);
  const cx diag_l = 1.0 + 2.0 * i_beta, off_l = -i_beta;
  const cx diag_r = 1.0 - 2.0 * i_beta, off_r = i_beta;
  const std::size_t n = psi.size();
  std::vector<cx> rhs(n);
  for (std::uint64_t s = 0; s < steps; ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      cx acc = diag_r * psi[j];
      if (j > 0) acc += off_r * psi[j - 1];
      if (j + 1 < n) acc += off_r * psi[j + 1];
      rhs[j] = acc;
    }
    psi = solve_tridiagonal_const(off_l, diag_l, std::move(rhs));
    rhs.resize(n);
  }
  return psi;
}

double chi_square_sf_quadrature(double x, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("chi_square_sf_quadrature: k must be positive");
  if (x <= 0.0) return 1.0;
  const double half_k = 0.5 * k;
  const double log_norm = half_k * std::log(2.0) + std::lgamma(half_k);
  const auto density = [&](double t) {
    if (t <= 0.0) return 0.0;
    return std::exp((half_k - 1.0) * std::log(t) - 0.5 * t - log_norm);
  };
  // Beyond upper the integrand is below ~1e-70; the remaining tail is
  // dominated by a geometric series with ratio e^{-1/2} and is negligible
  // against the 1e-12 quadrature tolerance.
  const double upper = std::max(x, k) + 60.0 * std::sqrt(2.0 * k) + 320.0;
  return integrate(density, x, upper, 1e-12);
}

double binomial_two_sided_exact(std::uint64_t successes, std::uint64_t n, double p0) {
  if (!(p0 > 0.0 && p0 < 1.0))
    throw std::invalid_argument("binomial_two_sided_exact: p0 must lie in (0,1)");
  if (successes > n)
    throw std::invalid_argument("binomial_two_sided_exact: successes exceed n");
  const long double p = p0;
  const long double odds = p / (1.0L - p);
  std::vector<long double> pmf(n + 1);
  pmf[0] = std::pow(1.0L - p, static_cast<long double>(n));
  for (std::uint64_t i = 0; i < n; ++i)
    pmf[i + 1] = pmf[i] * odds * static_cast<long double>(n - i) /
                 static_cast<long double>(i + 1);
  const long double cutoff = pmf[successes] * (1.0L + 1e-12L);
  long double total = 0.0L;
  for (const long double q : pmf)
    if (q <= cutoff) total += q;
  return static_cast<double>(std::min(total, 1.0L));
}

double gaussian_interval_mass(double sigma,
                              const std::vector<std::pair<double, double>>& intervals) {
  const double scale = 1.0 / (sigma * std::sqrt(2.0));
  double mass = 0.0;
  for (const auto& [lo, hi] : intervals)
    mass += 0.5 * (std::erf(hi * scale) - std::erf(lo * scale));
  return mass;
}

double gaussian_width(double sigma0, double t, double mass, double hbar) {
  const double r = hbar * t / (2.0 * mass * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + r * r);
}

cx gaussian_free_exact(double x, double t, double sigma0, double x0, double p0,
                       double mass, double hbar) {
  // psi(x,t) = (2 pi s_t^2)^{-1/4} exp(-(x - x0 - v t)^2 / (4 sigma0 s_t)
  //            + i p0 (x - x0) / hbar - i p0^2 t / (2 m hbar))
  // with s_t = sigma0 (1 + i hbar t / (2 m sigma0^2)); the complex width
  // carries both the spreading and the quadratic chirp.
  const cx st = sigma0 * cx(1.0, hbar * t / (2.0 * mass * sigma0 * sigma0));
  const double v = p0 / mass;
  const double xi = x - x0 - v * t;
  const cx amp = std::pow(2.0 * std::acos(-1.0) * st * st, -0.25);
  const cx phase(0.0, p0 * (x - x0) / hbar - 0.5 * p0 * p0 * t / (mass * hbar));
  return amp * std::exp(-xi * xi / (4.0 * sigma0 * st) + phase);
}

double fresnel_two_slit_density(double x, double t0, double t1, double sigma0,
                                double slit_width, double slit_separation,
                                double mass, double hbar) {
  if (!(t1 > t0)) throw std::invalid_argument("fresnel_two_slit_density: t1 must exceed t0");
  const double dt = t1 - t0;
  const double pref = mass / (2.0 * hbar * dt);
  // psi(x, t1) = sqrt(m / (2 pi i hbar dt)) * integral over the open slits of
  // psi(x', t0) exp(i m (x - x')^2 / (2 hbar dt)) dx'. Simpson with an odd
  // point count per slit resolves both the hard edges and the kernel chirp.
  const int nseg = 200001;
  const double h = slit_width / (nseg - 1);
  long double norm2 = 0.0L;
  std::complex<long double> total(0.0L, 0.0L);
  for (const double lo : {-0.5 * slit_separation - 0.5 * slit_width,
                          0.5 * slit_separation - 0.5 * slit_width}) {
    for (int i = 0; i < nseg; ++i) {
      const double xp = lo + i * h;
      const double w = (i == 0 || i == nseg - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const cx slit_amp = gaussian_free_exact(xp, t0, sigma0, 0.0, 0.0, mass, hbar);
      norm2 += w * std::norm(slit_amp);
      const double phase = pref * (x - xp) * (x - xp);
      const cx term = slit_amp * cx(std::cos(phase), std::sin(phase));
      total += std::complex<long double>(w * term.real(), w * term.imag());
    }
  }
  const double integral2 = static_cast<double>(std::norm(total)) * h * h / 9.0;
  const double mass_in_slits = static_cast<double>(norm2) * h / 3.0;
  return integral2 * mass / (2.0 * std::acos(-1.0) * hbar * dt) / mass_in_slits;
}

double l2_distance(const std::vector<cx>& a, const std::vector<cx>& b, double dx) {
  if (a.size() != b.size()) throw std::invalid_argument("l2_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
  return std::sqrt(acc * dx);
}

}  // namespace testsupport
