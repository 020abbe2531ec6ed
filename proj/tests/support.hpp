#pragma once

// Independent reference computations used as test oracles. Nothing here calls
// into the library's numerical routines; formulas are written out directly so
// that a shared bug cannot make both sides agree.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kC = 0.299792458; // µm/fs

// Index of refraction written out by hand, with its wavelength derivative.
struct IndexModel {
  std::function<double(double)> n;      // λ in µm
  std::function<double(double)> dn_dl;  // 1/µm
};

inline double thermal_sum(const double (&c)[4], double l) {
  return c[0] + c[1] / l + c[2] / (l * l) + c[3] / (l * l * l);
}

inline double thermal_sum_derivative(const double (&c)[4], double l) {
  return -c[1] / (l * l) - 2.0 * c[2] / (l * l * l) - 3.0 * c[3] / (l * l * l * l);
}

// KTP y: König-Wong one-pole fit, Emanueli-Arie thermal terms about 25 °C.
inline IndexModel ktp_y(double temperature_c) {
  const double dt = temperature_c - 25.0;
  static const double a[4] = {6.2897e-6, 6.3061e-6, -6.0629e-6, 2.6486e-6};
  static const double b[4] = {-0.14445e-8, 2.2244e-8, -3.5770e-8, 1.3470e-8};
  IndexModel m;
  m.n = [dt](double l) {
    const double n2 = 2.09930 + 0.922683 / (1.0 - 0.0467695 / (l * l)) - 0.0138408 * l * l;
    return std::sqrt(n2) + thermal_sum(a, l) * dt + thermal_sum(b, l) * dt * dt;
  };
  m.dn_dl = [dt](double l) {
    const double q = 1.0 - 0.0467695 / (l * l);
    const double n2 = 2.09930 + 0.922683 / q - 0.0138408 * l * l;
    const double dn2 = -0.922683 * (2.0 * 0.0467695 / (l * l * l)) / (q * q) - 2.0 * 0.0138408 * l;
    return dn2 / (2.0 * std::sqrt(n2)) + thermal_sum_derivative(a, l) * dt +
           thermal_sum_derivative(b, l) * dt * dt;
  };
  return m;
}

// KTP z: Fradkin two-pole fit, Emanueli-Arie thermal terms about 25 °C.
inline IndexModel ktp_z(double temperature_c) {
  const double dt = temperature_c - 25.0;
  static const double a[4] = {9.9587e-6, 9.9228e-6, -8.9603e-6, 4.1010e-6};
  static const double b[4] = {-1.1882e-8, 10.459e-8, -9.8136e-8, 3.1481e-8};
  IndexModel m;
  m.n = [dt](double l) {
    const double n2 = 2.12725 + 1.18431 / (1.0 - 0.0514852 / (l * l)) +
                      0.6603 / (1.0 - 100.00507 / (l * l)) - 0.00968956 * l * l;
    return std::sqrt(n2) + thermal_sum(a, l) * dt + thermal_sum(b, l) * dt * dt;
  };
  m.dn_dl = [dt](double l) {
    const double q1 = 1.0 - 0.0514852 / (l * l);
    const double q2 = 1.0 - 100.00507 / (l * l);
    const double n2 = 2.12725 + 1.18431 / q1 + 0.6603 / q2 - 0.00968956 * l * l;
    const double dn2 = -1.18431 * (2.0 * 0.0514852 / (l * l * l)) / (q1 * q1) -
                       0.6603 * (2.0 * 100.00507 / (l * l * l)) / (q2 * q2) - 2.0 * 0.00968956 * l;
    return dn2 / (2.0 * std::sqrt(n2)) + thermal_sum_derivative(a, l) * dt +
           thermal_sum_derivative(b, l) * dt * dt;
  };
  return m;
}

inline double wavenumber(const IndexModel& m, double nm) {
  const double l = nm * 1e-3;
  return 2.0 * kPi * m.n(l) / l;
}

// Analytic k' = (n - λ dn/dλ)/c in fs/µm.
inline double inverse_group_velocity(const IndexModel& m, double nm) {
  const double l = nm * 1e-3;
  return (m.n(l) - l * m.dn_dl(l)) / kC;
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iterations = 200) {
  double flo = f(lo);
  for (int k = 0; k < iterations; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Poling period at temperature T by bisection on 1/Λ, then thermal expansion
// about 25 °C with α = 6.7e-6 /°C.
inline double poling_period(double pump_nm, double signal_nm, double idler_nm, double temperature_c) {
  const auto y = ktp_y(temperature_c);
  const auto z = ktp_z(temperature_c);
  const double dk = wavenumber(y, pump_nm) - wavenumber(z, signal_nm) - wavenumber(y, idler_nm);
  const double inv = bisect([&](double g) { return dk + 2.0 * kPi * g; }, 1e-4, 1.0);
  return (1.0 / inv) / (1.0 + 6.7e-6 * (temperature_c - 25.0));
}

inline double gvm_wavelength(double temperature_c) {
  const auto y = ktp_y(temperature_c);
  const auto z = ktp_z(temperature_c);
  auto g = [&](double l) {
    return inverse_group_velocity(y, l / 2) -
           0.5 * (inverse_group_velocity(z, l) + inverse_group_velocity(y, l));
  };
  return bisect(g, 1400.0, 1700.0);
}

// Purity without SVD: Tr(M²)/Tr(M)² with M = F F†.
inline double purity_by_trace(const Eigen::MatrixXcd& f) {
  const Eigen::MatrixXcd m = f * f.adjoint();
  const double t = m.trace().real();
  return (m * m).trace().real() / (t * t);
}

// Maximum of |sin x / x| on (π, 2π) by dense scan plus golden refinement.
inline std::pair<double, double> first_sidelobe() {
  auto f = [](double x) { return std::abs(std::sin(x) / x); };
  double best = kPi;
  for (int k = 1; k < 100000; ++k) {
    const double x = kPi + kPi * k / 100000.0;
    if (f(x) > f(best)) best = x;
  }
  double lo = best - kPi / 1e5, hi = best + kPi / 1e5;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int k = 0; k < 200; ++k) {
    const double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
    if (f(a) > f(b)) hi = b;
    else lo = a;
  }
  const double x = 0.5 * (lo + hi);
  return {x, f(x)};
}

// Werner family (1-p)|Ψ⁻⟩⟨Ψ⁻| + p I/4 closed forms.
inline double werner_fidelity(double p) { return 1.0 - 0.75 * p; }
inline double werner_purity(double p) { return 1.0 - 1.5 * p + 0.75 * p * p; }
inline double werner_concurrence(double p) {
  const double w = 1.0 - p;
  return std::max(0.0, (3.0 * w - 1.0) / 2.0);
}

} // namespace oracle

namespace gen {

// Deterministic stream for property instances; each suite uses its own seed.
class Stream {
public:
  explicit Stream(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::complex<double> complex_normal() {
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(rng_), n(rng_)};
  }
  Eigen::MatrixXcd complex_matrix(int rows, int cols) {
    Eigen::MatrixXcd m(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) m(i, j) = complex_normal();
    return m;
  }
  std::mt19937_64& engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

inline constexpr int kInstances = 100;

} // namespace gen
