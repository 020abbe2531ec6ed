#include "spdc/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "spdc/errors.hpp"

namespace spdc::polarization {

namespace {

using cd = std::complex<double>;
constexpr double kInvSqrt2 = 0.70710678118654752440;

Eigen::Matrix4cd projector_matrix(Projector a, Projector b) {
  Eigen::Vector4cd v;
  const Eigen::Vector2cd x = projector_state(a);
  const Eigen::Vector2cd y = projector_state(b);
  v << x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1];
  return v * v.adjoint();
}

Eigen::Matrix4cd spin_flip() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 3) = -1.0;
  m(1, 2) = 1.0;
  m(2, 1) = 1.0;
  m(3, 0) = -1.0;
  return m;
}

Eigen::Matrix4cd hermitian_sqrt(const Eigen::Matrix4cd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Hermitian 4x4 -> real 16-vector (diagonal, then real and imaginary upper parts).
Eigen::Matrix<double, 16, 1> real_vectorize(const Eigen::Matrix4cd& m) {
  Eigen::Matrix<double, 16, 1> v;
  int k = 0;
  for (int i = 0; i < 4; ++i) v[k++] = m(i, i).real();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      v[k++] = m(i, j).real();
      v[k++] = m(i, j).imag();
    }
  return v;
}

// --- lower-triangular parametrization ------------------------------------

using Params = Eigen::Matrix<double, 16, 1>;

Eigen::Matrix4cd unpack(const Params& t) {
  Eigen::Matrix4cd a = Eigen::Matrix4cd::Zero();
  int k = 0;
  for (int i = 0; i < 4; ++i) a(i, i) = t[k++];
  for (int i = 1; i < 4; ++i)
    for (int j = 0; j < i; ++j) {
      a(i, j) = cd(t[k], t[k + 1]);
      k += 2;
    }
  return a;
}

Params pack_gradient(const Eigen::Matrix4cd& g) {
  // dF/dRe = 2 Re G, dF/dIm = 2 Im G for G = dF/d conj(A).
  Params out;
  int k = 0;
  for (int i = 0; i < 4; ++i) out[k++] = 2.0 * g(i, i).real();
  for (int i = 1; i < 4; ++i)
    for (int j = 0; j < i; ++j) {
      out[k++] = 2.0 * g(i, j).real();
      out[k++] = 2.0 * g(i, j).imag();
    }
  return out;
}

struct Likelihood {
  std::vector<Eigen::Matrix4cd> projectors;
  std::vector<double> counts;
  std::vector<double> exposure;
  Eigen::Matrix4cd exposure_sum; // Σ τ_j P_j
  double total_counts = 0.0;
  double scale = 1.0;

  // Negative log-likelihood per count; +inf outside the support.
  double value(const Params& t, Params* grad) const {
    const Eigen::Matrix4cd a = unpack(t);
    const Eigen::Matrix4cd rho = a * a.adjoint();
    double f = 0.0;
    Eigen::Matrix4cd weighted = Eigen::Matrix4cd::Zero();
    for (std::size_t j = 0; j < projectors.size(); ++j) {
      const double p = (projectors[j] * rho).trace().real();
      const double mu = scale * exposure[j] * p;
      f += mu;
      if (counts[j] > 0.0) {
        if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
        f -= counts[j] * std::log(mu);
        if (grad) weighted += (counts[j] / p) * projectors[j];
      }
    }
    if (grad) {
      const Eigen::Matrix4cd g = (scale * exposure_sum - weighted) * a / total_counts;
      *grad = pack_gradient(g);
    }
    return f / total_counts;
  }
};

} // namespace

char to_char(Projector p) {
  static constexpr std::array<char, 6> names{'H', 'V', 'D', 'A', 'R', 'L'};
  return names[static_cast<std::size_t>(p)];
}

Projector projector_from_char(char c) {
  switch (c) {
  case 'H': return Projector::H;
  case 'V': return Projector::V;
  case 'D': return Projector::D;
  case 'A': return Projector::A;
  case 'R': return Projector::R;
  case 'L': return Projector::L;
  default: break;
  }
  throw Error(ErrorKind::parse, std::string("unknown projector label '") + c + "'");
}

Eigen::Vector2cd projector_state(Projector p) {
  switch (p) {
  case Projector::H: return {1.0, 0.0};
  case Projector::V: return {0.0, 1.0};
  case Projector::D: return {kInvSqrt2, kInvSqrt2};
  case Projector::A: return {kInvSqrt2, -kInvSqrt2};
  case Projector::R: return {kInvSqrt2, cd(0.0, kInvSqrt2)};
  case Projector::L: return {kInvSqrt2, cd(0.0, -kInvSqrt2)};
  }
  return {1.0, 0.0};
}

TwoQubitState::TwoQubitState(const Eigen::Matrix4cd& rho) : rho_(rho) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1.0e-10) {
    throw Error(ErrorKind::state, "density matrix is not Hermitian");
  }
  if (std::abs(rho.trace().real() - 1.0) > 1.0e-9 || std::abs(rho.trace().imag()) > 1.0e-10) {
    throw Error(ErrorKind::state, "density matrix trace differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1.0e-9) {
    throw Error(ErrorKind::state, "density matrix has a negative eigenvalue");
  }
}

Eigen::Vector4cd singlet() { return {0.0, kInvSqrt2, -kInvSqrt2, 0.0}; }

TwoQubitState model_state(double depolarization, double amplitude_imbalance, double phase_error) {
  if (!(depolarization >= 0.0 && depolarization <= 1.0))
    throw Error(ErrorKind::input, "depolarization must lie in [0, 1]");
  if (!(amplitude_imbalance >= 0.0 && amplitude_imbalance <= 1.0))
    throw Error(ErrorKind::input, "amplitude_imbalance must lie in [0, 1]");
  if (!std::isfinite(phase_error)) throw Error(ErrorKind::input, "phase_error must be finite");

  Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
  psi[1] = std::sqrt(0.5 * (1.0 + amplitude_imbalance));
  psi[2] = -std::polar(std::sqrt(0.5 * (1.0 - amplitude_imbalance)), phase_error);
  psi.normalize();
  Eigen::Matrix4cd rho = (1.0 - depolarization) * (psi * psi.adjoint()) +
                         (0.25 * depolarization) * Eigen::Matrix4cd::Identity();
  return TwoQubitState(rho);
}

double fidelity_singlet(const TwoQubitState& state) {
  const Eigen::Vector4cd s = singlet();
  return (s.adjoint() * state.rho() * s)(0, 0).real();
}

double state_purity(const TwoQubitState& state) {
  return (state.rho() * state.rho()).trace().real();
}

double concurrence(const TwoQubitState& state) {
  const Eigen::Matrix4cd flip = spin_flip();
  const Eigen::Matrix4cd tilde = flip * state.rho().conjugate() * flip;
  const Eigen::Matrix4cd root = hermitian_sqrt(state.rho());
  const Eigen::Matrix4cd r = root * tilde * root;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
  Eigen::Vector4d l = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::sort(l.data(), l.data() + 4, std::greater<>());
  return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

double tangle(const TwoQubitState& state) {
  const double c = concurrence(state);
  return c * c;
}

double trace_distance(const TwoQubitState& a, const TwoQubitState& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(a.rho() - b.rho(), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

std::vector<Setting> standard_settings() {
  std::vector<Setting> out;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) out.emplace_back(Projector(a), Projector(b));
  return out;
}

std::vector<TomographyRecord> simulate_tomography(const TwoQubitState& state,
                                                  const std::vector<Setting>& settings,
                                                  std::uint64_t mean_counts, std::uint64_t seed,
                                                  double integration_s) {
  if (mean_counts < 1) throw Error(ErrorKind::input, "mean_counts must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<TomographyRecord> out;
  out.reserve(settings.size());
  for (const auto& [a, b] : settings) {
    const double p = std::max(0.0, (projector_matrix(a, b) * state.rho()).trace().real());
    const double mean = static_cast<double>(mean_counts) * p;
    std::uint64_t n = 0;
    if (mean > 1.0e-12) {
      std::poisson_distribution<std::uint64_t> poisson(mean);
      n = poisson(rng);
    }
    out.push_back({a, b, n, integration_s});
  }
  return out;
}

MleResult reconstruct_mle(const std::vector<TomographyRecord>& records, const MleOptions& options) {
  Likelihood lk;
  Eigen::Matrix<double, Eigen::Dynamic, 16> design(static_cast<Eigen::Index>(records.size()), 16);
  lk.exposure_sum.setZero();
  for (std::size_t j = 0; j < records.size(); ++j) {
    const auto& r = records[j];
    if (!(r.integration_s > 0.0)) throw Error(ErrorKind::input, "integration time must be positive");
    lk.projectors.push_back(projector_matrix(r.setting_a, r.setting_b));
    lk.counts.push_back(static_cast<double>(r.counts));
    lk.exposure.push_back(r.integration_s);
    lk.exposure_sum += r.integration_s * lk.projectors.back();
    lk.total_counts += static_cast<double>(r.counts);
    design.row(static_cast<Eigen::Index>(j)) = real_vectorize(lk.projectors.back()).transpose();
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1.0e-10);
  if (records.empty() || qr.rank() < 16) {
    std::set<Setting> present;
    for (const auto& r : records) present.emplace(r.setting_a, r.setting_b);
    std::ostringstream os;
    os << "tomography settings are not informationally complete (rank "
       << (records.empty() ? 0 : qr.rank()) << " of 16); missing:";
    for (const auto& s : standard_settings())
      if (!present.contains(s)) os << ' ' << to_char(s.first) << to_char(s.second);
    throw Error(ErrorKind::rank_deficiency, os.str());
  }
  if (!(lk.total_counts > 0.0)) throw Error(ErrorKind::degenerate_input, "all tomography counts are zero");

  lk.scale = 4.0 * lk.total_counts / lk.exposure_sum.trace().real();

  // Start from the maximally mixed state and run L-BFGS with Armijo backtracking.
  Params x = Params::Zero();
  for (int i = 0; i < 4; ++i) x[i] = 0.5;
  Params g;
  double f = lk.value(x, &g);

  constexpr int kMemory = 8;
  std::deque<std::pair<Params, Params>> history; // (s, y)
  MleResult result{TwoQubitState(Eigen::Matrix4cd::Identity() / 4.0), 0, g.norm(), false};
  constexpr int kStallWindow = 500;
  double f_checkpoint = f;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (g.norm() < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    if (it > 0 && it % kStallWindow == 0) {
      if (f_checkpoint - f <= 1.0e-14 * std::abs(f)) break;
      f_checkpoint = f;
    }
    // Two-loop recursion.
    Params q = g;
    std::vector<double> alpha(history.size());
    for (int k = static_cast<int>(history.size()) - 1; k >= 0; --k) {
      const auto& [s, y] = history[k];
      alpha[k] = s.dot(q) / y.dot(s);
      q -= alpha[k] * y;
    }
    if (!history.empty()) {
      const auto& [s, y] = history.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      const auto& [s, y] = history[k];
      const double beta = y.dot(q) / y.dot(s);
      q += (alpha[k] - beta) * s;
    }
    Params dir = -q;
    if (dir.dot(g) >= 0.0) {
      dir = -g;
      history.clear();
    }

    double step = 1.0;
    Params x_new, g_new;
    double f_new = std::numeric_limits<double>::infinity();
    const double slope = dir.dot(g);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * dir;
      f_new = lk.value(x_new, &g_new);
      if (std::isfinite(f_new) && f_new <= f + 1.0e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!history.empty()) {
        history.clear();
        continue;
      }
      break; // no descent possible at machine precision
    }
    const Params s = x_new - x;
    const Params y = g_new - g;
    if (s.dot(y) > 1.0e-300) {
      history.emplace_back(s, y);
      if (history.size() > kMemory) history.pop_front();
    }
    x = x_new;
    f = f_new;
    g = g_new;
  }

  const Eigen::Matrix4cd a = unpack(x);
  Eigen::Matrix4cd rho = a * a.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  result.state = TwoQubitState(rho);
  result.iterations = it;
  result.gradient_norm = g.norm();
  return result;
}

void write_records_csv(std::ostream& out, const std::vector<TomographyRecord>& records,
                       const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "setting_a,setting_b,counts,integration_s\n";
  for (const auto& r : records) {
    out << to_char(r.setting_a) << ',' << to_char(r.setting_b) << ',' << r.counts << ','
        << r.integration_s << '\n';
  }
}

std::vector<TomographyRecord> read_records_csv(std::istream& in) {
  std::vector<TomographyRecord> out;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "setting_a,setting_b,counts,integration_s") {
        throw Error(ErrorKind::parse, "line " + std::to_string(line_no) +
                                          ": expected header setting_a,setting_b,counts,integration_s");
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string a, b, counts, integration;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') ||
        !std::getline(row, counts, ',') || !std::getline(row, integration) || a.size() != 1 ||
        b.size() != 1) {
      throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": malformed record");
    }
    TomographyRecord r;
    try {
      r.setting_a = projector_from_char(a[0]);
      r.setting_b = projector_from_char(b[0]);
      std::size_t used = 0;
      const long long n = std::stoll(counts, &used);
      if (used != counts.size() || n < 0) throw std::invalid_argument("counts");
      r.counts = static_cast<std::uint64_t>(n);
      r.integration_s = std::stod(integration);
    } catch (const Error&) {
      throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": bad projector label");
    } catch (const std::exception&) {
      throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": bad numeric field");
    }
    out.push_back(r);
  }
  return out;
}

} // namespace spdc::polarization
