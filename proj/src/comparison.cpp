#include "nhvak/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "nhvak/errors.hpp"

namespace nhvak {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Static contiguous chunks; every index is written by exactly one worker.
template <class F>
void parallel_for(std::size_t n, int threads, F&& fn) {
  const std::size_t width = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (width <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(width);
  const std::size_t chunk = (n + width - 1) / width;
  for (std::size_t w = 0; w < width; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void require_samples(const Trajectory& traj, const char* what) {
  if (traj.size() < 5) throw ContractError(std::string(what) + ": at least 5 samples required");
}

ComparisonReport make_report(Criterion c, std::vector<double> details, double tol, long samples) {
  ComparisonReport r;
  r.criterion = c;
  r.residual = details.empty() ? 0.0 : *std::max_element(details.begin(), details.end());
  r.tolerance = tol;
  r.verdict = r.residual <= tol;
  r.samples = samples;
  r.details = std::move(details);
  return r;
}

struct Profile {
  double s0;
  double len;
  int k;
  double value(double t) const {
    const double s = std::sin(k * kPi * (t - s0) / len);
    return s * s;
  }
  double rate(double t) const {
    const double x = k * kPi * (t - s0) / len;
    return k * kPi / len * std::sin(2.0 * x);
  }
};

// Random unit directions in d-coordinates, drawn in index order.
std::vector<VectorXd> unit_directions(int n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<VectorXd> out;
  for (int j = 0; j < n; ++j) {
    VectorXd u(k);
    do {
      for (int i = 0; i < k; ++i) u(i) = g(rng);
    } while (u.norm() < 1e-8);
    out.push_back(u / u.norm());
  }
  return out;
}

}  // namespace

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::NH_IS_UNCONSTRAINED: return "NH_IS_UNCONSTRAINED";
    case Criterion::NH_IS_VAK_INTEGRAL: return "NH_IS_VAK_INTEGRAL";
    case Criterion::NH_IS_VAK_MULTIPLIER: return "NH_IS_VAK_MULTIPLIER";
    case Criterion::VAK_IS_NH: return "VAK_IS_NH";
  }
  return "";
}

std::optional<Criterion> parse_criterion(const std::string& name) {
  for (Criterion c : {Criterion::NH_IS_UNCONSTRAINED, Criterion::NH_IS_VAK_INTEGRAL,
                      Criterion::NH_IS_VAK_MULTIPLIER, Criterion::VAK_IS_NH})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 5) throw ContractError("simpson: at least 5 samples required");
  const std::size_t intervals = n - 1;
  const std::size_t even = intervals % 2 == 0 ? intervals : intervals - 3;
  double sum = 0.0;
  for (std::size_t i = 0; i + 2 <= even; i += 2) sum += f[i] + 4.0 * f[i + 1] + f[i + 2];
  sum *= h / 3.0;
  if (even != intervals) {
    const std::size_t i = even;
    sum += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
  }
  return sum;
}

ComparisonReport check_unconstrained(const SystemSpec& sys, const Trajectory& traj, double tol,
                                     int threads) {
  const Splitting& sp = sys.splitting;
  std::vector<double> details(traj.size(), 0.0);
  parallel_for(traj.size(), threads, [&](std::size_t i) {
    const VectorXd& q = traj.q[i];
    const VectorXd& v = traj.v[i];
    const VectorXd vdot = sp.embed_d(nh_accel(sys, q, sp.d_coords(v)));
    const VectorXd psi = el_covector(sys, q, v, vdot);
    if (sp.dprime_rank() > 0)
      details[i] = (sp.dprime_basis().transpose() * psi).cwiseAbs().maxCoeff();
  });
  return make_report(Criterion::NH_IS_UNCONSTRAINED, std::move(details), tol,
                     static_cast<long>(traj.size()));
}

std::vector<GeneratorPair> generate_vak_pairs(const SystemSpec& sys, const Trajectory& traj, int n,
                                              std::uint64_t seed, int threads) {
  require_samples(traj, "generate_vak_pairs");
  const Splitting& sp = sys.splitting;
  const int r = sp.dprime_rank();
  const int k = sp.d_rank();
  if (n < r + 1) {
    std::ostringstream os;
    os << "generate_vak_pairs: need at least dim(d') + 1 = " << r + 1 << " raw pairs, got " << n;
    throw ContractError(os.str());
  }
  if (k == 0) throw ContractError("generate_vak_pairs: d is trivial");

  const Profile base{traj.t.front(), traj.t.back() - traj.t.front(), 1};
  if (!(base.len > 0.0)) throw ContractError("generate_vak_pairs: empty time interval");
  const std::vector<VectorXd> dirs = unit_directions(n, k, seed);
  std::vector<VectorXd> u(n);
  for (int j = 0; j < n; ++j) u[j] = sp.embed_d(dirs[j]);
  const MatrixXd W = sp.dprime_dual();
  const MatrixXd& Dp = sp.dprime_basis();

  // beta_j in d'-coordinates, integrated in independent chunks.
  const int width = std::max(1, std::min(threads, n));
  const int chunk = (n + width - 1) / width;
  std::vector<std::vector<VectorXd>> beta(n);
  parallel_for(static_cast<std::size_t>(width), width, [&](std::size_t w) {
    const int lo = static_cast<int>(w) * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) return;
    auto rhs = [&](double t, const VectorXd&, const VectorXd& v, const VectorXd&,
                   const VectorXd& y) {
      VectorXd out(y.size());
      for (int j = lo; j < hi; ++j) {
        const Profile pj{base.s0, base.len, j + 1};
        const VectorXd a = pj.value(t) * u[j];
        const VectorXd b = Dp * y.segment((j - lo) * r, r);
        out.segment((j - lo) * r, r) =
            -W * (bracket(sys.algebra, v, a) + bracket(sys.algebra, v, b));
      }
      return out;
    };
    const std::vector<VectorXd> ys =
        integrate_along(sys, traj, VectorXd::Zero(static_cast<long>(hi - lo) * r), rhs);
    for (int j = lo; j < hi; ++j) {
      beta[j].reserve(ys.size());
      for (const VectorXd& y : ys) beta[j].push_back(y.segment((j - lo) * r, r));
    }
  });

  const std::size_t N = traj.size();
  MatrixXd E(r, n);
  for (int j = 0; j < n; ++j) E.col(j) = beta[j].back();

  if (!E.allFinite()) throw NumericalError("end-point map of the generator family is not finite");
  MatrixXd C;
  if (r == 0 || E.cwiseAbs().maxCoeff() <= 1e-14) {
    C = MatrixXd::Identity(n, n);
  } else {
    Eigen::JacobiSVD<MatrixXd> svd(E, Eigen::ComputeFullV);
    const VectorXd& s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > 1e-12 * s(0)) ++rank;
    C = svd.matrixV().rightCols(n - rank);
  }

  std::vector<GeneratorPair> pairs;
  for (Eigen::Index c = 0; c < C.cols(); ++c) {
    GeneratorPair g;
    g.t = traj.t;
    g.a.assign(N, VectorXd::Zero(sp.dim()));
    g.b.assign(N, VectorXd::Zero(sp.dim()));
    for (int j = 0; j < n; ++j) {
      const double w = C(j, c);
      if (w == 0.0) continue;
      const Profile pj{base.s0, base.len, j + 1};
      for (std::size_t i = 0; i < N; ++i) {
        g.a[i] += w * pj.value(traj.t[i]) * u[j];
        g.b[i] += w * (Dp * beta[j][i]);
      }
    }
    for (std::size_t i = 0; i < N; ++i) g.a[i] = sp.P() * g.a[i];
    g.a.front().setZero();
    g.a.back().setZero();
    if (g.b.back().cwiseAbs().maxCoeff() > 1e-9) {
      std::ostringstream os;
      os << "generate_vak_pairs: closed pair has |b(t1)| = " << g.b.back().cwiseAbs().maxCoeff();
      throw NumericalError(os.str());
    }
    pairs.push_back(std::move(g));
  }
  return pairs;
}

double integral_residual(const SystemSpec& sys, const Trajectory& traj,
                         const GeneratorPair& pair) {
  require_samples(traj, "integral_residual");
  if (pair.a.size() != traj.size() || pair.b.size() != traj.size())
    throw ContractError("integral_residual: generator and trajectory lengths differ");
  const Splitting& sp = sys.splitting;
  std::vector<double> f(traj.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const VectorXd& q = traj.q[i];
    const VectorXd& v = traj.v[i];
    const VectorXd& a = pair.a[i];
    const VectorXd& b = pair.b[i];
    const VectorXd p = d_dv(sys.lagrangian, q, v);
    const VectorXd hq = pullback_covector(sys.lagrangian, sys.frame, q, v);
    f[i] = hq.dot(b) + p.dot(sp.P() * bracket(sys.algebra, v, b)) -
           p.dot(sp.Pprime() * bracket(sys.algebra, v, a));
    sup = std::max(sup, (a + b).cwiseAbs().maxCoeff());
  }
  const double h = (traj.t.back() - traj.t.front()) / static_cast<double>(traj.size() - 1);
  return std::abs(simpson(f, h)) / (1.0 + sup);
}

ComparisonReport check_nh_is_vak_integral(const SystemSpec& sys, const Trajectory& traj,
                                          const std::vector<GeneratorPair>& pairs, double tol,
                                          int threads) {
  require_samples(traj, "check_nh_is_vak_integral");
  std::vector<double> details(pairs.size(), 0.0);
  parallel_for(pairs.size(), threads,
               [&](std::size_t i) { details[i] = integral_residual(sys, traj, pairs[i]); });
  return make_report(Criterion::NH_IS_VAK_INTEGRAL, std::move(details), tol,
                     static_cast<long>(traj.size()));
}

ComparisonReport check_nh_is_vak_integral(const SystemSpec& sys, const Trajectory& traj, int n,
                                          std::uint64_t seed, double tol, int threads) {
  if (n == 0) n = sys.splitting.dprime_rank() + 6;
  return check_nh_is_vak_integral(sys, traj, generate_vak_pairs(sys, traj, n, seed, threads), tol,
                                  threads);
}

std::pair<ComparisonReport, MultiplierPath> check_nh_is_vak_multiplier(const SystemSpec& sys,
                                                                       const Trajectory& traj,
                                                                       int m_samples,
                                                                       double tol) {
  require_samples(traj, "check_nh_is_vak_multiplier");
  const Splitting& sp = sys.splitting;
  const int r = sp.dprime_rank();
  const int k = sp.d_rank();
  const MatrixXd W = sp.dprime_dual();
  const MatrixXd& Dp = sp.dprime_basis();

  // y = [mu_p; vec(Phi)], mu_p(0) = 0, Phi(0) = I.
  auto rhs = [&](double, const VectorXd& q, const VectorXd& v, const VectorXd& vdot,
                 const VectorXd& y) {
    MatrixXd G(r, r);
    for (int j = 0; j < r; ++j)
      G.row(j) = (W * bracket(sys.algebra, v, VectorXd(Dp.col(j)))).transpose();
    const VectorXd psi = el_covector(sys, q, v, vdot);
    VectorXd out(r + r * r);
    out.head(r) = G * y.head(r) - Dp.transpose() * psi;
    const Eigen::Map<const MatrixXd> Phi(y.data() + r, r, r);
    Eigen::Map<MatrixXd>(out.data() + r, r, r) = G * Phi;
    return out;
  };
  VectorXd y0 = VectorXd::Zero(r + r * r);
  Eigen::Map<MatrixXd>(y0.data() + r, r, r).setIdentity();
  const std::vector<VectorXd> ys = integrate_along(sys, traj, y0, rhs);

  const std::size_t N = traj.size();
  const MatrixXd PhiEnd = Eigen::Map<const MatrixXd>(ys.back().data() + r, r, r);
  if (r > 0 && !(detail::condition_number<double>(PhiEnd) <= 1e12))
    throw NumericalError("check_nh_is_vak_multiplier: degenerate fundamental matrix");

  std::vector<std::size_t> rows;
  if (m_samples <= 0 || static_cast<std::size_t>(m_samples) >= N) {
    for (std::size_t i = 0; i < N; ++i) rows.push_back(i);
  } else {
    for (int j = 0; j < m_samples; ++j)
      rows.push_back(static_cast<std::size_t>(
          std::llround(static_cast<double>(j) * (N - 1) / std::max(1, m_samples - 1))));
  }

  // Row (i, a): w^T (mu_p + Phi c) with w = W [eta, a].
  MatrixXd M(static_cast<long>(rows.size()) * k, r);
  VectorXd rhs_ls(static_cast<long>(rows.size()) * k);
  std::vector<VectorXd> w_rows;
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    const std::size_t i = rows[ri];
    const Eigen::Map<const MatrixXd> Phi(ys[i].data() + r, r, r);
    for (int a = 0; a < k; ++a) {
      const VectorXd w = W * bracket(sys.algebra, traj.v[i], VectorXd(sp.d_basis().col(a)));
      const long row = static_cast<long>(ri) * k + a;
      M.row(row) = w.transpose() * Phi;
      rhs_ls(row) = -w.dot(ys[i].head(r));
    }
  }
  VectorXd c = VectorXd::Zero(r);
  if (r > 0 && M.rows() > 0) c = M.completeOrthogonalDecomposition().solve(rhs_ls);

  MultiplierPath best;
  best.t = traj.t;
  std::vector<double> details(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const Eigen::Map<const MatrixXd> Phi(ys[i].data() + r, r, r);
    best.lam.push_back(ys[i].head(r) + Phi * c);
    double worst = 0.0;
    for (int a = 0; a < k; ++a) {
      const VectorXd w = W * bracket(sys.algebra, traj.v[i], VectorXd(sp.d_basis().col(a)));
      worst = std::max(worst, std::abs(w.dot(best.lam.back())));
    }
    details[i] = worst;
  }

  const VectorXd res = M * c - rhs_ls;
  ComparisonReport rep;
  rep.criterion = Criterion::NH_IS_VAK_MULTIPLIER;
  rep.residual = res.size() > 0 ? std::sqrt(res.squaredNorm() / static_cast<double>(res.size())) : 0.0;
  rep.tolerance = tol;
  rep.verdict = rep.residual <= tol;
  rep.samples = static_cast<long>(rows.size());
  rep.details = std::move(details);
  return {rep, best};
}

double vakonomic_defect(const SystemSpec& sys, const Trajectory& traj, const MultiplierPath& lam) {
  require_samples(traj, "vakonomic_defect");
  if (lam.size() != traj.size())
    throw ContractError("vakonomic_defect: multiplier and trajectory lengths differ");
  const Splitting& sp = sys.splitting;
  const double h = (traj.t.back() - traj.t.front()) / static_cast<double>(traj.size() - 1);
  const std::vector<VectorXd> vdot = sample_derivative(traj.v, h);
  const std::vector<VectorXd> mudot = sample_derivative(lam.lam, h);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const VectorXd res = vak_residual(sys, traj.q[i], traj.v[i], vdot[i], sp.annihilator(lam.lam[i]),
                                      sp.annihilator(mudot[i]));
    worst = std::max(worst, res.cwiseAbs().maxCoeff());
  }
  return worst;
}

ComparisonReport check_vak_is_nh(const SystemSpec& sys, const Trajectory& traj,
                                 const MultiplierPath& lam, double tol, double vak_tol) {
  const double defect = vakonomic_defect(sys, traj, lam);
  if (!(defect <= vak_tol)) {
    std::ostringstream os;
    os << "input not vakonomic: vakonomic residual " << defect << " exceeds " << vak_tol;
    throw NotVakonomicError(os.str(), defect);
  }
  const Splitting& sp = sys.splitting;
  std::vector<double> details(traj.size(), 0.0);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const VectorXd l = sp.annihilator(lam.lam[i]);
    for (int a = 0; a < sp.d_rank(); ++a) {
      const VectorXd x = sp.Pprime() * bracket(sys.algebra, traj.v[i], VectorXd(sp.d_basis().col(a)));
      details[i] = std::max(details[i], std::abs(l.dot(x)));
    }
  }
  return make_report(Criterion::VAK_IS_NH, std::move(details), tol, static_cast<long>(traj.size()));
}

SplittingComparison splitting_independence(const SystemSpec& sys, const Trajectory& traj,
                                           int trials, std::uint64_t seed, int n, double tol,
                                           int threads) {
  if (trials < 0) throw ContractError("splitting_independence: trials must be >= 0");
  const std::vector<GeneratorPair> pairs =
      generate_vak_pairs(sys, traj, n == 0 ? sys.splitting.dprime_rank() + 6 : n, seed, threads);
  const ComparisonReport base = check_nh_is_vak_integral(sys, traj, pairs, tol, threads);

  SplittingComparison out;
  out.trials = trials;
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    MatrixXd coeffs(sys.splitting.d_rank(), sys.splitting.dprime_rank());
    for (Eigen::Index i = 0; i < coeffs.rows(); ++i)
      for (Eigen::Index j = 0; j < coeffs.cols(); ++j) coeffs(i, j) = u(rng);
    SystemSpec changed = sys;
    changed.splitting =
        change_complement(sys.splitting, complement_change_map(sys.splitting, coeffs));
    std::vector<GeneratorPair> moved = pairs;
    for (GeneratorPair& g : moved)
      for (std::size_t i = 0; i < g.a.size(); ++i) {
        const VectorXd xi = g.a[i] + g.b[i];
        g.a[i] = changed.splitting.P() * xi;
        g.b[i] = changed.splitting.Pprime() * xi;
      }
    const ComparisonReport rep = check_nh_is_vak_integral(changed, traj, moved, tol, threads);
    out.max_difference = std::max(out.max_difference, std::abs(rep.residual - base.residual));
    out.verdicts_identical = out.verdicts_identical && rep.verdict == base.verdict;
  }
  return out;
}

double holonomic_variation_residual(const SystemSpec& sys, const Trajectory& traj, int n,
                                    std::uint64_t seed) {
  if (traj.size() < 2) throw ContractError("holonomic_variation_check: trajectory too short");
  if (n < 1) throw ContractError("holonomic_variation_check: need at least one generator");
  const Splitting& sp = sys.splitting;
  const std::vector<VectorXd> dirs = unit_directions(n, sp.d_rank(), seed);
  const double t0 = traj.t.front();
  const double len = traj.t.back() - t0;
  if (!(len > 0.0)) throw ContractError("holonomic_variation_check: empty time interval");
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const Profile pj{t0, len, j + 1};
    const VectorXd u = sp.embed_d(dirs[j]);
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double t = traj.t[i];
      const auto [dq, dv] =
          variation_lift(sys.frame, {traj.q[i], traj.v[i]}, pj.value(t) * u, pj.rate(t) * u);
      worst = std::max(worst, (sp.Pprime() * dv).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double holonomic_variation_check(const SystemSpec& sys, const Trajectory& traj, int n,
                                 std::uint64_t seed) {
  const Splitting& sp = sys.splitting;
  for (int i = 0; i < sp.d_rank(); ++i)
    for (int j = i + 1; j < sp.d_rank(); ++j) {
      const VectorXd c = sp.Pprime() * bracket(sys.algebra, VectorXd(sp.d_basis().col(i)),
                                               VectorXd(sp.d_basis().col(j)));
      if (c.cwiseAbs().maxCoeff() > 1e-12) {
        std::ostringstream os;
        os << "holonomic_variation_check: d is not bracket-closed (pair " << i << ", " << j
           << ")";
        throw ContractError(os.str());
      }
    }
  return holonomic_variation_residual(sys, traj, n, seed);
}

}  // namespace nhvak
