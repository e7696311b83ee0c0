#include "geoqp/inner_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace geoqp {

std::string to_string(Subsolver s) { return s == Subsolver::nmpg ? "nmpg" : "panoc"; }

std::string to_string(InnerStatus s) {
  switch (s) {
    case InnerStatus::converged: return "converged";
    case InnerStatus::iteration_cap: return "iteration-cap";
    case InnerStatus::stalled: return "stalled";
    case InnerStatus::time_limit: return "time-limit";
  }
  return "unknown";
}

VectorXd pg_step(const InnerProblem& ip, const VectorXd& w, double gamma) {
  VectorXd g(w.size());
  ip.evaluate(w, g);
  VectorXd out = w - gamma * g;
  ip.project(out);
  return out;
}

double stationarity_residual(const InnerProblem& ip, const VectorXd& w, double gamma) {
  VectorXd g(w.size()), gbar(w.size());
  ip.evaluate(w, g);
  VectorXd wbar = w - gamma * g;
  ip.project(wbar);
  ip.evaluate(wbar, gbar);
  return ((w - wbar) / gamma + gbar - g).norm();
}

double spectral_stepsize(const VectorXd& s, const VectorXd& v, double gamma_prev,
                         double gamma_min, double gamma_max) {
  const double sv = s.dot(v);
  double gamma = gamma_prev;
  if (sv > 1e-12 * s.norm() * v.norm()) gamma = s.squaredNorm() / sv;
  return std::clamp(gamma, gamma_min, gamma_max);
}

namespace {

bool finite(double phi, const VectorXd& g) { return std::isfinite(phi) && g.allFinite(); }

// Sliding maximum reference for the nonmonotone test.
class ValueWindow {
public:
  explicit ValueWindow(int size) : size_(std::max(size, 1)) {}
  void push(double v) {
    values_.push_back(v);
    if (static_cast<int>(values_.size()) > size_) values_.pop_front();
  }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }

private:
  int size_;
  std::deque<double> values_;
};

struct Evaluator {
  const InnerProblem& ip;
  Index count = 0;
  double operator()(const VectorXd& w, VectorXd& g) {
    ++count;
    return ip.evaluate(w, g);
  }
};

// One-direction finite-difference curvature probe for the initial stepsize.
double initial_stepsize(Evaluator& eval, const VectorXd& w, const VectorXd& g,
                        const InnerOptions& opts) {
  std::mt19937_64 gen(0x5eedULL);
  std::normal_distribution<double> normal;
  VectorXd d(w.size());
  for (Index i = 0; i < d.size(); ++i) d[i] = normal(gen);
  const double dn = d.norm();
  if (dn == 0.0) return 1.0;
  const double h = 1e-6 * (1.0 + w.norm());
  VectorXd g2(w.size());
  const double phi2 = eval(w + (h / dn) * d, g2);
  const double L = (g2 - g).norm() / h;
  if (!std::isfinite(phi2) || !std::isfinite(L) || L <= 0.0) return 1.0;
  return std::clamp(1.0 / L, opts.gamma_min, opts.gamma_max);
}

bool past(const std::optional<Clock::time_point>& deadline) {
  return deadline && Clock::now() >= *deadline;
}

InnerResult start(const InnerProblem& ip, const VectorXd& w0) {
  InnerResult res;
  res.w_star = w0;
  ip.project(res.w_star);
  return res;
}

class Lbfgs {
public:
  explicit Lbfgs(int memory) : memory_(std::max(memory, 1)) {}

  void push(const VectorXd& s, const VectorXd& y) {
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm())) return;
    s_.push_back(s);
    y_.push_back(y);
    rho_.push_back(1.0 / sy);
    if (static_cast<int>(s_.size()) > memory_) {
      s_.pop_front();
      y_.pop_front();
      rho_.pop_front();
    }
  }
  void clear() {
    s_.clear();
    y_.clear();
    rho_.clear();
  }
  bool empty() const { return s_.empty(); }

  /// -H r by the two-loop recursion.
  VectorXd direction(const VectorXd& r) const {
    const std::size_t k = s_.size();
    std::vector<double> alpha(k);
    VectorXd q = r;
    for (std::size_t i = k; i-- > 0;) {
      alpha[i] = rho_[i] * s_[i].dot(q);
      q -= alpha[i] * y_[i];
    }
    q *= s_.back().dot(y_.back()) / y_.back().squaredNorm();
    for (std::size_t i = 0; i < k; ++i) {
      const double beta = rho_[i] * y_[i].dot(q);
      q += (alpha[i] - beta) * s_[i];
    }
    return -q;
  }

private:
  int memory_;
  std::deque<VectorXd> s_, y_;
  std::deque<double> rho_;
};

}  // namespace

InnerResult nmpg_solve(const InnerProblem& ip, const VectorXd& w0, double eps,
                       const InnerOptions& opts) {
  InnerResult res = start(ip, w0);
  if (opts.max_iterations <= 0) return res;
  Evaluator eval{ip};
  VectorXd w = res.w_star;
  VectorXd g(w.size()), g_new(w.size()), w_new(w.size());
  double phi = eval(w, g);
  auto finish = [&](InnerStatus st) {
    res.status = st;
    res.gradient_evaluations = eval.count;
    return res;
  };
  if (!finite(phi, g)) {
    res.diagnostic = "non-finite value or gradient at the initial point";
    return finish(InnerStatus::stalled);
  }
  double gamma = initial_stepsize(eval, w, g, opts);
  ValueWindow window(opts.window);
  window.push(phi);
  if (opts.on_accept) opts.on_accept(w, phi);

  while (res.iterations < opts.max_iterations) {
    if (past(opts.deadline)) return finish(InnerStatus::time_limit);
    const double reference = window.max();
    int backtracks = 0;
    double phi_new = 0.0;
    for (;;) {
      w_new = w - gamma * g;
      ip.project(w_new);
      phi_new = eval(w_new, g_new);
      if (!finite(phi_new, g_new)) {
        res.diagnostic = "non-finite value or gradient at a trial point";
        return finish(InnerStatus::stalled);
      }
      const double step2 = (w_new - w).squaredNorm();
      if (phi_new <= reference - opts.armijo * step2 / gamma) break;
      gamma *= 0.5;
      if (++backtracks >= opts.max_backtracks) {
        res.diagnostic = "linesearch exhausted";
        return finish(InnerStatus::stalled);
      }
    }
    ++res.iterations;
    res.residual = ((w - w_new) / gamma + g_new - g).norm();
    res.certificate_base = w;
    res.certificate_gamma = gamma;
    res.w_star = w_new;
    window.push(phi_new);
    if (opts.on_accept) opts.on_accept(w_new, phi_new);
    if (res.residual <= eps) return finish(InnerStatus::converged);
    const VectorXd s = w_new - w;
    const VectorXd v = g_new - g;
    w.swap(w_new);
    g.swap(g_new);
    gamma = spectral_stepsize(s, v, gamma, opts.gamma_min, opts.gamma_max);
  }
  return finish(InnerStatus::iteration_cap);
}

InnerResult panoc_solve(const InnerProblem& ip, const VectorXd& w0, double eps,
                        const InnerOptions& opts) {
  InnerResult res = start(ip, w0);
  if (opts.max_iterations <= 0) return res;
  Evaluator eval{ip};
  const Index dim = res.w_star.size();
  VectorXd w = res.w_star;
  VectorXd g(dim), g_bar(dim), g_cand(dim);
  double phi = eval(w, g);
  auto finish = [&](InnerStatus st) {
    res.status = st;
    res.gradient_evaluations = eval.count;
    return res;
  };
  if (!finite(phi, g)) {
    res.diagnostic = "non-finite value or gradient at the initial point";
    return finish(InnerStatus::stalled);
  }
  double gamma = initial_stepsize(eval, w, g, opts);
  ValueWindow window(opts.window);
  window.push(phi);
  if (opts.on_accept) opts.on_accept(w, phi);

  Lbfgs lbfgs(opts.lbfgs_memory);
  bool have_prev = false;
  VectorXd w_prev, r_prev;
  int backtracks = 0;

  while (res.iterations < opts.max_iterations) {
    if (past(opts.deadline)) return finish(InnerStatus::time_limit);
    const double reference = window.max();

    VectorXd w_bar = w - gamma * g;
    ip.project(w_bar);
    const VectorXd r = w - w_bar;
    if (have_prev) lbfgs.push(w - w_prev, r - r_prev);
    const double r2 = r.squaredNorm();
    const double r_norm = std::sqrt(r2);

    bool bar_evaluated = false;
    double phi_bar = 0.0;
    if (r_norm == 0.0 || r_norm / gamma <= eps) {
      phi_bar = eval(w_bar, g_bar);
      bar_evaluated = true;
      if (!finite(phi_bar, g_bar)) {
        res.diagnostic = "non-finite value or gradient at a trial point";
        return finish(InnerStatus::stalled);
      }
      const double residual = (r / gamma + g_bar - g).norm();
      if (residual <= eps) {
        res.residual = residual;
        res.certificate_base = w;
        res.certificate_gamma = gamma;
        res.w_star = w_bar;
        return finish(InnerStatus::converged);
      }
    }

    const double target = reference - opts.armijo * r2 / gamma;
    bool accepted = false;
    VectorXd w_next;
    double phi_next = 0.0;
    if (!lbfgs.empty()) {
      const VectorXd d = lbfgs.direction(r);
      double tau = 1.0;
      for (int t = 0; t <= opts.tau_halvings; ++t, tau *= 0.5) {
        VectorXd cand = w - (1.0 - tau) * r + tau * d;
        ip.project(cand);
        const double phi_cand = eval(cand, g_cand);
        if (finite(phi_cand, g_cand) && phi_cand <= target) {
          w_next = std::move(cand);
          phi_next = phi_cand;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      if (!bar_evaluated) {
        phi_bar = eval(w_bar, g_bar);
        if (!finite(phi_bar, g_bar)) {
          res.diagnostic = "non-finite value or gradient at a trial point";
          return finish(InnerStatus::stalled);
        }
      }
      if (phi_bar <= target) {
        w_next = w_bar;
        phi_next = phi_bar;
        g_cand = g_bar;
        accepted = true;
      }
    }
    if (!accepted) {
      gamma *= 0.5;
      lbfgs.clear();
      have_prev = false;
      if (++backtracks >= opts.max_backtracks || gamma < opts.gamma_min) {
        res.diagnostic = "linesearch exhausted";
        return finish(InnerStatus::stalled);
      }
      continue;
    }
    backtracks = 0;
    ++res.iterations;
    w_prev = w;
    r_prev = r;
    have_prev = true;
    w = std::move(w_next);
    g = g_cand;
    phi = phi_next;
    res.w_star = w;
    window.push(phi);
    if (opts.on_accept) opts.on_accept(w, phi);
  }
  return finish(InnerStatus::iteration_cap);
}

InnerResult inner_solve(Subsolver which, const InnerProblem& ip, const VectorXd& w0, double eps,
                        const InnerOptions& opts) {
  return which == Subsolver::nmpg ? nmpg_solve(ip, w0, eps, opts) : panoc_solve(ip, w0, eps, opts);
}

}  // namespace geoqp
