#include "mfo/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "mfo/errors.hpp"
#include "mfo/format.hpp"

namespace mfo {

void LbfgsConfig::validate() const {
  if (memory < 1) throw ConfigError("lbfgs: memory must be >= 1");
  if (max_iterations < 0) throw ConfigError("lbfgs: max_iterations must be >= 0");
  if (!(c1 > 0 && c1 < c2 && c2 < 1)) throw ConfigError("lbfgs: need 0 < c1 < c2 < 1");
  if (max_line_search_trials < 1) throw ConfigError("lbfgs: max_line_search_trials must be >= 1");
  if (!(gradient_tolerance >= 0) || !(relative_decrease_tolerance >= 0)) {
    throw ConfigError("lbfgs: tolerances must be >= 0");
  }
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::kConverged: return "converged";
    case Termination::kStalled: return "stalled";
    case Termination::kMaxIterations: return "max-iter";
    case Termination::kLineSearchFailure: return "line-search-failure";
  }
  return "unknown";
}

namespace {

struct Sample {
  double alpha = 0, phi = 0, dphi = 0;
  Eigen::VectorXd x, g;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), kept away from
// the interval ends; falls back to bisection.
double cubic_step(const Sample& a, const Sample& b) {
  const double lo = std::min(a.alpha, b.alpha), hi = std::max(a.alpha, b.alpha);
  const double margin = 0.1 * (hi - lo);
  const double d1 = a.dphi + b.dphi - 3.0 * (a.phi - b.phi) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.dphi * b.dphi;
  double t = 0.5 * (lo + hi);
  if (disc >= 0) {
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.dphi - a.dphi + 2.0 * d2;
    if (denom != 0) {
      const double c = b.alpha - (b.alpha - a.alpha) * (b.dphi + d2 - d1) / denom;
      if (std::isfinite(c)) t = c;
    }
  }
  return std::clamp(t, lo + margin, hi - margin);
}

class LineSearch {
 public:
  LineSearch(const Objective& f, const LbfgsConfig& cfg, const Eigen::VectorXd& x0, double f0,
             const Eigen::VectorXd& dir, double dphi0)
      : f_(f), cfg_(cfg), x0_(x0), dir_(dir) {
    start_.alpha = 0;
    start_.phi = f0;
    start_.dphi = dphi0;
    best_ = start_;
  }

  // Returns true when a strong-Wolfe point was found; `best()` holds the
  // lowest point seen either way.
  bool run(double alpha0) {
    Sample prev = start_;
    double alpha = alpha0;
    for (int i = 0; trials_ < cfg_.max_line_search_trials; ++i) {
      Sample cur = eval(alpha);
      if (!std::isfinite(cur.phi) || !std::isfinite(cur.dphi)) {
        alpha = 0.5 * (prev.alpha + alpha);
        continue;
      }
      if (cur.phi > start_.phi + cfg_.c1 * cur.alpha * start_.dphi || (i > 0 && cur.phi >= prev.phi)) {
        return zoom(prev, cur);
      }
      if (std::abs(cur.dphi) <= -cfg_.c2 * start_.dphi) {
        accepted_ = cur;
        return true;
      }
      if (cur.dphi >= 0) return zoom(cur, prev);
      prev = cur;
      alpha *= 2.0;
    }
    return false;
  }

  const Sample& accepted() const { return accepted_; }
  const Sample& best() const { return best_; }
  int trials() const { return trials_; }

 private:
  Sample eval(double alpha) {
    Sample s;
    s.alpha = alpha;
    s.x = x0_ + alpha * dir_;
    s.g.resize(s.x.size());
    s.phi = f_(s.x, s.g);
    s.dphi = s.g.allFinite() ? s.g.dot(dir_) : std::numeric_limits<double>::quiet_NaN();
    ++trials_;
    if (std::isfinite(s.phi) && std::isfinite(s.dphi) && s.phi < best_.phi) best_ = s;
    return s;
  }

  bool zoom(Sample lo, Sample hi) {
    while (trials_ < cfg_.max_line_search_trials) {
      if (std::abs(hi.alpha - lo.alpha) <= std::numeric_limits<double>::epsilon() * std::abs(lo.alpha)) break;
      Sample cur = eval(cubic_step(lo, hi));
      if (!std::isfinite(cur.phi) || !std::isfinite(cur.dphi) ||
          cur.phi > start_.phi + cfg_.c1 * cur.alpha * start_.dphi || cur.phi >= lo.phi) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.dphi) <= -cfg_.c2 * start_.dphi) {
        accepted_ = std::move(cur);
        return true;
      }
      if (cur.dphi * (hi.alpha - lo.alpha) >= 0) hi = lo;
      lo = std::move(cur);
    }
    return false;
  }

  const Objective& f_;
  const LbfgsConfig& cfg_;
  const Eigen::VectorXd& x0_;
  const Eigen::VectorXd& dir_;
  Sample start_, best_, accepted_;
  int trials_ = 0;
};

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsConfig& cfg) {
  cfg.validate();
  LbfgsResult res;
  res.x = std::move(x0);
  res.gradient.resize(res.x.size());
  res.value = f(res.x, res.gradient);
  res.evaluations = 1;
  if (!std::isfinite(res.value) || !res.gradient.allFinite()) {
    throw NumericError("lbfgs: objective or gradient is not finite at the starting point");
  }
  res.trace.push_back({0, res.value, res.gradient.norm(), 0.0, 1});

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;  // (s, y), oldest first
  std::vector<double> rho_alpha;
  for (int iter = 1;; ++iter) {
    const double gnorm = res.gradient.norm();
    if (gnorm <= cfg.gradient_tolerance) {
      res.termination = Termination::kConverged;
      break;
    }
    if (iter > cfg.max_iterations) {
      res.termination = Termination::kMaxIterations;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = -res.gradient;
    const size_t m = pairs.size();
    rho_alpha.assign(m, 0.0);
    for (size_t i = m; i-- > 0;) {
      const auto& [s, y] = pairs[i];
      rho_alpha[i] = s.dot(q) / y.dot(s);
      q -= rho_alpha[i] * y;
    }
    if (m > 0) {
      const auto& [s, y] = pairs.back();
      q *= s.dot(y) / y.squaredNorm();
    }
    for (size_t i = 0; i < m; ++i) {
      const auto& [s, y] = pairs[i];
      const double beta = y.dot(q) / y.dot(s);
      q += (rho_alpha[i] - beta) * s;
    }
    Eigen::VectorXd dir = std::move(q);
    double dphi0 = res.gradient.dot(dir);
    if (!(dphi0 < 0)) {  // lost descent: restart from steepest descent
      pairs.clear();
      dir = -res.gradient;
      dphi0 = -gnorm * gnorm;
    }
    const double alpha0 = pairs.empty() ? 1.0 / gnorm : 1.0;

    LineSearch ls(f, cfg, res.x, res.value, dir, dphi0);
    const bool ok = ls.run(alpha0);
    res.evaluations += ls.trials();
    const Sample& next = ok ? ls.accepted() : ls.best();
    if (!ok) {
      if (next.alpha > 0) {  // keep the best decrease we saw
        res.x = next.x;
        res.value = next.phi;
        res.gradient = next.g;
        res.iterations = iter;
        res.trace.push_back({iter, res.value, res.gradient.norm(), next.alpha, res.evaluations});
      }
      res.termination = Termination::kLineSearchFailure;
      break;
    }

    Eigen::VectorXd s = next.x - res.x;
    Eigen::VectorXd y = next.g - res.gradient;
    const double prev_value = res.value;
    res.x = next.x;
    res.value = next.phi;
    res.gradient = next.g;
    res.iterations = iter;
    res.trace.push_back({iter, res.value, res.gradient.norm(), next.alpha, res.evaluations});

    if (y.dot(s) > 1e-10 * y.norm() * s.norm()) {
      pairs.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(pairs.size()) > cfg.memory) pairs.pop_front();
    }

    const double scale = std::max({std::abs(prev_value), std::abs(res.value), 1.0});
    if (res.gradient.norm() > cfg.gradient_tolerance &&
        prev_value - res.value <= cfg.relative_decrease_tolerance * scale) {
      res.termination = Termination::kStalled;
      break;
    }
  }
  return res;
}

std::string trace_to_csv(const std::vector<IterationRecord>& trace) {
  std::ostringstream out;
  out << "iteration,objective,gradient_norm,step,evaluations\n";
  for (const auto& r : trace) {
    out << r.iteration << ',' << format_double(r.value) << ',' << format_double(r.gradient_norm) << ','
        << format_double(r.step) << ',' << r.evaluations << '\n';
  }
  return out.str();
}

}  // namespace mfo
