#include "oussm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace oussm {

using Eigen::VectorXd;

namespace {

struct Point {
  double alpha = 0.0;
  double f = std::numeric_limits<double>::infinity();
  double df = 0.0;
  bool has_df = false;
  VectorXd x;
  VectorXd g;
};

class LineSearch {
 public:
  LineSearch(const Objective& f, const LbfgsOptions& opt, int& evals)
      : f_(f), opt_(opt), evals_(evals) {}

  // Returns true and fills `out` when a step with sufficient decrease was
  // found (strong Wolfe when possible).
  bool search(const VectorXd& x, double f0, const VectorXd& g0,
              const VectorXd& d, double alpha0, Point& out) {
    x_ = &x;
    d_ = &d;
    f0_ = f0;
    df0_ = g0.dot(d);
    best_ = Point{};
    Point prev{0.0, f0, df0_, true, x, g0};
    double alpha = alpha0;
    for (int i = 0; i < opt_.max_line_search && budget(); ++i) {
      Point cur = value(alpha);
      if (!std::isfinite(cur.f)) {
        alpha = prev.alpha + 0.25 * (alpha - prev.alpha);
        continue;
      }
      if (cur.f > f0_ + opt_.c1 * alpha * df0_ || (i > 0 && cur.f >= prev.f)) {
        return zoom(prev, cur, out);
      }
      if (!gradient(cur)) {
        alpha = prev.alpha + 0.25 * (alpha - prev.alpha);
        continue;
      }
      note(cur);
      if (std::abs(cur.df) <= -opt_.c2 * df0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.df >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return fallback(out);
  }

 private:
  bool budget() const { return evals_ < opt_.max_evals; }

  Point value(double alpha) {
    Point p;
    p.alpha = alpha;
    p.x = *x_ + alpha * (*d_);
    ++evals_;
    p.f = f_(p.x, nullptr);
    return p;
  }

  bool gradient(Point& p) {
    VectorXd g(p.x.size());
    const double fx = f_(p.x, &g);
    if (!std::isfinite(fx) || !g.allFinite()) return false;
    p.f = fx;
    p.g = std::move(g);
    p.df = p.g.dot(*d_);
    p.has_df = true;
    return true;
  }

  void note(const Point& p) {
    if (p.has_df && p.f < best_.f && p.f <= f0_ + opt_.c1 * p.alpha * df0_) best_ = p;
  }

  bool fallback(Point& out) {
    if (best_.has_df && best_.f < f0_) {
      out = best_;
      return true;
    }
    return false;
  }

  static double trial(const Point& lo, const Point& hi) {
    const double a = lo.alpha, b = hi.alpha, width = b - a;
    double t = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(hi.f)) {
      if (hi.has_df) {
        const double d1 = lo.df + hi.df - 3.0 * (lo.f - hi.f) / (a - b);
        const double disc = d1 * d1 - lo.df * hi.df;
        if (disc >= 0.0) {
          const double d2 = std::copysign(std::sqrt(disc), b - a);
          const double den = hi.df - lo.df + 2.0 * d2;
          if (den != 0.0) t = b - (b - a) * (hi.df + d2 - d1) / den;
        }
      } else {
        const double den = 2.0 * (hi.f - lo.f - lo.df * width);
        if (den > 0.0) t = a - lo.df * width * width / den;
      }
    }
    const double lo_b = std::min(a, b) + 0.1 * std::abs(width);
    const double hi_b = std::max(a, b) - 0.1 * std::abs(width);
    if (!std::isfinite(t) || t < lo_b || t > hi_b) t = 0.5 * (a + b);
    return t;
  }

  bool zoom(Point lo, Point hi, Point& out) {
    for (int j = 0; j < opt_.max_line_search && budget(); ++j) {
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
      Point cur = value(trial(lo, hi));
      if (!std::isfinite(cur.f) || cur.f > f0_ + opt_.c1 * cur.alpha * df0_ ||
          cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      if (!gradient(cur)) {
        cur.f = std::numeric_limits<double>::infinity();
        hi = std::move(cur);
        continue;
      }
      note(cur);
      if (std::abs(cur.df) <= -opt_.c2 * df0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.df * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return fallback(out);
  }

  const Objective& f_;
  const LbfgsOptions& opt_;
  int& evals_;
  const VectorXd* x_ = nullptr;
  const VectorXd* d_ = nullptr;
  double f0_ = 0.0;
  double df0_ = 0.0;
  Point best_;
};

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& f, VectorXd x0,
                           const LbfgsOptions& options) {
  LbfgsResult res;
  res.x = std::move(x0);
  res.grad.resize(res.x.size());
  res.f = f(res.x, &res.grad);
  res.n_evals = 1;
  if (!std::isfinite(res.f) || !res.grad.allFinite()) {
    res.reason = "objective not finite at the starting point";
    return res;
  }

  auto grad_ok = [&] {
    return res.grad.cwiseAbs().maxCoeff() <=
           options.grad_tol * std::max(1.0, std::abs(res.f));
  };

  std::deque<VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  LineSearch ls(f, options, res.n_evals);
  int small_changes = 0;

  while (true) {
    if (grad_ok()) {
      res.converged = true;
      res.reason = "gradient norm below tolerance";
      return res;
    }
    if (res.n_evals >= options.max_evals) {
      res.reason = "evaluation budget exhausted";
      return res;
    }

    // Two-loop recursion.
    VectorXd q = res.grad;
    const std::size_t k = s_hist.size();
    std::vector<double> alpha(k);
    for (std::size_t i = k; i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (k > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < k; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    VectorXd d = -q;
    if (!(d.dot(res.grad) < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -res.grad;
    }

    double step0 = s_hist.empty() ? std::min(1.0, 1.0 / d.norm()) : 1.0;
    Point next;
    bool ok = ls.search(res.x, res.f, res.grad, d, step0, next);
    if (!ok && !s_hist.empty()) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -res.grad;
      step0 = std::min(1.0, 1.0 / d.norm());
      ok = ls.search(res.x, res.f, res.grad, d, step0, next);
    }
    if (!ok) {
      res.converged = grad_ok();
      res.reason = "line search could not find a decrease";
      return res;
    }

    VectorXd s = next.x - res.x;
    VectorXd y = next.g - res.grad;
    const double sy = s.dot(y);
    const double f_prev = res.f;
    res.x = std::move(next.x);
    res.f = next.f;
    res.grad = std::move(next.g);
    ++res.iterations;

    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    if (std::abs(f_prev - res.f) <= options.f_rel_tol * std::max(1.0, std::abs(res.f))) {
      ++small_changes;
    } else {
      small_changes = 0;
    }
    if (small_changes >= std::max(1, options.f_rel_patience)) {
      res.converged = true;
      res.reason = "relative objective change below tolerance";
      return res;
    }
  }
}

}  // namespace oussm
