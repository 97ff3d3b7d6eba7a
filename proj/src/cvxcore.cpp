#include "meris/cvxcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

namespace meris::cvx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStrictMargin = 1e-12;
constexpr int kMaxNewton = 80;
constexpr int kMaxStages = 48;
constexpr double kMu = 20.0;

Vec zero_or(const std::function<Vec(const Vec&)>& f, const Vec& x) {
  return f ? f(x) : Vec::Zero(x.size());
}

// Inequalities in the canonical order: normalized linear rows, finite lower
// bounds, finite upper bounds, ball.
struct Workspace {
  const Problem& P;
  Mat G;  // row-normalized
  Vec h;
  std::vector<int> lo, up;

  explicit Workspace(const Problem& prob) : P(prob) {
    const int ml = static_cast<int>(prob.G.rows());
    G = prob.G;
    h = prob.h;
    for (int i = 0; i < ml; ++i) {
      const double s = G.row(i).cwiseAbs().maxCoeff();
      if (s > 0) {
        G.row(i) /= s;
        h[i] /= s;
      }
    }
    for (int j = 0; j < prob.dim(); ++j) {
      if (std::isfinite(prob.lower[j])) lo.push_back(j);
      if (std::isfinite(prob.upper[j])) up.push_back(j);
    }
  }

  int count() const {
    return static_cast<int>(G.rows() + lo.size() + up.size() + (P.has_ball ? 1 : 0));
  }

  Vec margins(const Vec& x) const {
    Vec g(count());
    int i = 0;
    if (G.rows() > 0) g.head(G.rows()) = G * x - h;
    i += static_cast<int>(G.rows());
    for (int j : lo) g[i++] = P.lower[j] - x[j];
    for (int j : up) g[i++] = x[j] - P.upper[j];
    if (P.has_ball)
      g[i++] = 0.5 * ((x - P.ball_center).squaredNorm() -
                      P.ball_radius * P.ball_radius);
    return g;
  }

  // grad += sum_i w1[i] * grad g_i;  hess += sum_i w2[i] * grad g_i grad g_i^T
  // + (ball only) w1[ball] * I.
  void accumulate(const Vec& x, const Vec& w1, const Vec& w2, Vec& grad,
                  Mat& hess, bool want_hess) const {
    const int ml = static_cast<int>(G.rows());
    int i = 0;
    if (ml > 0) {
      grad.noalias() += G.transpose() * w1.head(ml);
      if (want_hess)
        hess.noalias() += G.transpose() * w2.head(ml).asDiagonal() * G;
    }
    i += ml;
    for (int j : lo) {
      grad[j] -= w1[i];
      if (want_hess) hess(j, j) += w2[i];
      ++i;
    }
    for (int j : up) {
      grad[j] += w1[i];
      if (want_hess) hess(j, j) += w2[i];
      ++i;
    }
    if (P.has_ball) {
      const Vec d = x - P.ball_center;
      grad.noalias() += w1[i] * d;
      if (want_hess) {
        hess.noalias() += w2[i] * d * d.transpose();
        hess.diagonal().array() += w1[i];  // hessian of the ball constraint
      }
      ++i;
    }
  }
};

Vec newton_direction(Mat& H, const Vec& grad) {
  const double reg = 1e-12 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
  H.diagonal().array() += reg;
  Eigen::LDLT<Mat> ldlt(H);
  return ldlt.solve(-grad);
}

// Damped-Newton centering for phi(x) = t * (-f(x)) - sum log(-g_i(x)).
// Returns false if the iterate could not be improved (numerical stall).
void center(const Workspace& W, const Objective& obj, double t, Vec& x) {
  const int n = static_cast<int>(x.size());
  for (int it = 0; it < kMaxNewton; ++it) {
    const Vec g = W.margins(x);
    const Vec r = (-g.array()).inverse().matrix();  // 1 / (-g_i) > 0

    Vec grad = -t * obj.gradient(x);
    Mat hess = obj.hessian ? (-t * obj.hessian(x)).eval() : Mat::Zero(n, n);
    W.accumulate(x, r, r.cwiseProduct(r), grad, hess, true);

    const Vec d = newton_direction(hess, grad);
    const double dec = -grad.dot(d);
    if (!(dec > 2e-10 * std::max(1.0, t))) return;

    auto phi = [&](const Vec& y) {
      const Vec gy = W.margins(y);
      if ((gy.array() >= -kStrictMargin).any()) return kInf;
      return -t * obj.value(y) - (-gy.array()).log().sum();
    };
    const double phi0 = -t * obj.value(x) - (-g.array()).log().sum();
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vec y = x + alpha * d;
      const double phiy = phi(y);
      if (phiy <= phi0 + 0.1 * alpha * grad.dot(d)) {
        x = y;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return;
  }
}

// Phase 1: minimize s subject to g_i(x) <= s, early-exiting once a strictly
// interior point is in hand. Returns the achieved s.
double phase1(const Workspace& W, Vec& x, double early_slack) {
  const int n = static_cast<int>(x.size());
  const int m = W.count();
  Vec g = W.margins(x);
  double s = g.maxCoeff();
  s += std::max(1.0, 0.1 * std::abs(s));

  double t = 1.0;
  for (int stage = 0; stage < kMaxStages; ++stage) {
    for (int it = 0; it < kMaxNewton; ++it) {
      g = W.margins(x);
      const Vec r = (s - g.array()).inverse().matrix();

      Vec grad_x = Vec::Zero(n);
      Mat hess_xx = Mat::Zero(n, n);
      W.accumulate(x, r, r.cwiseProduct(r), grad_x, hess_xx, true);
      const double grad_s = t - r.sum();
      const Vec hess_xs = [&] {
        Vec v = Vec::Zero(n);
        Mat dummy;
        W.accumulate(x, -r.cwiseProduct(r), Vec::Zero(m), v, dummy, false);
        return v;
      }();
      const double hess_ss = r.cwiseProduct(r).sum();

      Mat H(n + 1, n + 1);
      H.topLeftCorner(n, n) = hess_xx;
      H.topRightCorner(n, 1) = hess_xs;
      H.bottomLeftCorner(1, n) = hess_xs.transpose();
      H(n, n) = hess_ss;
      Vec grad(n + 1);
      grad.head(n) = grad_x;
      grad[n] = grad_s;

      const Vec d = newton_direction(H, grad);
      const double dec = -grad.dot(d);
      if (!(dec > 2e-10 * std::max(1.0, t))) break;

      auto phi = [&](const Vec& y, double sy) {
        const Vec gy = W.margins(y);
        if (((sy - gy.array()) <= kStrictMargin).any()) return kInf;
        return t * sy - (sy - gy.array()).log().sum();
      };
      const double phi0 = t * s - (s - g.array()).log().sum();
      double alpha = 1.0;
      for (int ls = 0; ls < 60; ++ls) {
        const Vec y = x + alpha * d.head(n);
        const double sy = s + alpha * d[n];
        if (phi(y, sy) <= phi0 + 0.1 * alpha * grad.dot(d)) {
          x = y;
          s = sy;
          break;
        }
        alpha *= 0.5;
      }
      if (s <= -early_slack) return s;
    }
    if (s <= -early_slack || static_cast<double>(m) / t <= 1e-10) return s;
    t *= kMu;
  }
  return s;
}

} // namespace

Objective Objective::linear(Vec c) {
  auto cp = std::make_shared<Vec>(std::move(c));
  Objective o;
  o.value = [cp](const Vec& x) { return cp->dot(x); };
  o.gradient = [cp](const Vec& x) {
    (void)x;
    return *cp;
  };
  o.hessian = nullptr;
  return o;
}

Solution solve(const Problem& prob, double tol, const Vec* start) {
  if (prob.dim() <= 0) throw std::invalid_argument("cvx::solve: empty problem");
  if (prob.G.rows() != prob.h.size() ||
      (prob.G.rows() > 0 && prob.G.cols() != prob.dim()))
    throw std::invalid_argument("cvx::solve: inconsistent half-space dimensions");

  Workspace W(prob);
  const int m = W.count();
  if (m == 0) throw std::invalid_argument("cvx::solve: unconstrained problem");

  // Candidate start: supplied point, nudged off box faces; else ball center
  // or box midpoint.
  Vec x0(prob.dim());
  if (start) {
    x0 = *start;
  } else if (prob.has_ball) {
    x0 = prob.ball_center;
  } else {
    for (int j = 0; j < prob.dim(); ++j) {
      const double l = prob.lower[j], u = prob.upper[j];
      if (std::isfinite(l) && std::isfinite(u)) x0[j] = 0.5 * (l + u);
      else if (std::isfinite(l)) x0[j] = l + 1.0;
      else if (std::isfinite(u)) x0[j] = u - 1.0;
      else x0[j] = 0.0;
    }
  }
  Vec x = x0;
  for (int j = 0; j < prob.dim(); ++j) {
    const double l = prob.lower[j], u = prob.upper[j];
    if (std::isfinite(l) && std::isfinite(u)) {
      const double eps = 1e-9 * std::max(1.0, u - l);
      x[j] = std::min(std::max(x[j], l + eps), u - eps);
    }
  }

  if (!(W.margins(x).maxCoeff() < -kStrictMargin)) {
    x = x0;
    const double s = phase1(W, x, 1e-8);
    if (s > -kStrictMargin) {
      Solution sol;
      if (start && W.margins(*start).maxCoeff() <= tol) {
        sol.x = *start;
        sol.status = Status::kDegenerate;
        sol.objective = prob.obj.value(*start);
        sol.gap = kInf;
      } else {
        sol.status = Status::kInfeasible;
      }
      return sol;
    }
  }

  const double scale = std::max(1.0, std::abs(prob.obj.value(x)));
  double t = std::max(1.0, static_cast<double>(m) / scale);
  int stage = 0;
  for (; stage < kMaxStages; ++stage) {
    center(W, prob.obj, t, x);
    if (static_cast<double>(m) / t <= tol) break;
    t *= kMu;
  }

  Solution sol;
  sol.x = x;
  sol.objective = prob.obj.value(x);
  sol.gap = static_cast<double>(m) / t;
  sol.status = (sol.gap <= tol) ? Status::kOptimal : Status::kMaxIterations;
  return sol;
}

} // namespace meris::cvx
