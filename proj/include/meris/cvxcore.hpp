#pragma once

#include "meris/types.hpp"

#include <functional>

namespace meris::cvx {

// Smooth concave objective to MAXIMIZE. A missing hessian callback means the
// objective is linear (zero curvature).
struct Objective {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;

  static Objective linear(Vec c);
};

// maximize f(x)  s.t.  G x <= h,  lower <= x <= upper,  ||x - center|| <= radius.
// Box entries may be +-infinity; the ball is optional.
struct Problem {
  Objective obj;
  Mat G;      // may have zero rows
  Vec h;
  Vec lower;
  Vec upper;
  bool has_ball = false;
  Vec ball_center;
  double ball_radius = 0.0;

  int dim() const { return static_cast<int>(lower.size()); }
};

enum class Status {
  kOptimal,
  kMaxIterations,  // best feasible iterate returned
  kDegenerate,     // feasible set has (numerically) empty interior
  kInfeasible,
};

struct Solution {
  Vec x;
  Status status = Status::kInfeasible;
  double objective = 0.0;
  double gap = 0.0;  // barrier duality-gap bound at the returned point
};

// Log-barrier interior-point solver with a phase-1 strict-feasibility search.
// Deterministic: no randomized restarts, fixed iteration order. `start`, when
// given, must be feasible (it seeds phase 1 and is the kDegenerate fallback).
Solution solve(const Problem& prob, double tol, const Vec* start = nullptr);

} // namespace meris::cvx
