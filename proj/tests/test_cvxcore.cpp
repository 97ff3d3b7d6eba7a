#include <doctest.h>

#include "meris/cvxcore.hpp"
#include "meris/rng.hpp"

#include <limits>
#include <vector>

using namespace meris;
using cvx::Problem;
using cvx::Solution;
using cvx::Status;

namespace {

Problem box_problem(const Vec& c, const Vec& lower, const Vec& upper) {
  Problem p;
  p.obj = cvx::Objective::linear(c);
  p.G = Mat::Zero(0, c.size());
  p.h = Vec::Zero(0);
  p.lower = lower;
  p.upper = upper;
  return p;
}

} // namespace

TEST_CASE("linear objective over a box picks bounds by sign") {
  Vec c(4), lo(4), hi(4);
  c << 3.0, -1.5, 0.25, -7.0;
  lo << -1.0, -2.0, 0.0, 0.5;
  hi << 2.0, 1.0, 4.0, 3.0;
  const Solution s = cvx::solve(box_problem(c, lo, hi), 1e-9);
  CHECK(s.status == Status::kOptimal);
  CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.x[1] == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(s.x[2] == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(s.x[3] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("linear objective over the unit ball gives c/|c|") {
  Vec c(3);
  c << 1.0, -2.0, 2.0;
  Problem p;
  p.obj = cvx::Objective::linear(c);
  p.G = Mat::Zero(0, 3);
  p.h = Vec::Zero(0);
  const double inf = std::numeric_limits<double>::infinity();
  p.lower = Vec::Constant(3, -inf);
  p.upper = Vec::Constant(3, inf);
  p.has_ball = true;
  p.ball_center = Vec::Zero(3);
  p.ball_radius = 1.0;
  const Solution s = cvx::solve(p, 1e-10);
  CHECK(s.status == Status::kOptimal);
  CHECK((s.x - c / c.norm()).norm() < 1e-5);
}

TEST_CASE("random LPs match a vertex-enumeration oracle") {
  Rng rng(101);
  const int dim = 5;
  for (int inst = 0; inst < 20; ++inst) {
    Mat G(8, dim);
    Vec h(8);
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < dim; ++j) G(i, j) = rng.normal();
      h[i] = rng.uniform(0.5, 2.0);  // strictly positive: origin feasible
    }
    Vec c(dim);
    for (int j = 0; j < dim; ++j) c[j] = rng.normal();
    Problem p;
    p.obj = cvx::Objective::linear(c);
    p.G = G;
    p.h = h;
    p.lower = Vec::Constant(dim, -3.0);
    p.upper = Vec::Constant(dim, 3.0);

    const Solution s = cvx::solve(p, 1e-9);
    REQUIRE(s.status == Status::kOptimal);

    // Oracle: enumerate all vertices (intersections of dim active rows among
    // the 8 half-spaces plus the 10 box faces), keep feasible ones.
    Mat rows(18, dim);
    Vec rhs(18);
    rows.topRows(8) = G;
    rhs.head(8) = h;
    for (int j = 0; j < dim; ++j) {
      rows.row(8 + j).setZero();
      rows(8 + j, j) = 1.0;
      rhs[8 + j] = 3.0;
      rows.row(13 + j).setZero();
      rows(13 + j, j) = -1.0;
      rhs[13 + j] = 3.0;
    }
    double best = -1e300;
    std::vector<int> idx(dim);
    auto feasible = [&](const Vec& x) {
      return ((rows * x - rhs).array() <= 1e-8).all();
    };
    // choose(18, 5) subsets
    for (idx[0] = 0; idx[0] < 18; ++idx[0])
      for (idx[1] = idx[0] + 1; idx[1] < 18; ++idx[1])
        for (idx[2] = idx[1] + 1; idx[2] < 18; ++idx[2])
          for (idx[3] = idx[2] + 1; idx[3] < 18; ++idx[3])
            for (idx[4] = idx[3] + 1; idx[4] < 18; ++idx[4]) {
              Mat A(dim, dim);
              Vec b(dim);
              for (int r = 0; r < dim; ++r) {
                A.row(r) = rows.row(idx[r]);
                b[r] = rhs[idx[r]];
              }
              const Eigen::FullPivLU<Mat> lu(A);
              if (!lu.isInvertible()) continue;
              const Vec x = lu.solve(b);
              if (feasible(x)) best = std::max(best, c.dot(x));
            }
    CHECK(s.objective == doctest::Approx(best).epsilon(1e-6));
    // returned point beats any feasible reference (origin) minus tolerance
    CHECK(s.objective >= 0.0 - 1e-6);
  }
}

TEST_CASE("smooth concave maximization clamps to the box") {
  // maximize -||x - x0||^2 with x0 partially outside the box
  Vec x0(3);
  x0 << 0.5, 4.0, -2.0;
  Problem p;
  p.obj.value = [&](const Vec& x) { return -(x - x0).squaredNorm(); };
  p.obj.gradient = [&](const Vec& x) { return Vec(-2.0 * (x - x0)); };
  p.obj.hessian = [&](const Vec& x) {
    return Mat(-2.0 * Mat::Identity(x.size(), x.size()));
  };
  p.G = Mat::Zero(0, 3);
  p.h = Vec::Zero(0);
  p.lower = Vec::Constant(3, -1.0);
  p.upper = Vec::Constant(3, 1.0);
  const Solution s = cvx::solve(p, 1e-9);
  CHECK(s.status == Status::kOptimal);
  CHECK(s.x[0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(s.x[1] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(s.x[2] == doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("infeasible problems are flagged") {
  Mat G(2, 1);
  Vec h(2);
  G << 1.0, -1.0;
  h << -1.0, -1.0;  // x <= -1 and x >= 1
  Problem p;
  p.obj = cvx::Objective::linear(Vec::Ones(1));
  p.G = G;
  p.h = h;
  p.lower = Vec::Constant(1, -5.0);
  p.upper = Vec::Constant(1, 5.0);
  const Solution s = cvx::solve(p, 1e-8);
  CHECK(s.status == Status::kInfeasible);
}

TEST_CASE("solver is deterministic") {
  Rng rng(7);
  Mat G(6, 4);
  Vec h(6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 4; ++j) G(i, j) = rng.normal();
    h[i] = rng.uniform(0.5, 1.5);
  }
  Vec c(4);
  for (int j = 0; j < 4; ++j) c[j] = rng.normal();
  Problem p;
  p.obj = cvx::Objective::linear(c);
  p.G = G;
  p.h = h;
  p.lower = Vec::Constant(4, -2.0);
  p.upper = Vec::Constant(4, 2.0);
  const Solution a = cvx::solve(p, 1e-9);
  const Solution b = cvx::solve(p, 1e-9);
  CHECK(a.x == b.x);
  CHECK(a.objective == b.objective);
}
