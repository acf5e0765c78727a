#include "affordmap/affordance/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/LU>

namespace affordmap::affordance {

namespace {

struct Corners {
  env::Point2 p00, p10, p01, p11;
};

Corners corners(const proposer::OutcomeGrid& outcomes, const proposer::AffordanceGrid& grid, std::size_t c0,
                std::size_t c1) {
  const std::size_t k = grid.side();
  if (grid.dim() != 2) throw std::invalid_argument("bilinear interpolation needs a two-dimensional grid");
  if (c0 + 1 >= k || c1 + 1 >= k) throw std::out_of_range("cell index outside the grid");
  const auto at = [&](std::size_t i, std::size_t j) { return outcomes.point(i + k * j); };
  return {at(c0, c1), at(c0 + 1, c1), at(c0, c1 + 1), at(c0 + 1, c1 + 1)};
}

env::Point2 eval(const Corners& c, double u, double v) {
  return (1 - u) * (1 - v) * c.p00 + u * (1 - v) * c.p10 + (1 - u) * v * c.p01 + u * v * c.p11;
}

Eigen::Matrix2d jacobian(const Corners& c, double u, double v) {
  Eigen::Matrix2d j;
  j.col(0) = (1 - v) * (c.p10 - c.p00) + v * (c.p11 - c.p01);
  j.col(1) = (1 - u) * (c.p01 - c.p00) + u * (c.p11 - c.p10);
  return j;
}

}  // namespace

env::Point2 bilinear_point(const proposer::OutcomeGrid& outcomes, const proposer::AffordanceGrid& grid,
                           std::size_t c0, std::size_t c1, double u, double v) {
  return eval(corners(outcomes, grid, c0, c1), u, v);
}

double cell_orientation(const proposer::OutcomeGrid& outcomes, const proposer::AffordanceGrid& grid, std::size_t c0,
                        std::size_t c1) {
  return jacobian(corners(outcomes, grid, c0, c1), 0.5, 0.5).determinant();
}

Eigen::Vector2d invert_cell(const proposer::OutcomeGrid& outcomes, const proposer::AffordanceGrid& grid,
                            std::size_t c0, std::size_t c1, const env::Point2& target, std::size_t iterations) {
  const Corners c = corners(outcomes, grid, c0, c1);
  Eigen::Vector2d uv(0.5, 0.5);
  for (std::size_t it = 0; it < iterations; ++it) {
    const env::Point2 r = eval(c, uv.x(), uv.y()) - target;
    if (r.norm() < 1e-15) break;
    const Eigen::Matrix2d j = jacobian(c, uv.x(), uv.y());
    Eigen::Vector2d step;
    const double det = j.determinant();
    if (std::abs(det) > 1e-12 * std::max(1.0, j.squaredNorm())) {
      step = -j.inverse() * r;
    } else {
      // singular: steepest descent on |r|^2 with a Gauss-Newton step length
      const Eigen::Vector2d g = j.transpose() * r;
      const double jg = (j * g).squaredNorm();
      if (jg <= 0.0) break;
      step = -(g.squaredNorm() / jg) * g;
    }
    uv = (uv + step).cwiseMax(0.0).cwiseMin(1.0);
  }
  return uv;
}

InterpolationResult interpolate_affordance(const env::Point2& target, const proposer::OutcomeGrid& outcomes,
                                           const proposer::AffordanceGrid& grid, double r_max) {
  if (grid.dim() != 2) throw std::invalid_argument("bilinear interpolation needs a two-dimensional grid");
  if (outcomes.size() != grid.size()) throw std::invalid_argument("outcome grid does not match the affordance grid");
  const std::size_t k = grid.side();
  const std::size_t cells = k - 1;

  std::vector<double> orient(cells * cells);
  std::size_t positive = 0;
  std::size_t negative = 0;
  for (std::size_t c1 = 0; c1 < cells; ++c1) {
    for (std::size_t c0 = 0; c0 < cells; ++c0) {
      const double d = cell_orientation(outcomes, grid, c0, c1);
      orient[c0 + cells * c1] = d;
      if (d > 0) ++positive;
      if (d < 0) ++negative;
    }
  }
  // A grid mirrored as a whole is not folded; only cells that disagree with
  // the majority orientation are.
  const double sign = negative > positive ? -1.0 : 1.0;

  InterpolationResult best;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::size_t c1 = 0; c1 < cells; ++c1) {
    for (std::size_t c0 = 0; c0 < cells; ++c0) {
      if (sign * orient[c0 + cells * c1] <= 0.0) continue;
      const Eigen::Vector2d uv = invert_cell(outcomes, grid, c0, c1, target);
      const double res = (bilinear_point(outcomes, grid, c0, c1, uv.x(), uv.y()) - target).norm();
      if (res < best.residual) {
        best.residual = res;
        best.cell = c0 + cells * c1;
        best.omega = grid.vertex(c0 + k * c1) + grid.spacing() * uv;
      }
    }
  }
  // A measured outcome beats any interpolated one: on a clustered or
  // overlapping grid another patch can pass through the same point.
  const double hit_tol = 1e-12 * std::max(1.0, target.norm());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if ((outcomes.point(i) - target).norm() > hit_tol) continue;
    const std::size_t v0 = i % k, v1 = i / k;
    InterpolationResult hit;
    hit.omega = grid.vertex(i);
    hit.cell = std::min(v0, cells - 1) + cells * std::min(v1, cells - 1);
    hit.residual = (outcomes.point(i) - target).norm();
    return hit;
  }
  if (best.residual < r_max) {
    best.omega = best.omega.cwiseMax(-1.0).cwiseMin(1.0);
    return best;
  }

  InterpolationResult fb;
  fb.fallback = true;
  fb.residual = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const double d = (outcomes.point(i) - target).norm();
    if (d < fb.residual) {
      fb.residual = d;
      fb.cell = i;
      fb.omega = grid.vertex(i);
    }
  }
  return fb;
}

ReachResult reach(const env::Point2& target, const proposer::Proposer& net, const env::Task& task,
                  const env::World& start, const proposer::OutcomeGrid& outcomes,
                  const proposer::AffordanceGrid& grid, double r_max, Rng& rng) {
  if (!target.allFinite()) throw std::invalid_argument("reach target must be finite");
  ReachResult out;
  out.interpolation = interpolate_affordance(target, outcomes, grid, r_max);
  auto world = start.clone();
  for (std::size_t t = 0; t < task.horizon(); ++t) {
    world->step(proposer::propose(net, world->sensor(), out.interpolation.omega), rng);
  }
  out.achieved = world->outcome();
  out.error = (out.achieved - target).norm();
  return out;
}

}  // namespace affordmap::affordance
