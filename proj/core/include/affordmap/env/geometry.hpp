#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace affordmap::env {

using Point2 = Eigen::Vector2d;

/// Euclidean metric on the 2D target space.
double distance(const Point2& a, const Point2& b);

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);

/// Closed axis-aligned square [x0, x0 + side] x [y0, y0 + side] vs closed disc.
bool disc_intersects_square(const Point2& center, double radius, double x0, double y0, double side);

/// Andrew's monotone chain. Counter-clockwise, no repeated first vertex,
/// collinear points dropped. Fewer than three distinct points give a
/// degenerate hull (returned as-is, deduplicated).
std::vector<Point2> convex_hull(std::span<const Point2> points);

/// Shoelace formula, absolute value.
double polygon_area(std::span<const Point2> polygon);

double convex_hull_area(std::span<const Point2> points);

/// Point in a counter-clockwise convex polygon (boundary counts as inside).
bool point_in_convex_polygon(const Point2& p, std::span<const Point2> ccw_polygon);

}  // namespace affordmap::env
