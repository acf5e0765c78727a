#include "affordmap/env/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace affordmap::env {

double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

bool disc_intersects_square(const Point2& center, double radius, double x0, double y0, double side) {
  const double qx = std::clamp(center.x(), x0, x0 + side);
  const double qy = std::clamp(center.y(), y0, y0 + side);
  const double dx = qx - center.x();
  const double dy = qy - center.y();
  return dx * dx + dy * dy <= radius * radius;
}

namespace {
double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}
}  // namespace

std::vector<Point2> convex_hull(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) { return a == b; }), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point2& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(std::span<const Point2> polygon) {
  if (polygon.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point2& a = polygon[i];
    const Point2& b = polygon[(i + 1) % polygon.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(twice);
}

double convex_hull_area(std::span<const Point2> points) {
  const auto hull = convex_hull(points);
  return polygon_area(hull);
}

bool point_in_convex_polygon(const Point2& p, std::span<const Point2> ccw_polygon) {
  if (ccw_polygon.size() < 3) return false;
  for (std::size_t i = 0; i < ccw_polygon.size(); ++i) {
    if (cross(ccw_polygon[i], ccw_polygon[(i + 1) % ccw_polygon.size()], p) < 0) return false;
  }
  return true;
}

}  // namespace affordmap::env
