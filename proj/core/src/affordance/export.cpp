#include "affordmap/affordance/export.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace affordmap::affordance {

namespace {

// Round-trip precision, so CSVs are exact and stable across runs.
struct Precise {
  std::ostream& out;
  std::ios_base::fmtflags flags;
  std::streamsize precision;
  explicit Precise(std::ostream& o) : out(o), flags(o.flags()), precision(o.precision()) {
    out << std::setprecision(17) << std::defaultfloat;
  }
  ~Precise() {
    out.flags(flags);
    out.precision(precision);
  }
};

int channel(double omega) { return static_cast<int>(std::lround(std::clamp((omega + 1.0) * 0.5, 0.0, 1.0) * 255.0)); }

}  // namespace

void write_grid_csv(std::ostream& out, const proposer::AffordanceGrid& grid, const proposer::OutcomeGrid& outcomes) {
  Precise guard(out);
  for (std::size_t d = 0; d < grid.dim(); ++d) out << "omega" << d << ',';
  out << "x,y,sigma,source\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd w = grid.vertex(i);
    for (Eigen::Index d = 0; d < w.size(); ++d) out << w[d] << ',';
    const auto p = outcomes.point(i);
    out << p.x() << ',' << p.y() << ',';
    if (outcomes.has_sigma()) out << outcomes.sigma[static_cast<Eigen::Index>(i)];
    out << ',' << proposer::to_string(outcomes.source) << '\n';
  }
}

void write_metrics_csv(std::ostream& out, const GridMetrics& m) {
  Precise guard(out);
  out << "metric,value\n";
  out << "min_pairwise," << m.min_pairwise << '\n';
  out << "mean_neighbor," << m.mean_neighbor << '\n';
  out << "hull_area," << m.hull_area << '\n';
  out << "coverage_fraction," << m.coverage_fraction << '\n';
  if (m.has_prediction) out << "prediction_rmse," << m.prediction_rmse << '\n';
}

void write_metrics_kv(std::ostream& out, const GridMetrics& m, const char* prefix) {
  out << prefix << "min_pairwise=" << m.min_pairwise << '\n';
  out << prefix << "mean_neighbor=" << m.mean_neighbor << '\n';
  out << prefix << "hull_area=" << m.hull_area << '\n';
  out << prefix << "coverage_fraction=" << m.coverage_fraction << '\n';
  if (m.has_prediction) out << prefix << "prediction_rmse=" << m.prediction_rmse << '\n';
}

void write_grid_svg(std::ostream& out, const proposer::AffordanceGrid& grid, const proposer::OutcomeGrid& outcomes,
                    double half_extent) {
  constexpr double size = 480.0;
  const double scale = size / (2.0 * half_extent);
  const auto sx = [&](double x) { return (x + half_extent) * scale; };
  const auto sy = [&](double y) { return (half_extent - y) * scale; };
  Precise guard(out);
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
      << size << ' ' << size << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<g stroke=\"#cccccc\" stroke-width=\"1\">\n";
  for (const auto& [a, b] : grid.edges()) {
    const auto p = outcomes.point(a);
    const auto q = outcomes.point(b);
    out << "<line x1=\"" << sx(p.x()) << "\" y1=\"" << sy(p.y()) << "\" x2=\"" << sx(q.x()) << "\" y2=\"" << sy(q.y())
        << "\"/>\n";
  }
  out << "</g>\n<g stroke=\"black\" stroke-width=\"0.5\">\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto p = outcomes.point(i);
    const Eigen::VectorXd w = grid.vertex(i);
    const int g = w.size() > 1 ? channel(w[1]) : 0;
    out << "<circle cx=\"" << sx(p.x()) << "\" cy=\"" << sy(p.y()) << "\" r=\"4\" fill=\"rgb(" << channel(w[0]) << ','
        << g << ",128)\"/>\n";
  }
  out << "</g>\n</svg>\n";
}

}  // namespace affordmap::affordance
