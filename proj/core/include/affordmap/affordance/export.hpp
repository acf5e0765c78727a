#pragma once

#include <iosfwd>

#include "affordmap/affordance/metrics.hpp"
#include "affordmap/proposer/grid.hpp"

namespace affordmap::affordance {

/// Header plus one row per vertex: omega_0..omega_{n-1}, x, y, sigma, source.
/// sigma is empty for environment-sourced grids.
void write_grid_csv(std::ostream& out, const proposer::AffordanceGrid& grid, const proposer::OutcomeGrid& outcomes);

/// metric,value rows.
void write_metrics_csv(std::ostream& out, const GridMetrics& metrics);

/// key=value lines.
void write_metrics_kv(std::ostream& out, const GridMetrics& metrics, const char* prefix = "");

/// Scatter plot, one circle per vertex, red/green channels from omega.
/// Grid edges are drawn as light lines underneath.
void write_grid_svg(std::ostream& out, const proposer::AffordanceGrid& grid, const proposer::OutcomeGrid& outcomes,
                    double half_extent);

}  // namespace affordmap::affordance
