#pragma once

#include <array>
#include <string>
#include <vector>

#include "hjnav/env.hpp"
#include "hjnav/sim.hpp"

namespace hjnav {

using ContourSegment = std::array<Vec2, 2>;

/// Marching-squares segments of the `level` iso-line of a 2D value slice.
/// `values(ix, iy)` indexed over the position sub-grid of `grid`.
std::vector<ContourSegment> contour_segments(const StateGrid& grid,
                                             const std::vector<double>& slice, double level);

/// Trajectory over obstacles: planner-mode samples in blue, safety-mode in
/// red, goal disk, initial known-free circle.
void plot_trajectory(const Environment& env, const Trajectory& traj, const Vec2& start,
                     double init_free_radius, const std::string& path);

struct SliceRender {
  std::size_t contour_segment_count = 0;
  bool entire_slice_safe = false;
};

/// Epsilon-level contour of a value slice at fixed non-position indices.
SliceRender plot_value_slice(const ScalarField& field, const std::array<int, kMaxDim>& fixed,
                             double epsilon, const Environment* env, const std::string& path);

}  // namespace hjnav
