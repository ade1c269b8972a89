#include "hjnav/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hjnav {

namespace {

class SvgCanvas {
 public:
  SvgCanvas(Vec2 world_min, Vec2 world_max, int px_width)
      : wmin_(world_min), wmax_(world_max) {
    const double aspect = (wmax_[1] - wmin_[1]) / (wmax_[0] - wmin_[0]);
    w_ = px_width;
    h_ = static_cast<int>(std::lround(px_width * aspect));
    scale_ = (w_ - 2.0 * margin_) / (wmax_[0] - wmin_[0]);
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
        << "\" viewBox=\"0 0 " << w_ << " " << h_ << "\">\n";
    os_ << "<rect x=\"0\" y=\"0\" width=\"" << w_ << "\" height=\"" << h_
        << "\" fill=\"white\"/>\n";
  }

  double px(double x) const { return margin_ + (x - wmin_[0]) * scale_; }
  double py(double y) const { return h_ - margin_ - (y - wmin_[1]) * scale_; }

  void rect(const Vec2& lo, const Vec2& hi, const std::string& fill,
            const std::string& stroke = "none") {
    os_ << "<rect x=\"" << px(lo[0]) << "\" y=\"" << py(hi[1]) << "\" width=\""
        << (hi[0] - lo[0]) * scale_ << "\" height=\"" << (hi[1] - lo[1]) * scale_ << "\" fill=\""
        << fill << "\" stroke=\"" << stroke << "\"/>\n";
  }

  void circle(const Vec2& c, double r, const std::string& fill, const std::string& stroke = "none",
              const std::string& dash = "") {
    os_ << "<circle cx=\"" << px(c[0]) << "\" cy=\"" << py(c[1]) << "\" r=\"" << r * scale_
        << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"";
    if (!dash.empty()) os_ << " stroke-dasharray=\"" << dash << "\"";
    os_ << "/>\n";
  }

  void dot(const Vec2& c, double rpx, const std::string& fill) {
    os_ << "<circle cx=\"" << px(c[0]) << "\" cy=\"" << py(c[1]) << "\" r=\"" << rpx
        << "\" fill=\"" << fill << "\"/>\n";
  }

  void polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width) {
    if (pts.size() < 2) return;
    os_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width
        << "\" points=\"";
    for (const auto& p : pts) os_ << px(p[0]) << "," << py(p[1]) << " ";
    os_ << "\"/>\n";
  }

  void segment(const Vec2& a, const Vec2& b, const std::string& stroke, double width) {
    os_ << "<line x1=\"" << px(a[0]) << "\" y1=\"" << py(a[1]) << "\" x2=\"" << px(b[0])
        << "\" y2=\"" << py(b[1]) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width
        << "\"/>\n";
  }

  void text(const Vec2& at, const std::string& s) {
    os_ << "<text x=\"" << px(at[0]) << "\" y=\"" << py(at[1])
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s << "</text>\n";
  }

  void save(const std::string& path) {
    os_ << "</svg>\n";
    std::ofstream f(path);
    if (!f) throw std::runtime_error("svg: cannot open " + path);
    f << os_.str();
  }

 private:
  Vec2 wmin_, wmax_;
  int w_ = 0, h_ = 0;
  double margin_ = 20.0;
  double scale_ = 1.0;
  std::ostringstream os_;
};

void draw_environment(SvgCanvas& c, const Environment& env) {
  c.rect(env.workspace_min, env.workspace_max, "none", "#444444");
  for (const auto& o : env.obstacles) {
    if (o.shape == Obstacle::Shape::Rect)
      c.rect(o.rect_min, o.rect_max, "#9a9a9a");
    else
      c.circle(o.center, o.radius, "#9a9a9a");
  }
  c.circle(env.goal.center, env.goal.radius, "#b8e6b8", "#2e8b2e");
}

}  // namespace

std::vector<ContourSegment> contour_segments(const StateGrid& grid,
                                             const std::vector<double>& slice, double level) {
  const int nx = grid.node_counts[0], ny = grid.node_counts[1];
  if (static_cast<int>(slice.size()) != nx * ny)
    throw std::invalid_argument("contour_segments: slice size mismatch");
  auto at = [&](int ix, int iy) { return slice[static_cast<std::size_t>(ix) * ny + iy]; };
  auto xc = [&](int i) { return grid.coord(0, i); };
  auto yc = [&](int i) { return grid.coord(1, i); };

  std::vector<ContourSegment> segs;
  for (int ix = 0; ix + 1 < nx; ++ix) {
    for (int iy = 0; iy + 1 < ny; ++iy) {
      const double v00 = at(ix, iy) - level, v10 = at(ix + 1, iy) - level;
      const double v01 = at(ix, iy + 1) - level, v11 = at(ix + 1, iy + 1) - level;
      int mask = 0;
      if (v00 > 0) mask |= 1;
      if (v10 > 0) mask |= 2;
      if (v11 > 0) mask |= 4;
      if (v01 > 0) mask |= 8;
      if (mask == 0 || mask == 15) continue;

      auto lerp = [](double a, double b) { return a / (a - b); };
      // Edge crossing points: bottom, right, top, left.
      Vec2 pb{xc(ix) + lerp(v00, v10) * (xc(ix + 1) - xc(ix)), yc(iy)};
      Vec2 pr{xc(ix + 1), yc(iy) + lerp(v10, v11) * (yc(iy + 1) - yc(iy))};
      Vec2 pt{xc(ix) + lerp(v01, v11) * (xc(ix + 1) - xc(ix)), yc(iy + 1)};
      Vec2 pl{xc(ix), yc(iy) + lerp(v00, v01) * (yc(iy + 1) - yc(iy))};

      switch (mask) {
        case 1: case 14: segs.push_back({pl, pb}); break;
        case 2: case 13: segs.push_back({pb, pr}); break;
        case 4: case 11: segs.push_back({pr, pt}); break;
        case 8: case 7:  segs.push_back({pt, pl}); break;
        case 3: case 12: segs.push_back({pl, pr}); break;
        case 6: case 9:  segs.push_back({pb, pt}); break;
        case 5:  segs.push_back({pl, pb}); segs.push_back({pr, pt}); break;
        case 10: segs.push_back({pb, pr}); segs.push_back({pt, pl}); break;
        default: break;
      }
    }
  }
  return segs;
}

void plot_trajectory(const Environment& env, const Trajectory& traj, const Vec2& start,
                     double init_free_radius, const std::string& path) {
  SvgCanvas c(env.workspace_min, env.workspace_max, 640);
  draw_environment(c, env);
  c.circle({start[0], start[1]}, init_free_radius, "none", "#222222", "6,4");

  std::vector<Vec2> pts;
  pts.reserve(traj.samples.size());
  for (const auto& s : traj.samples) pts.push_back({s.x[0], s.x[1]});
  c.polyline(pts, "#3060c0", 1.5);
  for (const auto& s : traj.samples) {
    if (s.mode == FilterMode::Safety) c.dot({s.x[0], s.x[1]}, 2.0, "#d03030");
  }
  c.dot({start[0], start[1]}, 4.0, "#000000");
  c.text({env.workspace_min[0] + 0.2, env.workspace_min[1] + 0.2}, to_string(traj.outcome));
  c.save(path);
}

SliceRender plot_value_slice(const ScalarField& field, const std::array<int, kMaxDim>& fixed,
                             double epsilon, const Environment* env, const std::string& path) {
  const StateGrid& g = *field.grid;
  const int nx = g.node_counts[0], ny = g.node_counts[1];
  std::vector<double> slice(static_cast<std::size_t>(nx) * ny);
  GridIndex idx = fixed;
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      idx[0] = ix;
      idx[1] = iy;
      slice[static_cast<std::size_t>(ix) * ny + iy] = field.values[g.flat(idx)];
    }
  }

  SliceRender out;
  const auto segs = contour_segments(g, slice, epsilon);
  out.contour_segment_count = segs.size();
  out.entire_slice_safe =
      segs.empty() && *std::min_element(slice.begin(), slice.end()) > epsilon;

  const Vec2 lo{g.lower[0], g.lower[1]};
  const Vec2 hi{g.upper[0], g.upper[1]};
  SvgCanvas c(lo, hi, 640);
  if (env) draw_environment(c, *env);
  else c.rect(lo, hi, "none", "#444444");
  // Shade unsafe nodes lightly so the contour reads against the map.
  const double rx = 0.5 * g.spacing[0], ry = 0.5 * g.spacing[1];
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      if (slice[static_cast<std::size_t>(ix) * ny + iy] <= epsilon) {
        const Vec2 p{g.coord(0, ix), g.coord(1, iy)};
        c.rect({p[0] - rx, p[1] - ry}, {p[0] + rx, p[1] + ry}, "#f3d4d4");
      }
    }
  }
  for (const auto& s : segs) c.segment(s[0], s[1], "#c02020", 1.8);
  c.save(path);
  return out;
}

}  // namespace hjnav
