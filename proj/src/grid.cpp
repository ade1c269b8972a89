#include "hjnav/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hjnav {

double StateGrid::position_diameter() const {
  double s = 0.0;
  for (int d = 0; d < position_dims; ++d) {
    const double e = upper[d] - lower[d];
    s += e * e;
  }
  return std::sqrt(s);
}

StateGrid build_grid(std::span<const double> lower, std::span<const double> upper,
                     std::span<const int> counts, std::span<const char> periodic,
                     int position_dims) {
  const int n = static_cast<int>(lower.size());
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("grid: dim count must be 1.." + std::to_string(kMaxDim));
  if (static_cast<int>(upper.size()) != n || static_cast<int>(counts.size()) != n ||
      static_cast<int>(periodic.size()) != n)
    throw std::invalid_argument("grid: dimension mismatch between bounds/counts/periodic");

  StateGrid g;
  g.dim_count = n;
  for (int d = 0; d < n; ++d) {
    if (!(lower[d] < upper[d])) {
      std::ostringstream os;
      os << "grid: degenerate extent on dim " << d << " (lower >= upper)";
      throw std::invalid_argument(os.str());
    }
    if (counts[d] < 3) throw std::invalid_argument("grid: node counts must be >= 3");
    g.lower[d] = lower[d];
    g.upper[d] = upper[d];
    g.node_counts[d] = counts[d];
    g.periodic[d] = periodic[d] != 0;
    g.spacing[d] = g.periodic[d] ? (upper[d] - lower[d]) / counts[d]
                                 : (upper[d] - lower[d]) / (counts[d] - 1);
  }
  if (position_dims < 0) {
    // Default: the prefix before the first periodic dimension (all dims when
    // nothing is periodic).
    position_dims = n;
    for (int d = 0; d < n; ++d) {
      if (g.periodic[d]) { position_dims = d; break; }
    }
  }
  if (position_dims < 1 || position_dims > n)
    throw std::invalid_argument("grid: position dims must be a non-empty prefix");
  g.position_dims = position_dims;

  std::size_t s = 1;
  for (int d = n - 1; d >= 0; --d) {
    g.stride[d] = s;
    s *= static_cast<std::size_t>(g.node_counts[d]);
  }
  g.node_total = s;
  return g;
}

GridPtr build_grid_ptr(std::span<const double> lower, std::span<const double> upper,
                       std::span<const int> counts, std::span<const char> periodic,
                       int position_dims) {
  return std::make_shared<const StateGrid>(build_grid(lower, upper, counts, periodic, position_dims));
}

bool in_bounds(const StateGrid& grid, std::span<const double> x) {
  for (int d = 0; d < grid.dim_count; ++d) {
    if (grid.periodic[d]) continue;
    const double tol = 1e-9 * (grid.upper[d] - grid.lower[d]);
    if (x[d] < grid.lower[d] - tol || x[d] > grid.upper[d] + tol) return false;
  }
  return true;
}

double interpolate(const ScalarField& field, std::span<const double> x) {
  const StateGrid& g = *field.grid;
  if (static_cast<int>(x.size()) != g.dim_count)
    throw std::invalid_argument("interpolate: state dimension mismatch");

  std::array<int, kMaxDim> base{};
  std::array<int, kMaxDim> next{};
  std::array<double, kMaxDim> frac{};
  for (int d = 0; d < g.dim_count; ++d) {
    const int n = g.node_counts[d];
    double u = (x[d] - g.lower[d]) / g.spacing[d];
    if (g.periodic[d]) {
      u = std::fmod(u, static_cast<double>(n));
      if (u < 0) u += n;
      int i0 = static_cast<int>(std::floor(u));
      if (i0 >= n) i0 = 0;  // fmod landing exactly on n
      base[d] = i0;
      next[d] = (i0 + 1) % n;
      frac[d] = u - i0;
    } else {
      const double tol = 1e-9 * (n - 1);
      if (u < -tol || u > (n - 1) + tol) {
        std::ostringstream os;
        os << "interpolate: x[" << d << "]=" << x[d] << " outside grid bounds";
        throw std::out_of_range(os.str());
      }
      u = std::clamp(u, 0.0, static_cast<double>(n - 1));
      int i0 = static_cast<int>(std::floor(u));
      if (i0 > n - 2) i0 = n - 2;
      base[d] = i0;
      next[d] = i0 + 1;
      frac[d] = u - i0;
    }
  }

  const int corners = 1 << g.dim_count;
  double acc = 0.0;
  GridIndex idx{};
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    for (int d = 0; d < g.dim_count; ++d) {
      const bool hi = (c >> d) & 1;
      idx[d] = hi ? next[d] : base[d];
      w *= hi ? frac[d] : (1.0 - frac[d]);
    }
    if (w != 0.0) acc += w * field.values[g.flat(idx)];
  }
  return acc;
}

namespace {

// 1D squared-distance transform (lower envelope of parabolas), spacing h.
// f holds squared distances on entry; out receives the transformed line.
void dt1d(std::span<const double> f, double h, std::span<double> out,
          std::span<int> v, std::span<double> z) {
  const int n = static_cast<int>(f.size());
  const double h2 = h * h;
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    if (f[q] == std::numeric_limits<double>::infinity()) continue;
    while (true) {
      const int p = v[k];
      if (f[p] == std::numeric_limits<double>::infinity()) {
        // Degenerate parabola at +inf never wins; replace it.
        if (k == 0) { v[0] = q; z[1] = std::numeric_limits<double>::infinity(); break; }
        --k;
        continue;
      }
      const double s = ((f[q] - f[p]) / h2 + static_cast<double>(q) * q - static_cast<double>(p) * p) /
                       (2.0 * (q - p));
      if (s <= z[k]) {
        --k;
        continue;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = std::numeric_limits<double>::infinity();
      break;
    }
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const int p = v[k];
    if (f[p] == std::numeric_limits<double>::infinity()) {
      out[q] = std::numeric_limits<double>::infinity();
    } else {
      const double dq = static_cast<double>(q - p);
      out[q] = dq * dq * h2 + f[p];
    }
  }
}

// Exact Euclidean distance (node centers) to the seed set over the position
// sub-grid, via per-axis parabola sweeps on squared distances.
std::vector<double> distance_to_set(const StateGrid& g, std::span<const std::uint8_t> seed) {
  const int nd = g.position_dims;
  std::array<int, kMaxDim> counts{};
  std::array<std::size_t, kMaxDim> stride{};
  std::size_t total = 1;
  for (int d = nd - 1; d >= 0; --d) {
    counts[d] = g.node_counts[d];
    stride[d] = total;
    total *= static_cast<std::size_t>(counts[d]);
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(total);
  for (std::size_t i = 0; i < total; ++i) dist[i] = seed[i] ? 0.0 : kInf;

  int max_count = 0;
  for (int d = 0; d < nd; ++d) max_count = std::max(max_count, counts[d]);
  std::vector<double> line(max_count), out(max_count), z(max_count + 1);
  std::vector<int> v(max_count);

  for (int d = 0; d < nd; ++d) {
    const int n = counts[d];
    const std::size_t lines = total / static_cast<std::size_t>(n);
    for (std::size_t li = 0; li < lines; ++li) {
      // Base offset of this line: distribute li over the other axes.
      std::size_t rem = li, base = 0;
      for (int e = 0; e < nd; ++e) {
        if (e == d) continue;
        const std::size_t ce = static_cast<std::size_t>(counts[e]);
        base += (rem % ce) * stride[e];
        rem /= ce;
      }
      bool any = false;
      for (int i = 0; i < n; ++i) {
        line[i] = dist[base + stride[d] * i];
        any = any || line[i] < kInf;
      }
      if (!any) continue;
      dt1d(std::span<const double>(line.data(), n), g.spacing[d],
           std::span<double>(out.data(), n), std::span<int>(v.data(), n),
           std::span<double>(z.data(), n + 1));
      for (int i = 0; i < n; ++i) dist[base + stride[d] * i] = out[i];
    }
  }
  for (std::size_t i = 0; i < total; ++i) dist[i] = std::sqrt(dist[i]);
  return dist;
}

std::vector<double> signed_values_on_position_grid(const StateGrid& g,
                                                   std::span<const std::uint8_t> inside) {
  const std::size_t total = g.position_total();
  std::size_t inside_count = 0;
  for (std::size_t i = 0; i < total; ++i) inside_count += inside[i] ? 1 : 0;

  if (inside_count == 0 || inside_count == total) {
    const double sentinel = (inside_count == total ? 1.0 : -1.0) * g.position_diameter();
    return std::vector<double>(total, sentinel);
  }

  std::vector<std::uint8_t> outside(total);
  for (std::size_t i = 0; i < total; ++i) outside[i] = inside[i] ? 0 : 1;
  const std::vector<double> d_out = distance_to_set(g, outside);
  const std::vector<double> d_in = distance_to_set(g, inside);

  std::vector<double> sd(total);
  for (std::size_t i = 0; i < total; ++i) sd[i] = inside[i] ? d_out[i] : -d_in[i];
  return sd;
}

}  // namespace

ScalarField signed_distance(const GridPtr& grid, std::span<const std::uint8_t> inside) {
  const StateGrid& g = *grid;
  const std::size_t pos_total = g.position_total();
  if (inside.size() != pos_total)
    throw std::invalid_argument("signed_distance: inside mask size mismatch");

  const std::vector<double> sd = signed_values_on_position_grid(g, inside);

  ScalarField field(grid);
  const std::size_t extrude = g.node_total / pos_total;  // product of non-position counts
  for (std::size_t p = 0; p < pos_total; ++p) {
    double* dst = field.values.data() + p * extrude;
    std::fill(dst, dst + extrude, sd[p]);
  }
  return field;
}

ScalarField signed_distance(const GridPtr& grid,
                            const std::function<bool(std::size_t)>& inside) {
  const std::size_t pos_total = grid->position_total();
  std::vector<std::uint8_t> mask(pos_total);
  for (std::size_t i = 0; i < pos_total; ++i) mask[i] = inside(i) ? 1 : 0;
  return signed_distance(grid, std::span<const std::uint8_t>(mask));
}

std::vector<double> signed_distance_brute_force(const StateGrid& grid,
                                                std::span<const std::uint8_t> inside) {
  const int nd = grid.position_dims;
  const std::size_t total = grid.position_total();
  std::array<std::size_t, kMaxDim> stride{};
  std::size_t s = 1;
  for (int d = nd - 1; d >= 0; --d) {
    stride[d] = s;
    s *= static_cast<std::size_t>(grid.node_counts[d]);
  }

  std::size_t inside_count = 0;
  for (std::size_t i = 0; i < total; ++i) inside_count += inside[i] ? 1 : 0;
  if (inside_count == 0 || inside_count == total) {
    const double sentinel = (inside_count == total ? 1.0 : -1.0) * grid.position_diameter();
    return std::vector<double>(total, sentinel);
  }

  auto node_pos = [&](std::size_t f, std::array<double, kMaxDim>& p) {
    for (int d = 0; d < nd; ++d) {
      const std::size_t c = f / stride[d];
      f %= stride[d];
      p[d] = grid.coord(d, static_cast<int>(c));
    }
  };

  std::vector<double> out(total);
  std::array<double, kMaxDim> pa{}, pb{};
  for (std::size_t a = 0; a < total; ++a) {
    node_pos(a, pa);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < total; ++b) {
      if (inside[a] == inside[b]) continue;
      node_pos(b, pb);
      double d2 = 0.0;
      for (int d = 0; d < nd; ++d) {
        const double e = pa[d] - pb[d];
        d2 += e * e;
      }
      best = std::min(best, d2);
    }
    out[a] = (inside[a] ? 1.0 : -1.0) * std::sqrt(best);
  }
  return out;
}

namespace {
constexpr char kFieldMagic[8] = {'H', 'J', 'N', 'A', 'V', 'F', 'D', '1'};
}

void write_field(const ScalarField& field, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_field: cannot open " + path);
  const StateGrid& g = *field.grid;
  os.write(kFieldMagic, sizeof(kFieldMagic));
  const std::uint32_t nd = static_cast<std::uint32_t>(g.dim_count);
  const std::uint32_t np = static_cast<std::uint32_t>(g.position_dims);
  os.write(reinterpret_cast<const char*>(&nd), sizeof(nd));
  os.write(reinterpret_cast<const char*>(&np), sizeof(np));
  for (int d = 0; d < g.dim_count; ++d) {
    const std::uint64_t count = static_cast<std::uint64_t>(g.node_counts[d]);
    const std::uint8_t per = g.periodic[d] ? 1 : 0;
    os.write(reinterpret_cast<const char*>(&g.lower[d]), sizeof(double));
    os.write(reinterpret_cast<const char*>(&g.upper[d]), sizeof(double));
    os.write(reinterpret_cast<const char*>(&count), sizeof(count));
    os.write(reinterpret_cast<const char*>(&per), sizeof(per));
  }
  const std::uint64_t total = field.values.size();
  os.write(reinterpret_cast<const char*>(&total), sizeof(total));
  os.write(reinterpret_cast<const char*>(field.values.data()),
           static_cast<std::streamsize>(total * sizeof(double)));
  if (!os) throw std::runtime_error("write_field: write failed for " + path);
}

ScalarField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_field: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kFieldMagic, sizeof(magic)) != 0)
    throw std::runtime_error("read_field: bad magic in " + path);
  std::uint32_t nd = 0, np = 0;
  is.read(reinterpret_cast<char*>(&nd), sizeof(nd));
  is.read(reinterpret_cast<char*>(&np), sizeof(np));
  if (!is || nd < 1 || nd > kMaxDim) throw std::runtime_error("read_field: bad dim count");
  std::vector<double> lower(nd), upper(nd);
  std::vector<int> counts(nd);
  std::vector<char> periodic(nd);
  for (std::uint32_t d = 0; d < nd; ++d) {
    std::uint64_t count = 0;
    std::uint8_t per = 0;
    is.read(reinterpret_cast<char*>(&lower[d]), sizeof(double));
    is.read(reinterpret_cast<char*>(&upper[d]), sizeof(double));
    is.read(reinterpret_cast<char*>(&count), sizeof(count));
    is.read(reinterpret_cast<char*>(&per), sizeof(per));
    counts[d] = static_cast<int>(count);
    periodic[d] = static_cast<char>(per);
  }
  std::uint64_t total = 0;
  is.read(reinterpret_cast<char*>(&total), sizeof(total));
  if (!is) throw std::runtime_error("read_field: truncated header in " + path);

  GridPtr grid = build_grid_ptr(lower, upper, counts, periodic, static_cast<int>(np));
  if (total != grid->node_total) throw std::runtime_error("read_field: value count mismatch");
  ScalarField field(grid);
  is.read(reinterpret_cast<char*>(field.values.data()),
          static_cast<std::streamsize>(total * sizeof(double)));
  if (!is) throw std::runtime_error("read_field: truncated values in " + path);
  return field;
}

}  // namespace hjnav
