#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "morphevo/fitness.hpp"
#include "morphevo/random.hpp"

namespace morphevo {

Heightmap::Heightmap(std::vector<double> grid, std::size_t cells, double cell_size,
                     std::uint64_t seed, double amplitude)
    : grid_(std::move(grid)),
      cells_(cells),
      cell_size_(cell_size),
      seed_(seed),
      amplitude_(amplitude),
      origin_(-0.5 * static_cast<double>(cells - 1) * cell_size) {
    if (cells < 2 || grid_.size() != cells * cells || !(cell_size > 0.0)) {
        throw std::invalid_argument("heightmap needs at least 2x2 cells and a positive cell size");
    }
}

Heightmap::Cell Heightmap::locate(double x, double y) const {
    const double last = static_cast<double>(cells_ - 1);
    const double gx = (x - origin_) / cell_size_;
    const double gy = (y - origin_) / cell_size_;
    Cell c;
    c.inside_x = gx >= 0.0 && gx <= last;
    const double cx = std::clamp(gx, 0.0, last);
    const double cy = std::clamp(gy, 0.0, last);
    c.i = std::min(static_cast<std::size_t>(cx), cells_ - 2);
    c.j = std::min(static_cast<std::size_t>(cy), cells_ - 2);
    c.u = cx - static_cast<double>(c.i);
    c.v = cy - static_cast<double>(c.j);
    return c;
}

double Heightmap::height(double x, double y) const {
    const Cell c = locate(x, y);
    const double h00 = at(c.j, c.i);
    const double h10 = at(c.j, c.i + 1);
    const double h01 = at(c.j + 1, c.i);
    const double h11 = at(c.j + 1, c.i + 1);
    const double lower = h00 + (h10 - h00) * c.u;
    const double upper = h01 + (h11 - h01) * c.u;
    return lower + (upper - lower) * c.v;
}

double Heightmap::slope_x(double x, double y) const {
    const Cell c = locate(x, y);
    if (!c.inside_x) return 0.0;
    const double h00 = at(c.j, c.i);
    const double h10 = at(c.j, c.i + 1);
    const double h01 = at(c.j + 1, c.i);
    const double h11 = at(c.j + 1, c.i + 1);
    return ((h10 - h00) * (1.0 - c.v) + (h11 - h01) * c.v) / cell_size_;
}

Heightmap generate_terrain(std::uint64_t seed, std::size_t cells, double cell_size, double amplitude) {
    if (cells < 2) {
        throw std::invalid_argument("generate_terrain: cells must be >= 2");
    }
    Random rng(seed);
    std::vector<double> grid(cells * cells);
    for (auto& h : grid) {
        h = amplitude == 0.0 ? 0.0 : rng.uniform(-amplitude, amplitude);
    }
    return Heightmap(std::move(grid), cells, cell_size, seed, amplitude);
}

Heightmap generate_terrain(const TerrainConfig& cfg) {
    return generate_terrain(cfg.seed, cfg.cells, cfg.cell_size, cfg.amplitude);
}

namespace {

void put(std::ostream& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, end - buf);
}

}  // namespace

void write_terrain(std::ostream& out, const Heightmap& terrain) {
    out << terrain.cells() << ' ';
    put(out, terrain.cell_size());
    out << ' ' << terrain.seed() << ' ';
    put(out, terrain.amplitude());
    out << '\n';
    for (std::size_t r = 0; r < terrain.cells(); ++r) {
        for (std::size_t c = 0; c < terrain.cells(); ++c) {
            if (c) out << ' ';
            put(out, terrain.at(r, c));
        }
        out << '\n';
    }
}

}  // namespace morphevo
