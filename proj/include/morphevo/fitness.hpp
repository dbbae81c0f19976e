#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "morphevo/phenotype.hpp"

namespace morphevo {

// Terrain -------------------------------------------------------------------

struct TerrainConfig {
    std::uint64_t seed = 20240917;
    std::size_t cells = 256;
    double cell_size = 0.2;   // meters
    double amplitude = 0.03;  // meters
};

/// Square value-noise lattice centred on the origin. Heights between lattice
/// points are bilinearly interpolated; queries outside the lattice clamp to its edge.
class Heightmap {
public:
    Heightmap() = default;
    Heightmap(std::vector<double> grid, std::size_t cells, double cell_size, std::uint64_t seed,
              double amplitude);

    double height(double x, double y = 0.0) const;
    /// d height / dx of the interpolant (zero outside the lattice).
    double slope_x(double x, double y = 0.0) const;

    std::size_t cells() const { return cells_; }
    double cell_size() const { return cell_size_; }
    std::uint64_t seed() const { return seed_; }
    double amplitude() const { return amplitude_; }
    /// World coordinate of lattice index 0 along both axes.
    double origin() const { return origin_; }
    double at(std::size_t row, std::size_t col) const { return grid_[row * cells_ + col]; }
    const std::vector<double>& grid() const { return grid_; }

private:
    struct Cell {
        std::size_t i = 0, j = 0;  // column (x) and row (y) of the lower corner
        double u = 0.0, v = 0.0;   // fractional offsets in x and y
        bool inside_x = false;
    };
    Cell locate(double x, double y) const;

    std::vector<double> grid_;
    std::size_t cells_ = 0;
    double cell_size_ = 0.0;
    std::uint64_t seed_ = 0;
    double amplitude_ = 0.0;
    double origin_ = 0.0;
};

Heightmap generate_terrain(std::uint64_t seed, std::size_t cells, double cell_size, double amplitude);
Heightmap generate_terrain(const TerrainConfig& cfg);

/// Text export: a header line "cells cell_size seed amplitude", then one
/// row-major line of heights per lattice row.
void write_terrain(std::ostream& out, const Heightmap& terrain);

// Kinematics ------------------------------------------------------------------

struct Vec2 {
    double x = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// A module as a rigid segment in the sagittal (x forward, z up) plane.
struct ModulePose {
    Vec2 proximal;
    Vec2 distal;
    double heading = 0.0;

    Vec2 midpoint() const { return {(proximal.x + distal.x) / 2, (proximal.z + distal.z) / 2}; }
};

/// Planar poses of every phenotype module, head centred on the origin.
/// `joint_angles` holds one hinge angle per phenotype joint, in radians.
std::vector<ModulePose> forward_kinematics(const Phenotype& ph, std::span<const double> joint_angles,
                                           double module_length, double root_heading = 0.0);

// Simulation ----------------------------------------------------------------

struct SimConfig {
    double duration = 30.0;  // seconds
    double dt = 0.05;        // seconds, also the controller phase increment
    double max_deflection = std::numbers::pi / 3.0;
    double module_length = 0.1;  // meters
    double frequency = 4.0;
    double offset = 0.0;
    double start_x = 0.0;
    double root_heading = 0.0;

    std::size_t steps() const;
};

class InvalidParams : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Anchored-crawler proxy: every step the deepest point relative to the
/// terrain stays put while the body reconfigures, and the body slides by the
/// opposite of that point's kinematic motion, scaled by 1 / (1 + slope^2).
/// Returns the travel-axis displacement of the centre of mass.
/// When `com_trace` is given it receives the world COM x at steps 0..N.
double simulate(const Phenotype& ph, std::span<const double> unit_params, const Heightmap& terrain,
                const SimConfig& cfg, std::vector<double>* com_trace = nullptr);

// Benchmarks -----------------------------------------------------------------

/// -||x - 0.5||^2
double sphere_benchmark(std::span<const double> x);
/// Negated Rastrigin over [0,1]^d mapped onto [-5.12, 5.12]^d; maximum 0 at the centre.
double rastrigin_benchmark(std::span<const double> x);

// Evaluators ------------------------------------------------------------------

/// Counts every simulation it performs. Thread-safe if do_evaluate is.
class Evaluator {
public:
    virtual ~Evaluator() = default;

    double evaluate(const Phenotype& ph, std::span<const double> unit_params) const {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return do_evaluate(ph, unit_params);
    }

    std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }
    void reset_calls() { calls_.store(0); }

protected:
    virtual double do_evaluate(const Phenotype& ph, std::span<const double> unit_params) const = 0;

private:
    mutable std::atomic<std::uint64_t> calls_{0};
};

class ProxyEvaluator final : public Evaluator {
public:
    explicit ProxyEvaluator(const TerrainConfig& terrain = {}, SimConfig sim = {});
    ProxyEvaluator(Heightmap terrain, SimConfig sim);

    const Heightmap& terrain() const { return terrain_; }
    const SimConfig& sim() const { return sim_; }

protected:
    double do_evaluate(const Phenotype& ph, std::span<const double> unit_params) const override;

private:
    Heightmap terrain_;
    SimConfig sim_;
};

}  // namespace morphevo
