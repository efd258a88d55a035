#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "p2h/physics.hpp"

namespace p2h {

/// One evaluation of the production function. Rates are mol/s internally.
struct SurfaceSample {
    double power = 0.0;        // MW
    double temperature = 0.0;  // K
    double rate = 0.0;         // mol/s
};

/// Rectangular sample grid, power-major (index = ip * n_temp + it).
struct SurfaceGrid {
    int n_power = 0;
    int n_temp = 0;
    std::vector<SurfaceSample> samples;

    const SurfaceSample& at(int ip, int it) const { return samples[static_cast<std::size_t>(ip * n_temp + it)]; }
};

/// One half-space rate <= a * P + b * T + c.
struct Facet {
    double a = 0.0;  // mol/s per MW
    double b = 0.0;  // mol/s per K
    double c = 0.0;  // mol/s

    double eval(double power, double temperature) const { return a * power + b * temperature + c; }
    friend bool operator==(const Facet&, const Facet&) = default;
};

struct HalfspaceSet {
    std::vector<Facet> facets;

    /// Largest envelope-minus-f gap seen on the construction check grid [mol/s].
    double max_gap = 0.0;
};

SurfaceGrid sample_grid(const ElectrolyzerParams& p, int n_power, int n_temp);

struct ConcavityWitness {
    int temp_index = 0;
    int power_index = 0;  // middle point of the violating triple
    double second_difference = 0.0;
};

struct ConcavityResult {
    bool concave = true;
    std::optional<ConcavityWitness> witness;
};

/// Discrete second differences along power at fixed temperature must be <= tol.
ConcavityResult check_concavity(const SurfaceGrid& grid, double tol = 1e-9);

struct EnvelopeOptions {
    int max_facets = 40;
    /// Extra refinement of the soundness check grid between samples.
    int check_refinement = 4;
    /// Optional exact function for the soundness pass; when absent only samples are checked.
    const ElectrolyzerParams* params = nullptr;
};

/// Upper concave envelope of the samples as a set of half-spaces.
///
/// The facets of the 3-D convex hull whose outward normal points up are kept.
/// When `opts.params` is given, facets are then lifted until the envelope lies on
/// or above f on a refined check grid, and a tangent cut through the origin is
/// added so zero power gives exactly zero production. Facet count is reduced
/// greedily to `max_facets`. Throws std::invalid_argument on non-concave input.
HalfspaceSet build_halfspaces(const SurfaceGrid& grid, const EnvelopeOptions& opts = {});

/// min_j (A_j P + B_j T + C_j), floored at zero.
double envelope_rate(const HalfspaceSet& hs, double power, double temperature);

/// Default surface for a parameter set (20 x 10 grid, 40 facets).
HalfspaceSet default_halfspaces(const ElectrolyzerParams& p);

std::string halfspaces_to_json(const HalfspaceSet& hs);
HalfspaceSet halfspaces_from_json(const std::string& text);
HalfspaceSet load_halfspaces(const std::string& path);
void save_halfspaces(const HalfspaceSet& hs, const std::string& path);

}  // namespace p2h
