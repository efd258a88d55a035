#include <cmath>

#include <gtest/gtest.h>

#include "p2h/surface.hpp"

using namespace p2h;

namespace {

// Production from the quadratic power balance P = N * I * (a0 + a1 T + a2 I), solved
// here independently of the library.
double oracle_rate(double power_mw, double temp, const ElectrolyzerParams& p) {
    const double b = p.a0 + p.a1 * temp;
    const double c = power_mw * 1e6 / p.n_cells;
    const double i = (-b + std::sqrt(b * b + 4.0 * p.a2 * c)) / (2.0 * p.a2);
    return p.faraday_efficiency * p.n_cells * i / (2.0 * p.faraday_constant);
}

SurfaceGrid planar_grid(double a, double b, double c) {
    SurfaceGrid g;
    g.n_power = 2;
    g.n_temp = 2;
    for (double pw : {0.0, 5.0})
        for (double t : {298.0, 373.0}) g.samples.push_back({pw, t, a * pw + b * t + c});
    return g;
}

}  // namespace

TEST(SampleGrid, CornersOnly) {
    const ElectrolyzerParams p;
    const auto g = sample_grid(p, 2, 2);
    ASSERT_EQ(g.samples.size(), 4u);
    EXPECT_EQ(g.at(0, 0).power, 0.0);
    EXPECT_EQ(g.at(0, 1).temperature, 373.0);
    EXPECT_EQ(g.at(1, 0).power, 5.0);
    EXPECT_EQ(g.at(1, 0).temperature, 298.0);
    EXPECT_NEAR(g.at(1, 1).rate, oracle_rate(5.0, 373.0, p), 1e-9);
}

TEST(SampleGrid, ZeroPowerZeroRate) {
    const ElectrolyzerParams p;
    const auto g = sample_grid(p, 20, 10);
    for (int it = 0; it < g.n_temp; ++it) EXPECT_EQ(g.at(0, it).rate, 0.0);
}

TEST(SampleGrid, MonotoneInPowerAndMatchesOracle) {
    const ElectrolyzerParams p;
    const auto g = sample_grid(p, 20, 10);
    for (int it = 0; it < g.n_temp; ++it)
        for (int ip = 0; ip < g.n_power; ++ip) {
            const auto& s = g.at(ip, it);
            EXPECT_NEAR(s.rate, oracle_rate(s.power, s.temperature, p), 1e-9 * (1 + s.rate));
            if (ip > 0) EXPECT_GE(s.rate, g.at(ip - 1, it).rate);
        }
}

TEST(SampleGrid, RejectsDegenerate) {
    EXPECT_THROW(sample_grid(ElectrolyzerParams{}, 1, 5), std::invalid_argument);
}

TEST(Concavity, LinearSamplesPass) {
    EXPECT_TRUE(check_concavity(planar_grid(0.3, 0.001, 0.0)).concave);
}

TEST(Concavity, DerivedSurfacePasses) {
    const auto r = check_concavity(sample_grid(ElectrolyzerParams{}, 40, 12));
    EXPECT_TRUE(r.concave);
    EXPECT_FALSE(r.witness.has_value());
}

TEST(Concavity, SpikeIsWitnessed) {
    auto g = sample_grid(ElectrolyzerParams{}, 10, 4);
    // a dip below the chord breaks concavity at exactly that point
    const_cast<SurfaceSample&>(g.at(5, 2)).rate -= 0.05;
    const auto r = check_concavity(g);
    ASSERT_FALSE(r.concave);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_EQ(r.witness->power_index, 5);
    EXPECT_EQ(r.witness->temp_index, 2);
    EXPECT_GT(r.witness->second_difference, 0.0);
    EXPECT_THROW(build_halfspaces(g), std::invalid_argument);
}

TEST(Halfspaces, CoplanarCornersGiveOneFacet) {
    const auto hs = build_halfspaces(planar_grid(0.3, 0.001, 0.02));
    ASSERT_EQ(hs.facets.size(), 1u);
    EXPECT_NEAR(hs.facets[0].a, 0.3, 1e-12);
    EXPECT_NEAR(hs.facets[0].b, 0.001, 1e-12);
    EXPECT_NEAR(hs.facets[0].c, 0.02, 1e-10);
    for (double pw : {0.0, 5.0})
        for (double t : {298.0, 373.0}) EXPECT_NEAR(envelope_rate(hs, pw, t), 0.3 * pw + 0.001 * t + 0.02, 1e-10);
}

TEST(Halfspaces, SingleFacetIsAffine) {
    HalfspaceSet hs;
    hs.facets.push_back({0.2, 0.0005, 0.01});
    EXPECT_DOUBLE_EQ(envelope_rate(hs, 2.0, 350.0), 0.2 * 2.0 + 0.0005 * 350.0 + 0.01);
    // floored at zero
    hs.facets[0] = {0.2, 0.0, -1.0};
    EXPECT_EQ(envelope_rate(hs, 1.0, 300.0), 0.0);
}

TEST(Halfspaces, HullVerticesAreExact) {
    const ElectrolyzerParams p;
    const auto g = sample_grid(p, 6, 4);
    const auto hs = build_halfspaces(g, {.max_facets = 1000, .check_refinement = 1, .params = nullptr});
    // the domain corners are always hull vertices
    for (int ip : {0, g.n_power - 1})
        for (int it : {0, g.n_temp - 1}) {
            const auto& s = g.at(ip, it);
            EXPECT_NEAR(envelope_rate(hs, s.power, s.temperature), s.rate, 1e-9);
        }
    // each unreduced facet passes through at least three samples and none lies above it
    for (const auto& f : hs.facets) {
        int touching = 0;
        for (const auto& s : g.samples) {
            const double d = f.eval(s.power, s.temperature) - s.rate;
            EXPECT_GE(d, -1e-9);
            if (std::abs(d) < 1e-9) ++touching;
        }
        EXPECT_GE(touching, 3);
    }
}

TEST(Halfspaces, ZeroPowerIsZero) {
    const ElectrolyzerParams p;
    const auto hs = default_halfspaces(p);
    for (double t = 298.0; t <= 373.0; t += 2.5) EXPECT_LT(std::abs(envelope_rate(hs, 0.0, t)), 1e-9);
}

// Soundness on a 100 x 50 grid against the closed-form rate: the envelope never cuts
// below f and over-estimates by less than 1% of rated production.
TEST(Halfspaces, DefaultEnvelopeSoundAndTight) {
    const ElectrolyzerParams p;
    const auto hs = default_halfspaces(p);
    EXPECT_LE(hs.facets.size(), 40u);
    const double rated = oracle_rate(p.rated_power, p.max_temp, p);
    double worst_below = 0.0, worst_gap = 0.0;
    for (int ip = 0; ip < 100; ++ip)
        for (int it = 0; it < 50; ++it) {
            const double pw = p.rated_power * ip / 99.0;
            const double t = p.ambient_temp + (p.max_temp - p.ambient_temp) * it / 49.0;
            const double d = envelope_rate(hs, pw, t) - oracle_rate(pw, t, p);
            worst_below = std::min(worst_below, d);
            worst_gap = std::max(worst_gap, d);
        }
    EXPECT_GE(worst_below, -1e-9);
    EXPECT_LT(worst_gap, 0.01 * rated);
}

TEST(Halfspaces, FacetBudgetRespected) {
    const ElectrolyzerParams p;
    const auto g = sample_grid(p, 20, 10);
    for (int budget : {3, 8, 40}) {
        const auto hs = build_halfspaces(g, {.max_facets = budget, .check_refinement = 4, .params = &p});
        EXPECT_LE(static_cast<int>(hs.facets.size()), budget + 1);  // plus the origin cut
        for (const auto& s : g.samples) EXPECT_GE(envelope_rate(hs, s.power, s.temperature), s.rate - 1e-9);
    }
}

TEST(Halfspaces, JsonRoundTrip) {
    const auto hs = default_halfspaces(ElectrolyzerParams{});
    const auto back = halfspaces_from_json(halfspaces_to_json(hs));
    EXPECT_EQ(back.facets, hs.facets);
    EXPECT_DOUBLE_EQ(back.max_gap, hs.max_gap);
    EXPECT_THROW(halfspaces_from_json("{\"facets\": 3}"), std::exception);
}
