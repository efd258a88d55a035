#include "p2h/surface.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

#include <json.hpp>

namespace p2h {

SurfaceGrid sample_grid(const ElectrolyzerParams& p, int n_power, int n_temp) {
    if (n_power < 2 || n_temp < 2) throw std::invalid_argument("sample_grid: need at least 2 points per axis");
    SurfaceGrid g;
    g.n_power = n_power;
    g.n_temp = n_temp;
    g.samples.reserve(static_cast<std::size_t>(n_power * n_temp));
    for (int ip = 0; ip < n_power; ++ip) {
        const double power = p.rated_power * ip / (n_power - 1);
        for (int it = 0; it < n_temp; ++it) {
            const double temp = p.ambient_temp + (p.max_temp - p.ambient_temp) * it / (n_temp - 1);
            g.samples.push_back({power, temp, production_rate(power, temp, p)});
        }
    }
    return g;
}

ConcavityResult check_concavity(const SurfaceGrid& grid, double tol) {
    ConcavityResult res;
    for (int it = 0; it < grid.n_temp; ++it) {
        for (int ip = 1; ip + 1 < grid.n_power; ++ip) {
            const auto& l = grid.at(ip - 1, it);
            const auto& m = grid.at(ip, it);
            const auto& r = grid.at(ip + 1, it);
            // slope change across the middle point; handles uneven spacing
            const double s1 = (m.rate - l.rate) / (m.power - l.power);
            const double s2 = (r.rate - m.rate) / (r.power - m.power);
            const double d2 = s2 - s1;
            if (d2 > tol) {
                res.concave = false;
                res.witness = ConcavityWitness{it, ip, d2};
                return res;
            }
        }
    }
    return res;
}

namespace {

struct Vec3 {
    double x = 0, y = 0, z = 0;
};
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

struct HullFace {
    std::array<int, 3> v{};
    Vec3 n;  // unit outward normal
    double d = 0;
    bool alive = true;
};

constexpr double kHullEps = 1e-10;

HullFace make_face(const std::vector<Vec3>& pts, int a, int b, int c) {
    HullFace f;
    f.v = {a, b, c};
    Vec3 n = cross(pts[b] - pts[a], pts[c] - pts[a]);
    const double len = norm(n);
    f.n = {n.x / len, n.y / len, n.z / len};
    f.d = dot(f.n, pts[a]);
    return f;
}

/// Incremental hull; returns live faces, or nothing when all points are coplanar.
std::optional<std::vector<HullFace>> convex_hull(const std::vector<Vec3>& pts) {
    const int n = static_cast<int>(pts.size());
    if (n < 4) return std::nullopt;
    int i0 = 0, i1 = -1, i2 = -1, i3 = -1;
    double best = 0;
    for (int i = 1; i < n; ++i) {
        const double d = norm(pts[i] - pts[i0]);
        if (d > best) best = d, i1 = i;
    }
    if (i1 < 0 || best < kHullEps) return std::nullopt;
    best = 0;
    for (int i = 0; i < n; ++i) {
        const double d = norm(cross(pts[i1] - pts[i0], pts[i] - pts[i0]));
        if (d > best) best = d, i2 = i;
    }
    if (i2 < 0 || best < kHullEps) return std::nullopt;
    const Vec3 base_n = cross(pts[i1] - pts[i0], pts[i2] - pts[i0]);
    const double base_len = norm(base_n);
    best = 0;
    for (int i = 0; i < n; ++i) {
        const double d = std::abs(dot(base_n, pts[i] - pts[i0])) / base_len;
        if (d > best) best = d, i3 = i;
    }
    if (i3 < 0 || best < 1e-9) return std::nullopt;

    std::vector<HullFace> faces;
    const Vec3 centroid{(pts[i0].x + pts[i1].x + pts[i2].x + pts[i3].x) / 4,
                        (pts[i0].y + pts[i1].y + pts[i2].y + pts[i3].y) / 4,
                        (pts[i0].z + pts[i1].z + pts[i2].z + pts[i3].z) / 4};
    auto add_oriented = [&](int a, int b, int c) {
        HullFace f = make_face(pts, a, b, c);
        if (dot(f.n, centroid) - f.d > 0) f = make_face(pts, a, c, b);
        faces.push_back(f);
    };
    add_oriented(i0, i1, i2);
    add_oriented(i0, i1, i3);
    add_oriented(i0, i2, i3);
    add_oriented(i1, i2, i3);

    for (int ip = 0; ip < n; ++ip) {
        if (ip == i0 || ip == i1 || ip == i2 || ip == i3) continue;
        std::set<std::pair<int, int>> edges;
        std::vector<std::size_t> visible;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (!faces[f].alive) continue;
            if (dot(faces[f].n, pts[ip]) - faces[f].d > kHullEps) {
                visible.push_back(f);
                const auto& v = faces[f].v;
                for (int e = 0; e < 3; ++e) edges.insert({v[e], v[(e + 1) % 3]});
            }
        }
        if (visible.empty()) continue;
        for (auto f : visible) faces[f].alive = false;
        for (const auto& [a, b] : edges) {
            if (edges.count({b, a})) continue;  // interior edge of the visible region
            faces.push_back(make_face(pts, a, b, ip));
        }
    }
    std::vector<HullFace> out;
    for (const auto& f : faces)
        if (f.alive) out.push_back(f);
    return out;
}

struct Normalizer {
    double p_scale = 1, t_min = 0, t_scale = 1, r_scale = 1;

    Vec3 to_unit(const SurfaceSample& s) const {
        return {s.power / p_scale, (s.temperature - t_min) / t_scale, s.rate / r_scale};
    }
    /// z = alpha x + beta y + gamma in unit coordinates back to physical facet.
    Facet to_facet(double alpha, double beta, double gamma) const {
        return {r_scale * alpha / p_scale, r_scale * beta / t_scale, r_scale * (gamma - beta * t_min / t_scale)};
    }
};

Normalizer make_normalizer(const SurfaceGrid& g) {
    double p_max = 0, t_min = std::numeric_limits<double>::infinity(), t_max = -t_min, r_max = 0;
    for (const auto& s : g.samples) {
        p_max = std::max(p_max, std::abs(s.power));
        t_min = std::min(t_min, s.temperature);
        t_max = std::max(t_max, s.temperature);
        r_max = std::max(r_max, std::abs(s.rate));
    }
    Normalizer nz;
    nz.p_scale = p_max > 0 ? p_max : 1;
    nz.t_min = t_min;
    nz.t_scale = t_max > t_min ? t_max - t_min : 1;
    nz.r_scale = r_max > 0 ? r_max : 1;
    return nz;
}

Facet least_squares_plane(const SurfaceGrid& g) {
    // normal equations for rate = a P + b T + c
    double m[3][4] = {};
    for (const auto& s : g.samples) {
        const double row[3] = {s.power, s.temperature, 1.0};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) m[i][j] += row[i] * row[j];
            m[i][3] += row[i] * s.rate;
        }
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        for (int j = 0; j < 4; ++j) std::swap(m[c][j], m[piv][j]);
        if (std::abs(m[c][c]) < 1e-300) throw std::invalid_argument("build_halfspaces: degenerate sample set");
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = m[r][c] / m[c][c];
            for (int j = c; j < 4; ++j) m[r][j] -= f * m[c][j];
        }
    }
    return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

double raw_min(const std::vector<Facet>& fs, double p, double t, std::size_t* arg = nullptr) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < fs.size(); ++j) {
        const double v = fs[j].eval(p, t);
        if (v < best) {
            best = v;
            if (arg) *arg = j;
        }
    }
    return best;
}

struct CheckPoint {
    double power, temperature, rate;
};

std::vector<CheckPoint> check_points(const SurfaceGrid& g, const EnvelopeOptions& opts) {
    std::vector<CheckPoint> pts;
    if (!opts.params) {
        for (const auto& s : g.samples) pts.push_back({s.power, s.temperature, s.rate});
        return pts;
    }
    const int r = std::max(1, opts.check_refinement);
    const double p_lo = g.at(0, 0).power, p_hi = g.at(g.n_power - 1, 0).power;
    const double t_lo = g.at(0, 0).temperature, t_hi = g.at(0, g.n_temp - 1).temperature;
    const int np = (g.n_power - 1) * r + 1, nt = (g.n_temp - 1) * r + 1;
    for (int ip = 0; ip < np; ++ip) {
        const double pw = p_lo + (p_hi - p_lo) * ip / (np - 1);
        for (int it = 0; it < nt; ++it) {
            const double t = t_lo + (t_hi - t_lo) * it / (nt - 1);
            pts.push_back({pw, t, production_rate(pw, t, *opts.params)});
        }
    }
    return pts;
}

double max_gap(const std::vector<Facet>& fs, const std::vector<CheckPoint>& pts) {
    double g = 0;
    for (const auto& c : pts) g = std::max(g, raw_min(fs, c.power, c.temperature) - c.rate);
    return g;
}

/// Bound on how far a concave-in-power function can rise above the linear
/// interpolation between adjacent check points: |second difference| / 8.
double interpolation_margin(const std::vector<CheckPoint>& pts, int nt) {
    double margin = 0;
    const int np = static_cast<int>(pts.size()) / nt;
    for (int it = 0; it < nt; ++it)
        for (int ip = 1; ip + 1 < np; ++ip) {
            const double d2 = pts[(ip - 1) * nt + it].rate - 2 * pts[ip * nt + it].rate + pts[(ip + 1) * nt + it].rate;
            margin = std::max(margin, std::abs(d2) / 8.0);
        }
    return margin;
}

void canonicalize(std::vector<Facet>& fs) {
    std::sort(fs.begin(), fs.end(), [](const Facet& x, const Facet& y) {
        return std::tie(x.a, x.b, x.c) < std::tie(y.a, y.b, y.c);
    });
}

}  // namespace

HalfspaceSet build_halfspaces(const SurfaceGrid& grid, const EnvelopeOptions& opts) {
    if (grid.samples.empty()) throw std::invalid_argument("build_halfspaces: no samples");
    if (opts.max_facets < 1) throw std::invalid_argument("build_halfspaces: max_facets must be >= 1");
    const auto conc = check_concavity(grid, 1e-9);
    if (!conc.concave) {
        std::ostringstream os;
        os << "build_halfspaces: samples are not concave in power (temperature index "
           << conc.witness->temp_index << ", power index " << conc.witness->power_index << ")";
        throw std::invalid_argument(os.str());
    }

    const Normalizer nz = make_normalizer(grid);
    std::vector<Vec3> pts;
    pts.reserve(grid.samples.size());
    for (const auto& s : grid.samples) pts.push_back(nz.to_unit(s));

    std::vector<Facet> facets;
    const auto hull = convex_hull(pts);
    if (!hull) {
        facets.push_back(least_squares_plane(grid));
    } else {
        std::vector<std::array<double, 3>> planes;
        for (const auto& f : *hull) {
            if (f.n.z <= 1e-9) continue;  // vertical sides and the lower hull
            const double alpha = -f.n.x / f.n.z, beta = -f.n.y / f.n.z, gamma = f.d / f.n.z;
            bool dup = false;
            for (const auto& q : planes)
                if (std::abs(q[0] - alpha) < 1e-9 && std::abs(q[1] - beta) < 1e-9 && std::abs(q[2] - gamma) < 1e-9)
                    dup = true;
            if (!dup) planes.push_back({alpha, beta, gamma});
        }
        for (const auto& q : planes) facets.push_back(nz.to_facet(q[0], q[1], q[2]));
    }

    const auto checks = check_points(grid, opts);
    std::vector<Facet> pinned;
    if (opts.params) {
        const auto& p = *opts.params;
        // tangent of f at zero power, steepest over the temperature range; f(0,T) = 0
        const double t_lo = grid.at(0, 0).temperature, t_hi = grid.at(0, grid.n_temp - 1).temperature;
        const double c0 = std::min(p.a0 + p.a1 * t_lo, p.a0 + p.a1 * t_hi);
        if (c0 > 0) {
            const double slope = p.faraday_efficiency * 1e6 / (2.0 * p.faraday_constant * c0);
            pinned.push_back({slope, 0.0, 0.0});
        }

        // lift the active facet wherever the envelope dips below f
        for (int pass = 0; pass < 1000; ++pass) {
            bool lifted = false;
            for (const auto& c : checks) {
                std::size_t j = 0;
                const double env = raw_min(facets, c.power, c.temperature, &j);
                if (env < c.rate) {
                    facets[j].c += (c.rate - env) + 1e-12 * (1.0 + std::abs(c.rate));
                    lifted = true;
                }
            }
            if (!lifted) break;
        }
        const int nt_check = (grid.n_temp - 1) * std::max(1, opts.check_refinement) + 1;
        const double margin = interpolation_margin(checks, nt_check);
        for (auto& f : facets) f.c += margin;
    }

    const int budget = opts.max_facets - static_cast<int>(pinned.size());
    while (static_cast<int>(facets.size()) > std::max(1, budget)) {
        std::size_t drop = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < facets.size(); ++j) {
            auto trial = facets;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(j));
            trial.insert(trial.end(), pinned.begin(), pinned.end());
            const double g = max_gap(trial, checks);
            if (g < best) best = g, drop = j;
        }
        facets.erase(facets.begin() + static_cast<std::ptrdiff_t>(drop));
    }

    facets.insert(facets.end(), pinned.begin(), pinned.end());
    canonicalize(facets);
    HalfspaceSet hs;
    hs.facets = std::move(facets);
    hs.max_gap = max_gap(hs.facets, checks);
    return hs;
}

double envelope_rate(const HalfspaceSet& hs, double power, double temperature) {
    if (hs.facets.empty()) throw std::invalid_argument("envelope_rate: empty half-space set");
    return std::max(0.0, raw_min(hs.facets, power, temperature));
}

HalfspaceSet default_halfspaces(const ElectrolyzerParams& p) {
    EnvelopeOptions opts;
    opts.params = &p;
    return build_halfspaces(sample_grid(p, 20, 10), opts);
}

std::string halfspaces_to_json(const HalfspaceSet& hs) {
    nlohmann::ordered_json j;
    j["units"] = {{"power", "MW"}, {"temperature", "K"}, {"rate", "mol/s"}};
    j["form"] = "rate <= A*power + B*temperature + C";
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : hs.facets) arr.push_back({f.a, f.b, f.c});
    j["facets"] = arr;
    j["max_gap_mol_s"] = hs.max_gap;
    return j.dump(2) + "\n";
}

HalfspaceSet halfspaces_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (!j.contains("facets") || !j["facets"].is_array())
        throw std::invalid_argument("half-space file: missing 'facets' array");
    double scale = 1.0;
    if (j.contains("units") && j["units"].contains("rate")) {
        const auto unit = j["units"]["rate"].get<std::string>();
        if (unit == "Nm3/h")
            scale = units::nm3_h_to_mol_s(1.0);
        else if (unit != "mol/s")
            throw std::invalid_argument("half-space file: unsupported rate unit '" + unit + "'");
    }
    HalfspaceSet hs;
    for (const auto& f : j["facets"]) {
        if (!f.is_array() || f.size() != 3) throw std::invalid_argument("half-space file: facets must be [A,B,C]");
        hs.facets.push_back({scale * f[0].get<double>(), scale * f[1].get<double>(), scale * f[2].get<double>()});
    }
    if (hs.facets.empty()) throw std::invalid_argument("half-space file: no facets");
    if (j.contains("max_gap_mol_s")) hs.max_gap = j["max_gap_mol_s"].get<double>();
    return hs;
}

HalfspaceSet load_halfspaces(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open half-space file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return halfspaces_from_json(ss.str());
}

void save_halfspaces(const HalfspaceSet& hs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write half-space file '" + path + "'");
    out << halfspaces_to_json(hs);
}

}  // namespace p2h
