// Regenerates the bundled data/ directory: reference parameters, the synthetic PV
// day used by table1.json, the mid-morning dip day and the 10-day synthetic batch.
//
//   p2h_gen_data <data-dir>
//
// PV days are bell curves (sin^1.5 between sunrise and sunset) with Gaussian cloud
// dips, sampled at step midpoints. Batch days draw their shape from a fixed seed.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "p2h/io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Dip {
    double center_h, width_h, depth;
};

struct PvDay {
    double sunrise_h, sunset_h, peak_mw;
    std::vector<Dip> dips;
};

std::vector<double> sample(const PvDay& d, int steps, double step_s, std::mt19937* noise = nullptr) {
    std::normal_distribution<double> jitter(0.0, 0.02);
    std::vector<double> out;
    for (int k = 0; k < steps; ++k) {
        const double t = (k + 0.5) * step_s / 3600.0;
        double v = 0.0;
        if (t > d.sunrise_h && t < d.sunset_h)
            v = d.peak_mw * std::pow(std::sin(M_PI * (t - d.sunrise_h) / (d.sunset_h - d.sunrise_h)), 1.5);
        for (const auto& dip : d.dips) {
            const double z = (t - dip.center_h) / dip.width_h;
            v *= 1.0 - dip.depth * std::exp(-z * z);
        }
        if (noise && v > 0) v *= 1.0 + jitter(*noise);
        out.push_back(std::round(std::max(v, 0.0) * 1000.0) / 1000.0);
    }
    return out;
}

std::string pv_csv(const std::vector<double>& mw, const std::string& comment) {
    std::string s = "# synthetic PV profile, " + comment + "\nstep,power_MW\n";
    char buf[64];
    for (std::size_t k = 0; k < mw.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.3f\n", k, mw[k]);
        s += buf;
    }
    return s;
}

json scenario(const std::string& name, const std::string& description, const std::string& csv) {
    json j;
    j["name"] = name;
    j["description"] = description;
    j["horizon"] = 96;
    j["step_s"] = 900;
    j["fleet"] = 6;
    j["prices"] = {{"h2_usd_per_nm3", 0.38}, {"power_usd_per_mwh", 34.7}, {"startup_usd", 280}};
    j["pv_profile"] = csv;
    j["initial_states"] = {{"state", "idle"}, {"temperature_K", 298.0}, {"hto_mol", 0.0}};
    return j;
}

void emit(const fs::path& dir, const std::string& name, const std::string& description, const PvDay& d,
          std::mt19937* noise = nullptr) {
    const auto mw = sample(d, 96, 900.0, noise);
    p2h::write_text_file((dir / (name + ".csv")).string(), pv_csv(mw, description));
    p2h::write_text_file((dir / (name + ".json")).string(),
                         scenario(name, "synthetic: " + description, name + ".csv").dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: p2h_gen_data <data-dir>\n";
        return 4;
    }
    const fs::path dir = argv[1];
    p2h::write_text_file((dir / "reference_electrolyzer.json").string(), p2h::params_to_json(p2h::ElectrolyzerParams{}));

    // bundled day: sunrise near 7 am, a short drop around 9 am, peak above the fleet rating
    const PvDay day{6.8, 19.6, 40.0, {{9.1, 0.3, 0.6}, {15.5, 0.4, 0.25}}};
    const auto mw = sample(day, 96, 900.0);
    p2h::write_text_file((dir / "pv_day.csv").string(), pv_csv(mw, "clear day with a drop around 09:00"));
    json t1 = scenario("table1", "synthetic PV day with the plant and price data of the reference case", "pv_day.csv");
    p2h::write_text_file((dir / "table1.json").string(), t1.dump(2) + "\n");

    // the drop is deep enough that only part of the fleet can keep producing
    emit(dir, "dip_day", "clear day with a deep drop 09:00-10:00",
         {6.8, 19.6, 40.0, {{9.5, 0.45, 0.75}}});

    std::mt19937 rng(20230611);
    std::uniform_real_distribution<double> sunrise(6.3, 7.4), sunset(18.4, 19.8), peak(26.0, 44.0);
    std::uniform_real_distribution<double> center(8.0, 17.5), width(0.2, 0.9), depth(0.2, 0.8);
    std::uniform_int_distribution<int> count(0, 3);
    for (int d = 1; d <= 10; ++d) {
        PvDay pv{sunrise(rng), sunset(rng), peak(rng), {}};
        const int n = count(rng);
        for (int c = 0; c < n; ++c) pv.dips.push_back({center(rng), width(rng), depth(rng)});
        char name[32];
        std::snprintf(name, sizeof name, "day%02d", d);
        char desc[160];
        std::snprintf(desc, sizeof desc, "batch day %d, peak %.1f MW, %d cloud dips, seed 20230611", d, pv.peak_mw, n);
        emit(dir / "batch", name, desc, pv, &rng);
    }
    return 0;
}
