#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace bdris {

using Vec3 = std::array<double, 3>;

enum class RisLayout { Localized, Distributed };

// Geometry plus large-scale channel parameters of one deployment.
struct Scenario {
    Vec3 tx_position{0.0, 0.0, 0.0};
    Vec3 rx_position{20.0, 0.0, 0.0};
    std::vector<Vec3> ris_positions;
    RisLayout layout = RisLayout::Localized;
    double c0_db = -30.0;          // reference path gain at 1 m
    double pathloss_exponent = 4.0;
    double tx_power_w = 10.0;
    double noise_power_w = 1e-12;  // carried for completeness; unused by the power metric
    bool direct_blocked = true;

    std::size_t n_elements() const { return ris_positions.size(); }

    // Throws std::invalid_argument on violated invariants.
    void validate() const;
};

enum class FadingKind { Rayleigh, LoS };

struct FadingSpec {
    FadingKind kind = FadingKind::Rayleigh;
    std::uint64_t rng_seed = 0;
};

// ULA centered at (20,0,2), spacing 0.05 m along x.
Scenario make_localized_scenario(std::size_t n);

// Elements uniform on the segment (0,0,2) -> (40,0,2).
Scenario make_distributed_scenario(std::size_t n);

double distance(const Vec3& a, const Vec3& b);

// Centroid of the RIS elements; distance reference for the localized layout.
Vec3 ris_center(const Scenario& s);

// Flat key-value config round-trip (SI units, dB where noted).
std::string scenario_to_config(const Scenario& s);
Scenario scenario_from_config(const std::string& text);
Scenario load_scenario_file(const std::string& path);

}  // namespace bdris
