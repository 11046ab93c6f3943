#pragma once

#include <string_view>

namespace hmarl {

enum class AircraftType { AC1 = 0, AC2 = 1 };

/// Per-type performance envelope. AC1 is agile and carries rockets; AC2 turns
/// slower but has the longer, more accurate cannon.
struct AircraftSpec {
    AircraftType type_id = AircraftType::AC1;
    double omega_max = 0.0;           // deg/s
    double v_min = 0.0;               // knots
    double v_max = 0.0;               // knots
    double wez_half_angle_max = 0.0;  // deg
    double d_a_max = 0.0;             // km
    double hit_prob = 0.0;
    int cannon_capacity = 0;
    int rocket_count = 0;
};

inline constexpr int kCannonCapacity = 50;
inline constexpr int kAc1Rockets = 4;

inline constexpr AircraftSpec kAc1Spec{AircraftType::AC1, 5.0, 100.0, 900.0, 10.0, 2.0, 0.70, kCannonCapacity, kAc1Rockets};
inline constexpr AircraftSpec kAc2Spec{AircraftType::AC2, 3.6, 100.0, 600.0, 7.0, 4.5, 0.85, kCannonCapacity, 0};

const AircraftSpec& spec_for(AircraftType type) noexcept;

/// Index used in observations: AC1 -> 0, AC2 -> 1.
inline constexpr int type_index(AircraftType t) noexcept { return static_cast<int>(t); }

std::string_view to_string(AircraftType t) noexcept;

/// Knots to km/s.
inline constexpr double kKnotToKmPerSec = 1.852 / 3600.0;

}  // namespace hmarl
