#pragma once

// Planar combat geometry. Headings are degrees clockwise from north (+y);
// positions are kilometres east (x) and north (y).

namespace hmarl {

struct AircraftSpec;

struct Position {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Position&, const Position&) = default;
};

/// Heading in degrees, always normalized to [0, 360).
class HeadingDeg {
public:
    HeadingDeg() = default;

    double value() const noexcept { return value_; }

    friend bool operator==(const HeadingDeg&, const HeadingDeg&) = default;

private:
    friend HeadingDeg wrap_heading(double raw);
    explicit HeadingDeg(double v) : value_(v) {}
    double value_ = 0.0;
};

/// Reduces any finite angle to [0, 360). Throws InvalidInput on NaN/inf.
HeadingDeg wrap_heading(double raw);

/// Signed smallest rotation from `from` to `to`, in (-180, 180]. Positive is clockwise.
double heading_difference(HeadingDeg from, HeadingDeg to) noexcept;

/// Compass bearing of the line of sight from `from` to `to`.
HeadingDeg bearing(Position from, Position to);

double distance_km(Position a, Position b);

/// Antenna train angle in [0, 180]: angle between the observer's heading and
/// the line of sight to the target. 0 means pointing straight at it.
double ata(Position observer_pos, HeadingDeg observer_heading, Position target_pos);

/// Aspect angle in [0, 180]: angle between the observer->target line of sight
/// and the target's heading. 0 means the target flies directly away.
double aspect_angle(Position observer_pos, Position target_pos, HeadingDeg target_heading);

/// Constant-angle weapon engagement cone of the shooter's aircraft type.
bool in_wez(Position shooter_pos, HeadingDeg shooter_heading, const AircraftSpec& spec, Position target_pos);

constexpr double kDegToRad = 0.017453292519943295;
constexpr double kRadToDeg = 57.29577951308232;

}  // namespace hmarl
