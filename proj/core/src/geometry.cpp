#include "hmarl/geometry.hpp"

#include <cmath>
#include <string>

#include "hmarl/aircraft.hpp"
#include "hmarl/errors.hpp"

namespace hmarl {
namespace {

void require_finite(Position p, const char* what) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
        fail(ErrorKind::InvalidInput, std::string(what) + " is not finite");
}

// Unsigned angle between a unit heading vector and an arbitrary LOS vector.
// atan2 of |cross| and dot stays accurate near 0 and 180 where acos does not.
double angle_between(HeadingDeg heading, double dx, double dy) {
    const double h = heading.value() * kDegToRad;
    const double hx = std::sin(h);
    const double hy = std::cos(h);
    const double cross = hx * dy - hy * dx;
    const double dot = hx * dx + hy * dy;
    return std::atan2(std::fabs(cross), dot) * kRadToDeg;
}

}  // namespace

HeadingDeg wrap_heading(double raw) {
    if (!std::isfinite(raw)) fail(ErrorKind::InvalidInput, "heading is not finite");
    double v = std::fmod(raw, 360.0);
    if (v < 0.0) v += 360.0;
    if (v >= 360.0) v = 0.0;  // -tiny + 360 rounds up to 360
    return HeadingDeg(v);
}

double heading_difference(HeadingDeg from, HeadingDeg to) noexcept {
    double d = to.value() - from.value();
    if (d > 180.0) d -= 360.0;
    if (d <= -180.0) d += 360.0;
    return d;
}

HeadingDeg bearing(Position from, Position to) {
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    if (dx == 0.0 && dy == 0.0) fail(ErrorKind::DegenerateGeometry, "bearing between coincident positions");
    return wrap_heading(std::atan2(dx, dy) * kRadToDeg);
}

double distance_km(Position a, Position b) {
    require_finite(a, "position a");
    require_finite(b, "position b");
    return std::hypot(b.x - a.x, b.y - a.y);
}

double ata(Position observer_pos, HeadingDeg observer_heading, Position target_pos) {
    require_finite(observer_pos, "observer position");
    require_finite(target_pos, "target position");
    const double dx = target_pos.x - observer_pos.x;
    const double dy = target_pos.y - observer_pos.y;
    if (dx == 0.0 && dy == 0.0) fail(ErrorKind::DegenerateGeometry, "ATA with coincident positions");
    return angle_between(observer_heading, dx, dy);
}

double aspect_angle(Position observer_pos, Position target_pos, HeadingDeg target_heading) {
    require_finite(observer_pos, "observer position");
    require_finite(target_pos, "target position");
    const double dx = target_pos.x - observer_pos.x;
    const double dy = target_pos.y - observer_pos.y;
    if (dx == 0.0 && dy == 0.0) fail(ErrorKind::DegenerateGeometry, "aspect angle with coincident positions");
    return angle_between(target_heading, dx, dy);
}

bool in_wez(Position shooter_pos, HeadingDeg shooter_heading, const AircraftSpec& spec, Position target_pos) {
    if (distance_km(shooter_pos, target_pos) > spec.d_a_max) return false;
    return ata(shooter_pos, shooter_heading, target_pos) <= spec.wez_half_angle_max;
}

}  // namespace hmarl
