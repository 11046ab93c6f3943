#include "hmarl/aircraft.hpp"

namespace hmarl {

const AircraftSpec& spec_for(AircraftType type) noexcept {
    return type == AircraftType::AC1 ? kAc1Spec : kAc2Spec;
}

std::string_view to_string(AircraftType t) noexcept {
    return t == AircraftType::AC1 ? "AC1" : "AC2";
}

}  // namespace hmarl
