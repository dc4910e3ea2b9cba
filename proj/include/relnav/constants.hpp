#pragma once

#include <numbers>

namespace relnav {

// WGS-84 defining values and the GM / earth-rotation constants used for
// almanac-grade orbit propagation. All in SI units.
inline constexpr double kSpeedOfLight = 299792458.0;           // m/s
inline constexpr double kEarthGm = 3.986005e14;                // m^3/s^2
inline constexpr double kEarthRotationRate = 7.2921151467e-5;  // rad/s
inline constexpr double kWgs84SemiMajor = 6378137.0;           // m
inline constexpr double kWgs84Flattening = 1.0 / 298.257223563;
inline constexpr double kWgs84Ecc2 = kWgs84Flattening * (2.0 - kWgs84Flattening);

inline constexpr double kL1FrequencyHz = 1575.42e6;
inline constexpr double kL1Wavelength = kSpeedOfLight / kL1FrequencyHz;  // m
inline constexpr double kCaChipLength = kSpeedOfLight / 1.023e6;         // m, one C/A code chip

inline constexpr double kSecondsPerWeek = 604800.0;

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace relnav
