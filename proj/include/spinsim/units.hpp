#pragma once

// Physical constants and unit conventions.
//
// Config files carry frequencies in Hz; all internal math uses angular
// rad/s.  Times are seconds in config and double-precision seconds in
// kinematics; event timelines use integer nanoseconds.

namespace spinsim {

inline constexpr double kTwoPi = 6.283185307179586476925287;
inline constexpr double kPi = 3.141592653589793238462643;
inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s
inline constexpr double kGravity = 9.807;              // m/s^2
inline constexpr double kBohrHzPerGauss = 1.3996e6;    // mu_B/h, Hz per gauss

constexpr double hz_to_angular(double hz) { return kTwoPi * hz; }
constexpr double angular_to_hz(double w) { return w / kTwoPi; }

constexpr double sec_to_ns(double s) { return s * 1e9; }
constexpr double ns_to_sec(double ns) { return ns * 1e-9; }

}  // namespace spinsim
