#pragma once

// Unit convention used across the library and every emitted file:
//   hbar = m = omega_x = 1
//   length  : alpha^-1 = sqrt(hbar / (m omega_x))
//   energy  : hbar omega_x
//   time    : omega_x^-1
//   velocity: alpha^-1 omega_x
// No dimensional constant appears in any formula.

namespace sapbohm::units {

inline constexpr const char* kDescription =
    "hbar=m=omega_x=1; length alpha^-1; energy hbar*omega_x; time omega_x^-1";

}  // namespace sapbohm::units
