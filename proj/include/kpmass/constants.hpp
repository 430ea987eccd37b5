#pragma once

// Mathematical constants carried to 21 significant digits (beyond 80-bit
// long double resolution). The test suite pins them against the reflection
// and duplication identities, so a transcription slip cannot survive.

namespace kpmass {

inline constexpr long double kPi = 3.14159265358979323846L;
inline constexpr long double kGamma16 = 5.56631600178023520425L;   // Gamma(1/6)
inline constexpr long double kGamma13 = 2.67893853470774763366L;   // Gamma(1/3)
inline constexpr long double kGamma23 = 1.35411793942640041695L;   // Gamma(2/3)
inline constexpr long double kAiryAi0 = 0.355028053887817239260L;  // Ai(0)  = 3^(-2/3)/Gamma(2/3)
inline constexpr long double kAiryAiP0 = -0.258819403792806798405L;  // Ai'(0) = -3^(-1/3)/Gamma(1/3)

}  // namespace kpmass
