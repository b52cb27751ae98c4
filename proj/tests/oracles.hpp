#pragma once
// Reference values computed outside this code base (50-digit arithmetic,
// closed forms or exhaustive search) and frozen here.

namespace oracle {

// log sum_{n>=1} (n(n+1))^{-0.6}; series summed to 10^8 terms plus the
// Euler-Maclaurin tail, confirmed by Richardson extrapolation.
inline constexpr double kGaussPressure06 = 1.61270016601189218107;

// log(zeta(1.5)^{-0.8} zeta(1.2)): pressure at t = 0.8 of the lengths
// n^{-1.5} / zeta(1.5).
inline constexpr double kPowerLaw15Pressure08 = 0.953054409210983375897605;

// sum_{n>=2} 1 / (n log^2 n).
inline constexpr double kNLog2Total = 2.109742801236891974479257;

// sum over N in Z of exp(-2 asinh(|N|/2)) = 1 + 2 sum_{N>=1} (sqrt(1+N^2/4) - N/2)^2.
inline constexpr double kPoincareK1S1 = 2.831175839803639450399634;

// #{N in Z^2 : |N| <= 2 sinh 10}, by exact integer enumeration.
inline constexpr long long kLatticeCountK2T20 = 1524191461LL;

// #{N in Z : |N| <= 2 sinh 10} = 2 floor(2 sinh 10) + 1.
inline constexpr long long kLatticeCountK1T20 = 44053LL;

// Minimal number of closed intervals of length 0.01 covering
// {1/n : 1 <= n <= 100}, by exact rational dynamic programming over all
// placements.
inline constexpr long long kReciprocalCover100 = 17;

// Root of the pressure for continued fractions with digits in {1, 2}
// (published high-precision value, used only as a containment check).
inline constexpr double kGauss12Dimension = 0.5312805062772051;

}  // namespace oracle
