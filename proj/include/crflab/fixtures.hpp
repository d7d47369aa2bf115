#pragma once

// Generated by tools/fixture_oracle. Do not edit.

namespace crflab::fixtures {

// Empirical sup of (d theta_i / d u_j) / theta_i over log-spaced radius
// grids ([1e-3, 1e3]^3 Euclidean, [1e-3, 10]^3 hyperbolic) and intersection
// angles in {0, pi/8, ..., pi/2}^3.
inline constexpr double kRatioBoundEuclidean = 1.0003432428333938;
inline constexpr double kRatioBoundHyperbolic = 0.99999951585599445;

// Empirical sup of |F(z)| / |z|^2 over 0 < |z| <= kFieldRadius for the
// hexagonal nonlinearity F (cubic grid of step 0.2 plus 200000 seeded
// directions on six shells). kQuadraticBound carries a 5% margin over it.
inline constexpr double kFieldRadius = 1.0;
inline constexpr double kQuadraticSup = 0.14361970633889912;
inline constexpr double kQuadraticBound = 0.15080069165584406;

} // namespace crflab::fixtures
