#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crflab/fixtures.hpp"
#include "crflab/geometry.hpp"

using namespace crflab;

namespace {

// Independent long-double evaluation of the inner angles from conformal
// factors, straight from the laws of cosines.
using LD = long double;

std::array<LD, 3> oracle_angles(Geometry g, const std::array<LD, 3>& u, const Triple& phi) {
    std::array<LD, 3> r;
    for (int a = 0; a < 3; ++a) r[a] = g == Geometry::euclidean ? std::exp(u[a]) : 2 * std::atanh(std::exp(u[a]));
    std::array<LD, 3> l;
    for (int a = 0; a < 3; ++a) {
        const LD ri = r[(a + 1) % 3], rj = r[(a + 2) % 3], c = std::cos(static_cast<LD>(phi[a]));
        if (g == Geometry::euclidean)
            l[a] = std::sqrt(ri * ri + rj * rj + 2 * c * ri * rj);
        else
            l[a] = std::acosh(std::cosh(ri) * std::cosh(rj) + c * std::sinh(ri) * std::sinh(rj));
    }
    std::array<LD, 3> theta;
    for (int a = 0; a < 3; ++a) {
        const LD x = l[a], y = l[(a + 1) % 3], z = l[(a + 2) % 3];
        const LD f = g == Geometry::euclidean ? (y * y + z * z - x * x) / (2 * y * z)
                                              : (std::cosh(y) * std::cosh(z) - std::cosh(x)) / (std::sinh(y) * std::sinh(z));
        theta[a] = std::acos(std::clamp<LD>(f, -1, 1));
    }
    return theta;
}

// Central differences with step h and h/2, Richardson-extrapolated.
Matrix3 oracle_jacobian(Geometry g, const Triple& u, const Triple& phi, double h = 1e-6) {
    auto central = [&](int b, LD step) {
        std::array<LD, 3> up{u[0], u[1], u[2]}, dn = up;
        up[b] += step;
        dn[b] -= step;
        auto tp = oracle_angles(g, up, phi), tm = oracle_angles(g, dn, phi);
        std::array<LD, 3> d;
        for (int a = 0; a < 3; ++a) d[a] = (tp[a] - tm[a]) / (2 * step);
        return d;
    };
    Matrix3 jac{};
    for (int b = 0; b < 3; ++b) {
        auto d1 = central(b, h), d2 = central(b, h / 2);
        for (int a = 0; a < 3; ++a) jac[a][b] = static_cast<double>((4 * d2[a] - d1[a]) / 3);
    }
    return jac;
}

Triple radii_of(Geometry g, const Triple& u) {
    return {radius_from_factor(g, u[0]), radius_from_factor(g, u[1]), radius_from_factor(g, u[2])};
}

struct Sample {
    Triple u, phi;
};

std::vector<Sample> random_samples(Geometry g, int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> du = g == Geometry::euclidean ? std::uniform_real_distribution<double>(-3.0, 1.0)
                                                                        : std::uniform_real_distribution<double>(-4.0, -0.05);
    std::uniform_real_distribution<double> dphi(0.0, kPi / 2);
    std::vector<Sample> out(count);
    for (auto& s : out)
        for (int a = 0; a < 3; ++a) s.u[a] = du(rng), s.phi[a] = dphi(rng);
    return out;
}

PackingMetric random_metric(const Triangulation& t, Geometry g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> du = g == Geometry::euclidean ? std::uniform_real_distribution<double>(-3.0, 1.0)
                                                                        : std::uniform_real_distribution<double>(-4.0, -0.05);
    std::uniform_real_distribution<double> dphi(0.0, kPi / 2);
    PackingMetric m{g, std::vector<double>(t.vertex_count()), std::vector<double>(t.edge_count())};
    for (double& x : m.u) x = du(rng);
    for (double& p : m.phi) p = dphi(rng);
    return m;
}

class BothGeometries : public ::testing::TestWithParam<Geometry> {};

} // namespace

TEST(ConformalFactor, Examples) {
    EXPECT_EQ(factor_from_radius(Geometry::euclidean, 1.0), 0.0);
    EXPECT_NEAR(factor_from_radius(Geometry::hyperbolic, 2.0 * std::atanh(0.5)), std::log(0.5), 1e-15);
    EXPECT_THROW(factor_from_radius(Geometry::euclidean, 0.0), InputError);
    EXPECT_THROW(factor_from_radius(Geometry::hyperbolic, -1.0), InputError);
    EXPECT_THROW(radius_from_factor(Geometry::hyperbolic, 0.0), InputError);
    EXPECT_THROW(radius_from_factor(Geometry::hyperbolic, 0.5), InputError);
}

TEST_P(BothGeometries, ConformalFactorRoundTrip) {
    const Geometry g = GetParam();
    for (double e = -6.0; e <= 2.0; e += 0.05) {
        const double r = std::pow(10.0, e);
        EXPECT_NEAR(radius_from_factor(g, factor_from_radius(g, r)) / r, 1.0, 1e-12) << r;
    }
}

TEST(EdgeLength, Examples) {
    EXPECT_DOUBLE_EQ(edge_length(Geometry::euclidean, 1, 1, 0), 2.0);
    EXPECT_DOUBLE_EQ(edge_length(Geometry::euclidean, 1, 1, kPi / 2), std::sqrt(2.0));
    for (double a : {1e-4, 0.3, 1.0, 5.0, 40.0, 200.0, 400.0})
        EXPECT_NEAR(edge_length(Geometry::hyperbolic, a, a, 0) / (2 * a), 1.0, 1e-13) << a;
    EXPECT_THROW(edge_length(Geometry::euclidean, 0, 1, 0), DegenerateTriangle);
    EXPECT_THROW(edge_length(Geometry::euclidean, 1, 1, 2.0), InputError);
    EXPECT_THROW(edge_length(Geometry::hyperbolic, 1, 1, -0.1), InputError);
}

TEST(EdgeLength, SymmetricAndContinuousAcrossLogDomain) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dr(0.01, 5.0), dphi(0, kPi / 2);
    for (int k = 0; k < 200; ++k) {
        const double a = dr(rng), b = dr(rng), p = dphi(rng);
        for (Geometry g : {Geometry::euclidean, Geometry::hyperbolic})
            EXPECT_EQ(edge_length(g, a, b, p), edge_length(g, b, a, p));
    }
    for (double p : {0.0, 0.7, kPi / 2}) {
        const double below = edge_length(Geometry::hyperbolic, 175.0, 174.9999999, p);
        const double above = edge_length(Geometry::hyperbolic, 175.0, 175.0000001, p);
        EXPECT_NEAR(above - below, 2e-7, 1e-9);
    }
}

TEST(TriangleAngles, Examples) {
    const Triple ones{1, 1, 1}, zero{0, 0, 0};
    auto e = triangle_angles(Geometry::euclidean, ones, zero);
    for (double a : e.angles) EXPECT_NEAR(a, kPi / 3, 1e-15);
    auto h = triangle_angles(Geometry::hyperbolic, ones, zero);
    const double c2 = std::cosh(2.0), s2 = std::sinh(2.0);
    const double expected = std::acos(c2 * (c2 - 1) / (s2 * s2));
    for (int a = 0; a < 3; ++a) {
        EXPECT_NEAR(h.lengths[a], 2.0, 1e-15);
        EXPECT_NEAR(h.angles[a], expected, 1e-14);
    }
}

TEST_P(BothGeometries, AngleSumsAndNondegeneracy) {
    const Geometry g = GetParam();
    for (const auto& s : random_samples(g, 1000, 5)) {
        FaceAngles fa;
        ASSERT_NO_THROW(fa = triangle_angles(g, radii_of(g, s.u), s.phi));
        const double sum = fa.angles[0] + fa.angles[1] + fa.angles[2];
        if (g == Geometry::euclidean)
            EXPECT_NEAR(sum, kPi, 1e-10);
        else
            EXPECT_LT(sum, kPi);
        for (int a = 0; a < 3; ++a) {
            EXPECT_GT(fa.angles[a], 0.0);
            EXPECT_LT(fa.angles[a], kPi);
            EXPECT_LT(fa.lengths[a], fa.lengths[(a + 1) % 3] + fa.lengths[(a + 2) % 3]);
        }
    }
}

TEST(TriangleAngles, RejectsImpossibleLengths) {
    EXPECT_THROW(angles_from_lengths(Geometry::euclidean, {1.0, 1.0, 3.0}), DegenerateTriangle);
    EXPECT_THROW(angles_from_lengths(Geometry::hyperbolic, {1.0, 1.0, 2.5}), DegenerateTriangle);
    EXPECT_THROW(angles_from_lengths(Geometry::euclidean, {0.0, 1.0, 1.0}), DegenerateTriangle);
}

TEST_P(BothGeometries, JacobianMatchesFiniteDifferences) {
    const Geometry g = GetParam();
    double worst = 0.0;
    for (const auto& s : random_samples(g, 1000, 17)) {
        const Matrix3 jac = angle_jacobian(g, radii_of(g, s.u), s.phi);
        const Matrix3 fd = oracle_jacobian(g, s.u, s.phi);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const double rel = std::abs(jac[a][b] - fd[a][b]) / std::abs(fd[a][b]);
                worst = std::max(worst, rel);
            }
    }
    EXPECT_LT(worst, 1e-6);
}

TEST_P(BothGeometries, JacobianSignsSymmetryRowSums) {
    const Geometry g = GetParam();
    for (const auto& s : random_samples(g, 1000, 23)) {
        const Matrix3 jac = angle_jacobian(g, radii_of(g, s.u), s.phi);
        for (int a = 0; a < 3; ++a) {
            double row = 0.0, scale = 0.0;
            for (int b = 0; b < 3; ++b) {
                row += jac[a][b];
                scale = std::max(scale, std::abs(jac[a][b]));
                if (a == b)
                    EXPECT_LT(jac[a][b], 0.0);
                else
                    EXPECT_GT(jac[a][b], 0.0);
                EXPECT_NEAR(jac[a][b], jac[b][a], 1e-12 * std::max(1.0, std::abs(jac[a][b])));
            }
            if (g == Geometry::euclidean)
                EXPECT_NEAR(row, 0.0, 1e-12 * scale);
            else
                EXPECT_LT(row, 0.0);
        }
    }
}

TEST_P(BothGeometries, AnglesMonotoneInFactors) {
    const Geometry g = GetParam();
    for (const auto& s : random_samples(g, 300, 29)) {
        const auto base = triangle_angles(g, radii_of(g, s.u), s.phi).angles;
        for (int b = 0; b < 3; ++b) {
            Triple u = s.u;
            u[b] += 1e-3;
            const auto moved = triangle_angles(g, radii_of(g, u), s.phi).angles;
            for (int a = 0; a < 3; ++a) {
                if (a == b)
                    EXPECT_LT(moved[a], base[a]);
                else
                    EXPECT_GT(moved[a], base[a]);
            }
        }
    }
}

TEST_P(BothGeometries, PowerCenterReproducesJacobian) {
    const Geometry g = GetParam();
    // Exact for tangent packings in both geometries and for any angles in
    // the Euclidean plane.
    for (auto s : random_samples(g, 500, 31)) {
        if (g == Geometry::hyperbolic) s.phi = {0, 0, 0};
        const Triple r = radii_of(g, s.u);
        const Matrix3 jac = angle_jacobian(g, r, s.phi);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                if (i == j) continue;
                EXPECT_NEAR(power_center_derivative(g, r, s.phi, i, j), jac[i][j], 1e-10 * std::max(1.0, jac[i][j]));
            }
    }
    EXPECT_THROW(power_center_derivative(g, {1, 1, 1}, {0, 0, 0}, 1, 1), InputError);
}

TEST(PowerCenter, HyperbolicDerivativesBoundedByOne) {
    for (const auto& s : random_samples(Geometry::hyperbolic, 1000, 33)) {
        const Triple r = radii_of(Geometry::hyperbolic, s.u);
        const Matrix3 jac = angle_jacobian(Geometry::hyperbolic, r, s.phi);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                if (i == j) continue;
                EXPECT_LE(jac[i][j], 1.0);
                EXPECT_LE(power_center_derivative(Geometry::hyperbolic, r, s.phi, i, j), 1.0);
            }
    }
}

TEST_P(BothGeometries, DerivativeRatioBelowEmpiricalConstant) {
    const Geometry g = GetParam();
    const double c_emp = g == Geometry::euclidean ? fixtures::kRatioBoundEuclidean : fixtures::kRatioBoundHyperbolic;
    for (const auto& s : random_samples(g, 1000, 37))
        EXPECT_LE(angle_derivative_ratio(g, radii_of(g, s.u), s.phi), c_emp);
}

TEST(DerivativeRatio, EuclideanScaleInvariance) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> dr(0.05, 3.0), dphi(0, kPi / 2), dl(0.01, 100.0);
    for (int k = 0; k < 200; ++k) {
        const Triple r{dr(rng), dr(rng), dr(rng)}, phi{dphi(rng), dphi(rng), dphi(rng)};
        const double lambda = dl(rng);
        const Triple scaled{lambda * r[0], lambda * r[1], lambda * r[2]};
        const auto a = triangle_angles(Geometry::euclidean, r, phi).angles;
        const auto b = triangle_angles(Geometry::euclidean, scaled, phi).angles;
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-13);
        EXPECT_NEAR(angle_derivative_ratio(Geometry::euclidean, r, phi),
                    angle_derivative_ratio(Geometry::euclidean, scaled, phi), 1e-10);
    }
}

TEST(Curvature, FlatAndRegularStars) {
    auto hex = build_hexagonal(3);
    auto m = constant_metric(hex, Geometry::euclidean, 0.0);
    for (VertexId v = 0; v < hex.vertex_count(); ++v) {
        if (hex.has_closed_star(v)) {
            EXPECT_NEAR(curvature(hex, m, v), 0.0, 1e-14);
        }
    }
    auto d7 = build_constant_degree(7, 2);
    auto m7 = constant_metric(d7, Geometry::euclidean, 0.4);
    EXPECT_NEAR(curvature(d7, m7, d7.root()), -kPi / 3, 1e-14);
    VertexId boundary = 0;
    while (hex.has_closed_star(boundary)) ++boundary;
    EXPECT_THROW(curvature(hex, m, boundary), InputError);
}

TEST_P(BothGeometries, CurvatureDegreeBounds) {
    const Geometry g = GetParam();
    for (auto t : {build_hexagonal(4), build_constant_degree(7, 3), build_constant_degree(9, 2)})
        for (unsigned seed = 0; seed < 5; ++seed) {
            auto m = random_metric(t, g, seed);
            for (VertexId v = 0; v < t.vertex_count(); ++v) {
                if (!t.has_closed_star(v)) continue;
                const double k = curvature(t, m, v);
                EXPECT_GE(k, kTwoPi - kPi * static_cast<double>(t.degree(v)));
                EXPECT_LT(k, kTwoPi);
            }
        }
}

TEST_P(BothGeometries, TruncationCurvaturesAgreeWithPerVertex) {
    const Geometry g = GetParam();
    auto t = std::make_shared<const Triangulation>(build_constant_degree(7, 3));
    auto tr = truncate(t, 3);
    auto m = random_metric(*t, g, 3);
    auto k = interior_curvatures(tr, m);
    ASSERT_EQ(k.size(), tr.interior.size());
    for (std::size_t i = 0; i < k.size(); ++i) EXPECT_NEAR(k[i], curvature(tr, m, tr.interior[i]), 1e-13);
}

TEST_P(BothGeometries, CurvatureJacobianRowProperties) {
    const Geometry g = GetParam();
    auto t = build_constant_degree(7, 3);
    auto m = random_metric(t, g, 8);
    for (VertexId v = 0; v < t.vertex_count(); ++v) {
        if (!t.has_closed_star(v)) continue;
        auto row = curvature_jacobian_row(t, m, v);
        EXPECT_EQ(row.entries.size(), t.degree(v) + 1);
        EXPECT_GT(row.entries.at(v), 0.0);
        for (auto [w, value] : row.entries) {
            if (w == v) continue;
            EXPECT_LT(value, 0.0);
            if (t.has_closed_star(w)) {
                auto other = curvature_jacobian_row(t, m, w);
                EXPECT_NEAR(other.entries.at(v), value, 1e-12 * std::max(1.0, std::abs(value)));
            }
        }
        if (g == Geometry::euclidean)
            EXPECT_NEAR(row.defect, 0.0, 1e-12 * row.entries.at(v));
        else
            EXPECT_GT(row.defect, 0.0);
    }
}

TEST_P(BothGeometries, HexagonalRowMatchesCurvatureDifferences) {
    const Geometry g = GetParam();
    auto t = build_hexagonal(2);
    const double u0 = g == Geometry::euclidean ? 0.0 : -1.0;
    auto m = constant_metric(t, g, u0);
    const VertexId v = t.root();
    auto row = curvature_jacobian_row(t, m, v);
    auto k_at = [&](VertexId w, double du) {
        auto shifted = m;
        shifted.u[w] += du;
        return curvature(t, shifted, v);
    };
    const double h = 1e-5;
    for (auto [w, value] : row.entries) {
        const double d1 = (k_at(w, h) - k_at(w, -h)) / (2 * h);
        const double d2 = (k_at(w, h / 2) - k_at(w, -h / 2)) / h;
        const double fd = (4 * d2 - d1) / 3;
        EXPECT_NEAR(value, fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST(Metric, Validation) {
    auto t = build_hexagonal(1);
    EXPECT_THROW(constant_metric(t, Geometry::hyperbolic, 0.0), InputError);
    auto m = constant_metric(t, Geometry::euclidean, 0.0);
    EXPECT_NO_THROW(validate_metric(t, m));
    m.u.pop_back();
    EXPECT_THROW(validate_metric(t, m), InputError);
    EXPECT_EQ(geometry_from_string("hyperbolic"), Geometry::hyperbolic);
    EXPECT_THROW(geometry_from_string("spherical"), InputError);
}

INSTANTIATE_TEST_SUITE_P(Geometry, BothGeometries, ::testing::Values(Geometry::euclidean, Geometry::hyperbolic),
                         [](const auto& info) { return std::string(to_string(info.param)); });
