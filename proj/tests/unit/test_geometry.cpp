#include <gtest/gtest.h>

#include <cmath>

#include "hmarl/aircraft.hpp"
#include "hmarl/errors.hpp"
#include "hmarl/geometry.hpp"
#include "hmarl/rng.hpp"
#include "oracles.hpp"

using namespace hmarl;

namespace {

Position rand_pos(Rng& rng) { return {rng.uniform(-50, 50), rng.uniform(-50, 50)}; }

Position offset(Position p, double heading_deg, double dist) {
    const double h = heading_deg * kDegToRad;
    return {p.x + dist * std::sin(h), p.y + dist * std::cos(h)};
}

}  // namespace

TEST(WrapHeading, Examples) {
    EXPECT_EQ(wrap_heading(0).value(), 0.0);
    EXPECT_DOUBLE_EQ(wrap_heading(370).value(), 10.0);
    EXPECT_DOUBLE_EQ(wrap_heading(-15).value(), 345.0);
    EXPECT_EQ(wrap_heading(720).value(), 0.0);
    EXPECT_EQ(wrap_heading(-1e-300).value(), 0.0);
}

TEST(WrapHeading, RejectsNonFinite) {
    EXPECT_THROW(wrap_heading(NAN), Error);
    EXPECT_THROW(wrap_heading(INFINITY), Error);
}

TEST(WrapHeading, AlwaysInRange) {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double raw = rng.uniform(-1e6, 1e6);
        const double v = wrap_heading(raw).value();
        ASSERT_GE(v, 0.0);
        ASSERT_LT(v, 360.0);
        const double k = std::round((raw - v) / 360.0);
        ASSERT_NEAR(raw - v, 360.0 * k, 1e-6);
    }
}

TEST(Distance, Examples) {
    EXPECT_EQ(distance_km({0, 0}, {0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(distance_km({0, 0}, {3, 4}), 5.0);
    EXPECT_THROW(distance_km({NAN, 0}, {0, 0}), Error);
}

TEST(Distance, SymmetricAndTriangle) {
    Rng rng(2);
    for (int i = 0; i < 10000; ++i) {
        const auto a = rand_pos(rng), b = rand_pos(rng), c = rand_pos(rng);
        ASSERT_EQ(distance_km(a, b), distance_km(b, a));
        ASSERT_LE(distance_km(a, c), distance_km(a, b) + distance_km(b, c) + 1e-12);
        ASSERT_NEAR(distance_km(a, b), oracle::distance(a.x, a.y, b.x, b.y), 1e-12);
    }
}

TEST(Ata, Examples) {
    EXPECT_NEAR(ata({0, 0}, wrap_heading(0), {0, 5}), 0.0, 1e-12);
    EXPECT_NEAR(ata({0, 0}, wrap_heading(90), {0, 5}), 90.0, 1e-12);
    EXPECT_NEAR(ata({0, 0}, wrap_heading(180), {0, 5}), 180.0, 1e-12);
    EXPECT_THROW(ata({1, 1}, wrap_heading(0), {1, 1}), Error);
}

TEST(AspectAngle, Examples) {
    // LOS observer->target points north.
    EXPECT_NEAR(aspect_angle({0, 0}, {0, 5}, wrap_heading(0)), 0.0, 1e-12);
    EXPECT_NEAR(aspect_angle({0, 0}, {0, 5}, wrap_heading(180)), 180.0, 1e-12);
    EXPECT_NEAR(aspect_angle({0, 0}, {0, 5}, wrap_heading(90)), 90.0, 1e-12);
    EXPECT_THROW(aspect_angle({2, 2}, {2, 2}, wrap_heading(0)), Error);
}

TEST(Ata, MatchesOracleAndIsComplementary) {
    Rng rng(3);
    for (int i = 0; i < 20000; ++i) {
        const auto o = rand_pos(rng), t = rand_pos(rng);
        const auto h = wrap_heading(rng.uniform(0, 360));
        const double a = ata(o, h, t);
        ASSERT_NEAR(a, oracle::ata(o.x, o.y, h.value(), t.x, t.y), 1e-9);
        ASSERT_NEAR(a + ata(o, wrap_heading(h.value() + 180), t), 180.0, 1e-9);
        const double aa = aspect_angle(o, t, h);
        ASSERT_NEAR(aa, oracle::aspect(o.x, o.y, t.x, t.y, h.value()), 1e-9);
    }
}

TEST(Ata, RigidTransformInvariance) {
    Rng rng(4);
    for (int i = 0; i < 5000; ++i) {
        const auto o = rand_pos(rng), t = rand_pos(rng);
        const double ho = rng.uniform(0, 360), ht = rng.uniform(0, 360);
        const double rot = rng.uniform(0, 360);
        const Position shift{rng.uniform(-100, 100), rng.uniform(-100, 100)};
        // Rotating compass headings clockwise by `rot` rotates (x, y) the same way.
        auto move = [&](Position p) {
            const double r = rot * kDegToRad;
            return Position{p.x * std::cos(r) + p.y * std::sin(r) + shift.x,
                            -p.x * std::sin(r) + p.y * std::cos(r) + shift.y};
        };
        const auto o2 = move(o), t2 = move(t);
        ASSERT_NEAR(ata(o, wrap_heading(ho), t), ata(o2, wrap_heading(ho + rot), t2), 1e-9);
        ASSERT_NEAR(aspect_angle(o, t, wrap_heading(ht)), aspect_angle(o2, t2, wrap_heading(ht + rot)), 1e-9);
    }
}

TEST(Wez, TableExamples) {
    const Position o{10, 10};
    EXPECT_TRUE(in_wez(o, wrap_heading(0), kAc1Spec, {10, 11}));
    EXPECT_FALSE(in_wez(o, wrap_heading(0), kAc1Spec, {10, 13}));
    EXPECT_TRUE(in_wez(o, wrap_heading(0), kAc2Spec, offset(o, 6.9, 4.0)));
    EXPECT_FALSE(in_wez(o, wrap_heading(0), kAc2Spec, offset(o, 7.1, 4.0)));
    EXPECT_TRUE(in_wez(o, wrap_heading(0), kAc2Spec, {10, 14.5}));
    EXPECT_FALSE(in_wez(o, wrap_heading(0), kAc2Spec, {10, 14.6}));
}

TEST(Wez, Monotone) {
    Rng rng(5);
    for (int i = 0; i < 5000; ++i) {
        const auto& spec = rng.bernoulli(0.5) ? kAc1Spec : kAc2Spec;
        const Position o{0, 0};
        const double angle = rng.uniform(0, 20), d = rng.uniform(0.01, 6);
        if (!in_wez(o, wrap_heading(0), spec, offset(o, angle, d))) continue;
        ASSERT_TRUE(in_wez(o, wrap_heading(0), spec, offset(o, angle * rng.uniform(), d)));
        ASSERT_TRUE(in_wez(o, wrap_heading(0), spec, offset(o, angle, d * rng.uniform(0.01, 1))));
    }
}

TEST(HeadingDifference, SignedShortestTurn) {
    EXPECT_DOUBLE_EQ(heading_difference(wrap_heading(350), wrap_heading(10)), 20.0);
    EXPECT_DOUBLE_EQ(heading_difference(wrap_heading(10), wrap_heading(350)), -20.0);
    EXPECT_DOUBLE_EQ(heading_difference(wrap_heading(0), wrap_heading(180)), 180.0);
}
