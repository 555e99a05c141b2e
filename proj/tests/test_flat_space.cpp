#include <gtest/gtest.h>

#include <random>

#include "nielsen/flat_space.hpp"

using namespace nielsen;

namespace {

FlatManifold klein() { return FlatManifold::glide({1, -1}, {make_rational(1, 2), Rational(0)}); }

FlatManifold glide3() { return FlatManifold::glide({1, -1, -1}, {make_rational(1, 2), Rational(0), Rational(0)}, "G3"); }

DeckElement random_deck(std::mt19937_64& rng, const FlatManifold& m) {
    std::uniform_int_distribution<int> k(-3, 3), e(0, 1);
    DeckElement g{m.is_glide() ? e(rng) : 0, IntVector(m.size())};
    for (auto& x : g.k) x = k(rng);
    return g;
}

Vector<Rational> random_point(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> num(-300, 300);
    Vector<Rational> x(n);
    for (auto& v : x) v = make_rational(num(rng), 97);
    return x;
}

} // namespace

TEST(FlatManifold, RejectsBadGlideData) {
    EXPECT_THROW(FlatManifold::glide({1, 2}, {make_rational(1, 2), Rational(0)}), InvalidGlide);
    EXPECT_THROW(FlatManifold::glide({1, -1}, {Rational(1), Rational(0)}), InvalidGlide);
    EXPECT_THROW(FlatManifold::glide({1, 1}, {make_rational(1, 2), make_rational(1, 3)}), InvalidGlide);
    EXPECT_NO_THROW(FlatManifold::glide({1, -1}, {make_rational(1, 2), make_rational(1, 3)}));
    EXPECT_THROW(FlatManifold::glide({1, -1}, {Rational(0), make_rational(1, 2)}), InvalidGlide);
    EXPECT_THROW(FlatManifold::torus(0), InvalidGlide);
    EXPECT_THROW(make_manifold(2, ManifoldKind::Torus, std::vector<int>{1, -1}), InvalidGlide);
}

TEST(FlatManifold, OrientationCharacter) {
    EXPECT_FALSE(klein().orientable());
    EXPECT_EQ(character(deck_glide(klein()), klein()), -1);
    EXPECT_TRUE(glide3().orientable());
    EXPECT_EQ(character(deck_glide(glide3()), glide3()), 1);
    EXPECT_EQ(character(deck_translation({3, -1}), klein()), 1);
}

TEST(DeckGroup, CompositionMatchesActionOnPoints) {
    std::mt19937_64 rng(3);
    for (const auto& m : {FlatManifold::torus(3), klein(), glide3()}) {
        for (int trial = 0; trial < 100; ++trial) {
            DeckElement a = random_deck(rng, m), b = random_deck(rng, m), c = random_deck(rng, m);
            auto x = random_point(rng, m.size());
            EXPECT_EQ(apply_deck(m, deck_compose(m, a, b), x), apply_deck(m, a, apply_deck(m, b, x)));
            EXPECT_EQ(deck_compose(m, a, deck_inverse(m, a)), deck_identity(m));
            EXPECT_EQ(deck_compose(m, deck_compose(m, a, b), c), deck_compose(m, a, deck_compose(m, b, c)));
            EXPECT_EQ(character(deck_compose(m, a, b), m), character(a, m) * character(b, m));
        }
    }
}

TEST(DeckGroup, GlideSquaresToLatticeTranslation) {
    const FlatManifold k = klein();
    EXPECT_EQ(deck_power(k, deck_glide(k), 2), deck_translation({1, 0}));
    EXPECT_EQ(deck_power(k, deck_glide(k), -2), deck_translation({-1, 0}));
}

TEST(FundamentalDomain, ReductionRecoversInputExactly) {
    std::mt19937_64 rng(5);
    for (const auto& m : {FlatManifold::torus(2), klein(), glide3()}) {
        for (int trial = 0; trial < 200; ++trial) {
            auto x = random_point(rng, m.size());
            auto red = reduce_to_fundamental_domain(m, x);
            EXPECT_EQ(apply_deck(m, red.deck, red.point), x);
            for (std::size_t i = 0; i < m.size(); ++i) {
                EXPECT_GE(red.point[i], 0);
                Rational top = m.is_glide() && static_cast<int>(i) == m.glide_axis() ? make_rational(1, 2) : Rational(1);
                EXPECT_LT(red.point[i], top);
            }
            // Points in the same orbit reduce to the same representative.
            auto y = apply_deck(m, random_deck(rng, m), x);
            EXPECT_EQ(reduce_to_fundamental_domain(m, y).point, red.point);
        }
    }
}

TEST(FundamentalDomain, QuotientDistanceMatchesOrbitSearch) {
    std::mt19937_64 rng(9);
    const FlatManifold k = klein();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Vector<double> a{u(rng), u(rng)}, b{u(rng), u(rng)};
        double best = 1e9;
        for (int e = 0; e <= 1; ++e)
            for (int i = -3; i <= 3; ++i)
                for (int j = -3; j <= 3; ++j) {
                    auto y = apply_deck(k, DeckElement{e, {i, j}}, b);
                    best = std::min(best, std::max(std::fabs(a[0] - y[0]), std::fabs(a[1] - y[1])));
                }
        EXPECT_NEAR(quotient_distance(k, a, b), best, 1e-12);
    }
}

TEST(Regions, ArcsWrapAroundZero) {
    Arc a = Arc::open(make_rational(9, 10), make_rational(11, 10));
    EXPECT_TRUE(a.contains(Rational(0)));
    EXPECT_TRUE(a.contains(0.95));
    EXPECT_FALSE(a.contains(0.5));
    EXPECT_FALSE(a.contains(make_rational(9, 10)));
    EXPECT_THROW(Arc::open(Rational(1), Rational(0)), InvalidRegion);
    EXPECT_THROW(Arc::open(Rational(0), Rational(2)), InvalidRegion);
}

TEST(Regions, GlideImageCountsForDisjointness) {
    const FlatManifold k = klein();
    Box b1{{Arc::open(make_rational(1, 10), make_rational(2, 10)), Arc::open(make_rational(1, 10), make_rational(2, 10))}};
    // The glide image of b2 is (0.1,0.2) x (0.1,0.2).
    Box b2{{Arc::open(make_rational(6, 10), make_rational(7, 10)), Arc::open(make_rational(8, 10), make_rational(9, 10))}};
    Box b3{{Arc::open(make_rational(6, 10), make_rational(7, 10)), Arc::open(make_rational(1, 10), make_rational(2, 10))}};
    EXPECT_FALSE(regions_disjoint(k, OpenRegion(2, {b1}), OpenRegion(2, {b2})));
    EXPECT_TRUE(regions_disjoint(k, OpenRegion(2, {b1}), OpenRegion(2, {b3})));
    EXPECT_TRUE(regions_disjoint(FlatManifold::torus(2), OpenRegion(2, {b1}), OpenRegion(2, {b2})));
    OpenRegion r(2, {b1});
    EXPECT_TRUE(r.contains(k, Vector<double>{0.65, 0.85}));
    EXPECT_FALSE(r.contains(FlatManifold::torus(2), Vector<double>{0.65, 0.85}));
}

TEST(Regions, WholeAndEmpty) {
    EXPECT_TRUE(OpenRegion::whole(3).is_whole());
    EXPECT_TRUE(OpenRegion::empty(3).is_empty());
    EXPECT_FALSE(OpenRegion::empty(3).contains(FlatManifold::torus(3), Vector<double>{0.1, 0.2, 0.3}));
    EXPECT_THROW(OpenRegion(2, {Box{{Arc::whole()}}}), InvalidRegion);
}

TEST(DomainMarker, BoxMustEmbed) {
    const FlatManifold k = klein();
    DomainMarker wide = DomainMarker::from_box(Box{{Arc::whole(), Arc::open(make_rational(-1, 10), make_rational(1, 10))}});
    DomainMarker annulus = DomainMarker::from_box(Box{{Arc::whole(), Arc::open(make_rational(1, 10), make_rational(2, 10))}});
    EXPECT_NO_THROW(annulus.validate(k));
    EXPECT_THROW(wide.validate(k), DomainMismatch);
    DomainMarker ok = DomainMarker::from_box(Box{{Arc::open(Rational(0), make_rational(2, 5)), Arc::whole()}});
    EXPECT_NO_THROW(ok.validate(k));
    EXPECT_EQ(ok.loop_directions(), std::vector<std::size_t>{1});
}
