#include <gtest/gtest.h>

#include <random>
#include <set>

#include "nielsen/axiom_harness.hpp"

using namespace nielsen;

TEST(Orientation, ExactlyTwoGlobalChoices) {
    auto g = klein_glide_lift(0, 1, 2, Rational(0));
    std::set<int> signs;
    for (int base : {1, -1}) signs.insert(coherent_orientation(g.hom(), OrientationScope::Global, base).global_sign());
    EXPECT_EQ(signs.size(), 2u);
    EXPECT_THROW(coherent_orientation(klein_translation_lift(1, 0, {Rational(0), Rational(0)}).hom(),
                                      OrientationScope::Global, 1),
                 NotOrientationTrue);
}

TEST(Orientation, PerClassAnchorsOneClass) {
    auto g = klein_translation_lift(1, 0, {Rational(0), Rational(0)});
    DeckElement c{0, {1, 0}};
    auto o = coherent_orientation(g.hom(), OrientationScope::PerClass, -1, c);
    EXPECT_EQ(o.sign(c), -1);
    EXPECT_EQ(o.sign(DeckElement{0, {0, 0}}), 1);
}

TEST(Orientation, NegateIsAnInvolutionThatFlipsEverySign) {
    OrientationChoice o = OrientationChoice::per_class({{DeckElement{0, {1}}, -1}, {DeckElement{0, {2}}, 1}});
    OrientationChoice n = negate(o);
    EXPECT_EQ(n.sign(DeckElement{0, {1}}), 1);
    EXPECT_EQ(n.sign(DeckElement{0, {2}}), -1);
    EXPECT_EQ(n.sign(DeckElement{0, {7}}), -1);
    EXPECT_EQ(negate(n), o);
    EXPECT_EQ(negate(OrientationChoice::global(1)), OrientationChoice::global(-1));
    EXPECT_THROW(OrientationChoice::global(0), NielsenError);
}

TEST(Orientation, TransportNeedsCertificate) {
    auto f = torus_lift(FlatManifold::torus(1), {{3}}, {Rational(0)});
    auto g = torus_lift(FlatManifold::torus(1), {{1}}, {Rational(0)});
    AdmissibleHomotopy h(f, g, f, g.with_offset({make_rational(1, 100)}), OpenRegion::whole(1));
    auto o = OrientationChoice::global(-1);
    EXPECT_THROW(transport_through_homotopy(o, h), NotAdmissible);
    h.certify();
    EXPECT_EQ(transport_through_homotopy(o, h), o);
}

TEST(Orientation, EmbeddingSignFollowsDeterminant) {
    const FlatManifold t = FlatManifold::torus(2);
    auto g = torus_lift(t, {{0, 1}, {1, 0}}, {Rational(0), Rational(0)});
    EXPECT_EQ(sign_of_embedding(g, {0.3, 0.4}, OrientationChoice::global(1), deck_identity(t)), -1);
    EXPECT_EQ(sign_of_embedding(g, {0.3, 0.4}, OrientationChoice::global(-1), deck_identity(t)), 1);
    auto c = torus_lift(t, {{0, 0}, {0, 0}}, {Rational(0), Rational(0)});
    EXPECT_THROW(sign_of_embedding(c, {0.3, 0.4}, OrientationChoice::global(1), deck_identity(t)), SingularJacobian);
}

// The aligned sign equals sign det(Jg - A_c Jf) evaluated directly at the lift whose deck element is c.
TEST(Orientation, AlignedSignIsTheSignAtTheCanonicalLift) {
    std::mt19937_64 rng(83);
    for (int trial = 0; trial < 30; ++trial) {
        auto [f, g] = random_klein_pair(rng, false);
        TwistedConjugacy tc(f.hom(), g.hom());
        for (const auto& r : find_coincidences_affine(f, g, OpenRegion::whole(2))) {
            CanonicalForm cf = tc.canonicalize(r.alpha);
            auto y = apply_deck(f.source(), cf.gamma, *r.exact_point);
            EXPECT_EQ(apply_deck(f.target(), cf.rep, f.evaluate_exact(y)), g.evaluate_exact(y));
            Matrix<Rational> d = g.linear() - f.linear().row_scaled(linear_diagonal(f.target(), cf.rep));
            EXPECT_EQ(r.aligned_sign, sign_of(determinant(d)));
        }
    }
}

TEST(Orientation, SwapTwiceRestoresSigns) {
    std::mt19937_64 rng(89);
    for (int trial = 0; trial < 20; ++trial) {
        auto [f, g] = random_klein_pair(rng, true);
        TwistedConjugacy fg(f.hom(), g.hom()), gf(g.hom(), f.hom());
        auto o = OrientationChoice::global(trial % 2 ? 1 : -1);
        auto cs = fg.classes();
        ASSERT_TRUE(cs.finite);
        auto swapped = swap_orientation(o, fg, gf, cs.representatives);
        std::vector<DeckElement> back;
        for (const auto& c : cs.representatives) back.push_back(gf.canonical_rep(deck_inverse(f.target(), c)));
        auto again = swap_orientation(swapped, gf, fg, back);
        for (const auto& c : cs.representatives) EXPECT_EQ(again.sign(c), o.sign(c));
    }
}
