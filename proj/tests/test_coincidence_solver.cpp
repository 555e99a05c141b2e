#include <gtest/gtest.h>

#include <random>

#include "nielsen/axiom_harness.hpp"

using namespace nielsen;

namespace {

EquivariantLift circle_map(std::int64_t m, Rational v = 0) {
    return torus_lift(FlatManifold::torus(1), {{m}}, {v});
}

// alpha f~(x) == g~(x) exactly at the recorded point.
void expect_exact_coincidence(const CoincidenceRecord& r, const EquivariantLift& f, const EquivariantLift& g) {
    ASSERT_TRUE(r.exact_point.has_value());
    const auto& x = *r.exact_point;
    EXPECT_EQ(apply_deck(f.target(), r.alpha, f.evaluate_exact(x)), g.evaluate_exact(x));
    EXPECT_TRUE(in_fundamental_domain(f.source(), x));
}

double sign_det_at(const EquivariantLift& f, const EquivariantLift& g, const DeckElement& alpha, const Vector<double>& x) {
    auto jg = g.jacobian(x);
    auto jf = f.jacobian(x).row_scaled(linear_diagonal(f.target(), alpha));
    return determinant(jg - jf) > 0 ? 1 : -1;
}

} // namespace

TEST(CoincidenceSolver, CircleTripleVersusIdentity) {
    auto recs = find_coincidences_affine(circle_map(3), circle_map(1), OpenRegion::whole(1));
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ((*recs[0].exact_point)[0], Rational(0));
    EXPECT_EQ((*recs[1].exact_point)[0], make_rational(1, 2));
    EXPECT_NE(recs[0].class_rep, recs[1].class_rep);
    for (const auto& r : recs) expect_exact_coincidence(r, circle_map(3), circle_map(1));
}

TEST(CoincidenceSolver, CandidateWindowCoversCircleRoots) {
    auto c = candidate_deck_elements(circle_map(3), circle_map(1), OpenRegion::whole(1));
    for (std::int64_t k : {-2, -1, 0}) EXPECT_NE(std::find(c.begin(), c.end(), DeckElement{0, {k}}), c.end());
}

TEST(CoincidenceSolver, TorusPointCountIsAbsDeterminant) {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 40; ++trial) {
        auto p = random_torus_pair(rng, 1 + trial % 3);
        auto recs = find_coincidences_affine(p.f, p.g, OpenRegion::whole(p.f.source().size()));
        EXPECT_EQ(static_cast<std::int64_t>(recs.size()), std::llabs(to_int64(int_determinant(difference(p.b, p.a)))));
        std::set<DeckElement> classes;
        for (const auto& r : recs) {
            expect_exact_coincidence(r, p.f, p.g);
            classes.insert(r.class_rep);
        }
        EXPECT_EQ(classes.size(), recs.size());
    }
}

TEST(CoincidenceSolver, KleinRecordsAreExactCoincidences) {
    std::mt19937_64 rng(67);
    for (int trial = 0; trial < 40; ++trial) {
        auto [f, g] = random_klein_pair(rng, trial % 2 == 0);
        auto recs = find_coincidences_affine(f, g, OpenRegion::whole(2));
        for (const auto& r : recs) {
            expect_exact_coincidence(r, f, g);
            EXPECT_EQ(r.class_rep, class_of_point(r, f, g));
        }
    }
}

TEST(CoincidenceSolver, NumericAgreesWithExact) {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 30; ++trial) {
        EquivariantLift f, g;
        if (trial % 2) {
            std::tie(f, g) = random_klein_pair(rng, trial % 4 == 1);
        } else {
            auto p = random_torus_pair(rng, 2, 3);
            f = p.f;
            g = p.g;
        }
        auto ex = find_coincidences_affine(f, g, OpenRegion::whole(2));
        auto nu = find_coincidences_numeric(f, g, OpenRegion::whole(2));
        ASSERT_EQ(ex.size(), nu.size());
        for (std::size_t i = 0; i < ex.size(); ++i) {
            EXPECT_LT(quotient_distance(f.source(), ex[i].point, nu[i].point), 1e-9);
            EXPECT_EQ(ex[i].class_rep, nu[i].class_rep);
            EXPECT_EQ(ex[i].aligned_sign, nu[i].aligned_sign);
        }
    }
}

TEST(CoincidenceSolver, SmallPerturbationKeepsCirclePoints) {
    const double amp = 0.01;
    EquivariantLift g = circle_map(1).with_terms({{{amp}, {1}, 0.4}});
    auto recs = find_coincidences_numeric(circle_map(3), g, OpenRegion::whole(1));
    ASSERT_EQ(recs.size(), 2u);
    // |2 dx| <= amp at a simple root of slope 2.
    EXPECT_LT(quotient_distance(FlatManifold::torus(1), recs[0].point, {0.0}), amp / 2 + 1e-9);
    EXPECT_LT(quotient_distance(FlatManifold::torus(1), recs[1].point, {0.5}), amp / 2 + 1e-9);
}

TEST(CoincidenceSolver, LiftChangeMatchesDirectJacobian) {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 20; ++trial) {
        auto [f, g] = random_klein_pair(rng, false);
        for (const auto& r : find_coincidences_affine(f, g, OpenRegion::whole(2))) {
            for (const auto& gamma : deck_generators(f.source())) {
                LiftChange lc = change_lift(r, gamma, f, g);
                auto y = apply_deck(f.source(), gamma, *r.exact_point);
                EXPECT_EQ(apply_deck(f.target(), lc.alpha, f.evaluate_exact(y)), g.evaluate_exact(y));
                EXPECT_EQ(lc.lift_sign, sign_det_at(f, g, lc.alpha, convert_vector<double>(y)));
            }
        }
    }
}

TEST(CoincidenceSolver, SameMapRaisesSingularPair) {
    EXPECT_THROW(find_coincidences_affine(circle_map(2), circle_map(2), OpenRegion::whole(1)), SingularPair);
    EXPECT_THROW(find_coincidences_affine(circle_map(2), circle_map(2, Rational(1)), OpenRegion::whole(1)), SingularPair);
    // A non-lattice offset leaves no coincidences at all.
    EXPECT_TRUE(find_coincidences_affine(circle_map(2), circle_map(2, make_rational(1, 3)), OpenRegion::whole(1)).empty());
}

TEST(CoincidenceSolver, BoundaryPointIsNotAdmissible) {
    OpenRegion half(1, {Box{{Arc::open(Rational(0), make_rational(1, 2))}}});
    EXPECT_THROW(find_coincidences_affine(circle_map(3), circle_map(1), half), NotAdmissible);
    EXPECT_THROW(find_coincidences_numeric(circle_map(3), circle_map(1), half), NotAdmissible);
    OpenRegion inner(1, {Box{{Arc::open(make_rational(1, 4), make_rational(3, 4))}}});
    EXPECT_EQ(find_coincidences_affine(circle_map(3), circle_map(1), inner).size(), 1u);
}

TEST(CoincidenceSolver, TangentialCoincidenceIsNotRegular) {
    // g - f = a (1 - cos 2 pi x): a double root at x = 0.
    EquivariantLift f = circle_map(0, make_rational(1, 5));
    EquivariantLift g = circle_map(0, make_rational(1, 5)).with_terms({{{0.01}, {1}, -std::numbers::pi / 2}});
    // 0.01 sin(2 pi x - pi/2) = -0.01 cos(2 pi x); shifted by +0.01.
    EquivariantLift g1 = g.with_offset({make_rational(1, 5) + make_rational(1, 100)});
    SolverOptions o;
    o.exact = false;
    EXPECT_THROW(CoincidenceSolver(f, g1, DomainMarker::whole_manifold(), o).solve(OpenRegion::whole(1)), NonRegularPoint);
    o.allow_irregular = true;
    auto recs = CoincidenceSolver(f, g1, DomainMarker::whole_manifold(), o).solve(OpenRegion::whole(1));
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_FALSE(recs[0].regular);
}

TEST(CoincidenceSolver, LargePerturbationIsRejected) {
    EquivariantLift g = circle_map(1).with_terms({{{0.5}, {1}, 0.0}});
    SolverOptions o;
    o.exact = false;
    EXPECT_THROW(CoincidenceSolver(circle_map(3), g, DomainMarker::whole_manifold(), o).solve(OpenRegion::whole(1)),
                 PerturbationTooLarge);
}

TEST(CoincidenceSolver, PointsOutsideTheDomainAreRejected) {
    Box b{{Arc::open(make_rational(1, 10), make_rational(2, 10))}};
    EXPECT_THROW(find_coincidences_affine(circle_map(3), circle_map(1), OpenRegion::whole(1), DomainMarker::from_box(b)),
                 DomainMismatch);
}
