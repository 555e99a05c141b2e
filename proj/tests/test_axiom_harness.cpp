#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "nielsen/axiom_harness.hpp"

using namespace nielsen;

namespace {

HarnessOptions quick(int trials = 25) {
    HarnessOptions o;
    o.trials = trials;
    return o;
}

void expect_clean(const CheckReport& r) {
    EXPECT_TRUE(r.ok()) << r.name << ": " << (r.failures.empty() ? "" : r.failures.front().detail);
    EXPECT_EQ(r.passed, r.trials);
}

} // namespace

TEST(AxiomHarness, Additivity) { expect_clean(AxiomHarness(quick()).check_additivity()); }
TEST(AxiomHarness, Excision) { expect_clean(AxiomHarness(quick()).check_excision()); }
TEST(AxiomHarness, Homotopy) { expect_clean(AxiomHarness(quick(20)).check_homotopy()); }
TEST(AxiomHarness, Normalization) { expect_clean(AxiomHarness(quick()).check_normalization()); }
TEST(AxiomHarness, Swap) { expect_clean(AxiomHarness(quick()).check_swap()); }
TEST(AxiomHarness, Flip) { expect_clean(AxiomHarness(quick()).check_flip()); }
TEST(AxiomHarness, Localization) { expect_clean(AxiomHarness(quick()).check_localization()); }
TEST(AxiomHarness, Degeneracy) { expect_clean(AxiomHarness(quick()).check_degeneracy_correspondence()); }
TEST(AxiomHarness, DomainDependence) { expect_clean(AxiomHarness(quick()).check_domain_dependence()); }
TEST(AxiomHarness, Cancellation) { expect_clean(AxiomHarness(quick()).check_cancellation()); }
TEST(AxiomHarness, SemiIndex) { expect_clean(AxiomHarness(quick()).check_semi_index()); }

TEST(AxiomHarness, SignFaultIsCaughtAndWritten) {
    auto dir = std::filesystem::temp_directory_path() / "nielsen_harness_test";
    std::filesystem::remove_all(dir);
    HarnessOptions o = quick(30);
    o.inject_sign_fault = true;
    o.counterexample_dir = dir.string();
    AxiomHarness h(o);
    std::size_t failures = 0;
    for (const auto& r : {h.check_normalization(), h.check_homotopy()}) {
        failures += r.failures.size();
        for (const auto& f : r.failures) {
            ASSERT_FALSE(f.counterexample.empty());
            ProblemConfig p = load_problem(f.counterexample);
            // Without the fault the written instance evaluates cleanly.
            EXPECT_NO_THROW(AxiomHarness().evaluate(from_config(p)));
        }
    }
    EXPECT_GT(failures, 0u);
    std::filesystem::remove_all(dir);
}

TEST(AxiomHarness, SeedsReproduce) {
    auto a = AxiomHarness(quick(10)).check_semi_index();
    auto b = AxiomHarness(quick(10)).check_semi_index();
    EXPECT_EQ(a.passed, b.passed);
    std::mt19937_64 r1(5), r2(5);
    auto p1 = random_torus_pair(r1, 3), p2 = random_torus_pair(r2, 3);
    EXPECT_EQ(p1.f, p2.f);
    EXPECT_EQ(p1.g, p2.g);
}

TEST(PairingOracle, MatchesClosedForm) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> len(0, 9), coin(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> s(len(rng));
        int plus = 0;
        for (auto& x : s) {
            x = coin(rng) ? 1 : -1;
            plus += x > 0;
        }
        const int minus = static_cast<int>(s.size()) - plus;
        EXPECT_EQ(pairing_survivors(s, false), std::abs(plus - minus));
        EXPECT_EQ(pairing_survivors(s, true), static_cast<std::int64_t>(s.size() % 2));
    }
}

TEST(WordBall, TorusBallHasDiamondSize) {
    const FlatManifold t = FlatManifold::torus(2);
    InducedHom zero = InducedHom::from_matrix(t, t, {{0, 0}, {0, 0}});
    TwistedConjugacy tc(zero, zero);
    for (int r = 0; r <= 5; ++r) EXPECT_EQ(word_ball(tc, r).size(), static_cast<std::size_t>(2 * r * r + 2 * r + 1));
}

TEST(Generators, KleinDegenerateFamilyPointCount) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        KleinDegenerate d = random_klein_degenerate(rng);
        auto recs = find_coincidences_numeric(d.f(), d.g(), OpenRegion::whole(2));
        EXPECT_EQ(recs.size(), d.points().size());
        EXPECT_EQ(recs.size(), static_cast<std::size_t>(2 * d.m1 * d.m2));
        for (const auto& p : d.points()) {
            double best = 1.0;
            for (const auto& r : recs) best = std::min(best, quotient_distance(klein_bottle(), p, r.point));
            EXPECT_LT(best, 1e-8);
        }
    }
}

TEST(Generators, TorusPairsAreNondegenerate) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = random_torus_pair(rng, 1 + trial % 3);
        EXPECT_NE(int_determinant(difference(p.b, p.a)), 0);
        for (const auto& c : p.a)
            for (auto x : c) EXPECT_LE(std::llabs(x), 5);
    }
}
