#pragma once

// Randomized, seed-reproducible checks of the index axioms and their
// corollaries, plus the instance generators and brute-force oracles they use.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "coincidence_solver.hpp"
#include "config.hpp"
#include "equivariant_map.hpp"
#include "homotopy.hpp"
#include "invariants.hpp"
#include "orientation.hpp"
#include "twisted_conjugacy.hpp"

namespace nielsen {

// ---------------------------------------------------------------------------
// Instances

struct Instance {
    std::string label;
    EquivariantLift f;
    EquivariantLift g;
    OpenRegion region;
    DomainMarker domain;
    OrientationChoice orientation;
    bool exact = true;
};

inline ProblemConfig to_config(const Instance& in) {
    ProblemConfig p;
    p.source = in.f.source();
    p.target = in.f.target();
    p.f = in.f;
    p.g = in.g;
    p.region = in.region;
    p.domain = in.domain;
    p.orientation = in.orientation;
    p.compute.solver.exact = in.exact;
    return p;
}

inline Instance from_config(const ProblemConfig& p, std::string label = "config") {
    return {std::move(label), p.f, p.g, p.region, p.domain, p.orientation, p.compute.solver.exact};
}

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline double uniform_real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Rational random_rational(Rng& rng, int den = 97) { return make_rational(uniform_int(rng, 0, den - 1), den); }

inline FlatManifold klein_bottle() { return FlatManifold::glide({1, -1}, {make_rational(1, 2), Rational(0)}, "K"); }

/// Torus map x -> B x + v (column i of B is the image of e_i).
inline EquivariantLift torus_lift(const FlatManifold& t, const std::vector<IntVector>& columns, Vector<Rational> v) {
    const std::size_t n = t.size();
    Matrix<Rational> l(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) l(i, j) = Rational(static_cast<long>(columns[j][i]));
    return make_affine_lift(InducedHom::from_matrix(t, t, columns), l, std::move(v));
}

inline std::vector<IntVector> random_int_matrix(Rng& rng, std::size_t n, int bound) {
    std::vector<IntVector> cols(n, IntVector(n));
    for (auto& c : cols)
        for (auto& x : c) x = uniform_int(rng, -bound, bound);
    return cols;
}

inline Integer int_determinant(const std::vector<IntVector>& cols) {
    const std::size_t n = cols.size();
    Matrix<Rational> m(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) m(i, j) = Rational(static_cast<long>(cols[j][i]));
    return determinant(m).get_num();
}

inline std::vector<IntVector> difference(const std::vector<IntVector>& b, const std::vector<IntVector>& a) {
    std::vector<IntVector> d = b;
    for (std::size_t j = 0; j < d.size(); ++j)
        for (std::size_t i = 0; i < d[j].size(); ++i) d[j][i] -= a[j][i];
    return d;
}

struct TorusPair {
    std::vector<IntVector> a;
    std::vector<IntVector> b;
    EquivariantLift f;
    EquivariantLift g;
};

/// Random affine torus pair with det(B - A) != 0.
inline TorusPair random_torus_pair(Rng& rng, std::size_t n, int bound = 5) {
    const FlatManifold t = FlatManifold::torus(static_cast<int>(n));
    while (true) {
        auto a = random_int_matrix(rng, n, bound);
        auto b = random_int_matrix(rng, n, bound);
        if (int_determinant(difference(b, a)) == 0) continue;
        Vector<Rational> vf(n), vg(n);
        for (std::size_t i = 0; i < n; ++i) {
            vf[i] = random_rational(rng);
            vg[i] = random_rational(rng);
        }
        return {a, b, torus_lift(t, a, vf), torus_lift(t, b, vg)};
    }
}

/// Klein bottle self-maps with glide image (1, (a1, a2)) and e2 -> (0, (0, q)):
/// L = diag(2 a1 + 1, q), v = (v1, a2 / 2). These are orientation true.
inline EquivariantLift klein_glide_lift(std::int64_t a1, std::int64_t a2, std::int64_t q, const Rational& v1) {
    const FlatManifold k = klein_bottle();
    InducedHom hom(k, k, {{0, {2 * a1 + 1, 0}}, {0, {0, q}}, {1, {a1, a2}}});
    Matrix<Rational> l(2, 2);
    l(0, 0) = Rational(static_cast<long>(2 * a1 + 1));
    l(1, 1) = Rational(static_cast<long>(q));
    return make_affine_lift(hom, l, {v1, make_rational(a2, 2)});
}

/// Klein bottle self-maps sending the glide to the translation (p, r) and
/// e2 to the identity: L = [[2p, 0], [2r, 0]], v arbitrary. Not orientation true.
inline EquivariantLift klein_translation_lift(std::int64_t p, std::int64_t r, Vector<Rational> v) {
    const FlatManifold k = klein_bottle();
    InducedHom hom(k, k, {{0, {2 * p, 2 * r}}, {0, {0, 0}}, {0, {p, r}}});
    Matrix<Rational> l(2, 2);
    l(0, 0) = Rational(static_cast<long>(2 * p));
    l(1, 0) = Rational(static_cast<long>(2 * r));
    return make_affine_lift(hom, l, std::move(v));
}

/// Random regular affine Klein pair; both orientation true when requested.
inline std::pair<EquivariantLift, EquivariantLift> random_klein_pair(Rng& rng, bool orientation_true) {
    while (true) {
        int a1f = uniform_int(rng, -2, 2), a2f = uniform_int(rng, -2, 2), qf = uniform_int(rng, -2, 2);
        int a1g = uniform_int(rng, -2, 2), a2g = uniform_int(rng, -2, 2), qg = uniform_int(rng, -2, 2);
        EquivariantLift g = klein_glide_lift(a1g, a2g, qg, random_rational(rng));
        if (orientation_true || uniform_int(rng, 0, 1) == 0) {
            if (a1f == a1g || qg == qf || qg == -qf) continue;
            return {klein_glide_lift(a1f, a2f, qf, random_rational(rng)), g};
        }
        if (qg == 0) continue;
        EquivariantLift f = klein_translation_lift(uniform_int(rng, -2, 2), uniform_int(rng, -2, 2),
                                                   {random_rational(rng), random_rational(rng)});
        if (uniform_int(rng, 0, 1)) return {f, g};
        return {g, f};
    }
}

/// Constant f = v and g = v + w + (a sin(2 pi m1 x1 + p), c cos(2 pi m2 x2)) on the
/// Klein bottle with trivial homs. Every coincidence lies in the class of the
/// identity, which is degenerate (the glide fixes it and changes orientation).
struct KleinDegenerate {
    double a = 0.01;
    double c = 0.01;
    double phase = 0.0;
    int m1 = 2;
    int m2 = 1;
    Vector<Rational> v{make_rational(1, 5), make_rational(1, 3)};
    Vector<Rational> w{Rational(0), Rational(0)};

    EquivariantLift f() const {
        const FlatManifold k = klein_bottle();
        InducedHom triv(k, k, {deck_identity(k), deck_identity(k), deck_identity(k)});
        return make_affine_lift(triv, Matrix<Rational>(2, 2), v);
    }

    EquivariantLift g() const {
        const FlatManifold k = klein_bottle();
        InducedHom triv(k, k, {deck_identity(k), deck_identity(k), deck_identity(k)});
        std::vector<TrigTerm> terms{{{a, 0.0}, {m1, 0}, phase}, {{0.0, c}, {0, m2}, std::numbers::pi / 2}};
        return EquivariantLift(triv, Matrix<Rational>(2, 2), v + w, terms);
    }

    /// Coincidences for w = 0 in the fundamental domain [0,1/2) x [0,1).
    std::vector<Vector<double>> points() const {
        std::vector<Vector<double>> out;
        for (int j = 0; j < 2 * m1; ++j) {
            double x1 = (j * std::numbers::pi - phase) / (2 * std::numbers::pi * m1);
            x1 -= std::floor(x1);
            if (x1 >= 0.5) continue;
            for (int i = 0; i < 2 * m2; ++i) out.push_back({x1, (0.25 + 0.5 * i) / m2});
        }
        return out;
    }
};

inline KleinDegenerate random_klein_degenerate(Rng& rng) {
    KleinDegenerate d;
    d.a = uniform_real(rng, 0.005, 0.02);
    d.c = uniform_real(rng, 0.005, 0.02);
    d.phase = uniform_real(rng, 0.0, 2 * std::numbers::pi);
    d.m1 = 2 * uniform_int(rng, 1, 2);
    d.m2 = uniform_int(rng, 1, 2);
    return d;
}

/// Constant f = v and g = v + (a sin(2 pi m1 x1 + p1), c sin(2 pi m2 x2 + p2)) on T^2:
/// 4 m1 m2 coincidences in the identity class with alternating signs.
struct TorusCancelling {
    double a = 0.01;
    double c = 0.01;
    double p1 = 0.3;
    double p2 = 1.1;
    int m1 = 1;
    int m2 = 1;
    Vector<Rational> v{make_rational(1, 7), make_rational(2, 7)};
    Vector<Rational> w{Rational(0), Rational(0)};

    EquivariantLift f() const {
        const FlatManifold t = FlatManifold::torus(2);
        return torus_lift(t, {{0, 0}, {0, 0}}, v);
    }

    EquivariantLift g() const {
        const FlatManifold t = FlatManifold::torus(2);
        EquivariantLift base = torus_lift(t, {{0, 0}, {0, 0}}, v + w);
        return base.with_terms({{{a, 0.0}, {m1, 0}, p1}, {{0.0, c}, {0, m2}, p2}});
    }
};

inline TorusCancelling random_torus_cancelling(Rng& rng) {
    TorusCancelling t;
    t.a = uniform_real(rng, 0.005, 0.02);
    t.c = uniform_real(rng, 0.005, 0.02);
    t.p1 = uniform_real(rng, 0.0, 2 * std::numbers::pi);
    t.p2 = uniform_real(rng, 0.0, 2 * std::numbers::pi);
    t.m1 = uniform_int(rng, 1, 2);
    t.m2 = uniform_int(rng, 1, 2);
    return t;
}

// ---------------------------------------------------------------------------
// Brute-force oracles over words in the acting group

/// All elements of the acting group reachable by words of length <= radius
/// in the generators (and their inverses).
inline std::vector<DeckElement> word_ball(const TwistedConjugacy& tc, int radius) {
    const FlatManifold& m = tc.source();
    std::vector<DeckElement> gens;
    for (const auto& g : deck_generators(m))
        if (tc.acts(g)) {
            gens.push_back(g);
            gens.push_back(deck_inverse(m, g));
        }
    std::set<DeckElement> seen{deck_identity(m)};
    std::vector<DeckElement> frontier{deck_identity(m)};
    for (int r = 0; r < radius; ++r) {
        std::vector<DeckElement> next;
        for (const auto& w : frontier)
            for (const auto& g : gens) {
                DeckElement x = deck_compose(m, w, g);
                if (seen.insert(x).second) next.push_back(x);
            }
        frontier = std::move(next);
    }
    return {seen.begin(), seen.end()};
}

inline bool brute_force_same_class(const TwistedConjugacy& tc, const std::vector<DeckElement>& ball,
                                   const DeckElement& alpha, const DeckElement& beta) {
    for (const auto& g : ball)
        if (tc.act(g, alpha) == beta) return true;
    return false;
}

inline bool brute_force_degenerate(const TwistedConjugacy& tc, const std::vector<DeckElement>& ball,
                                   const DeckElement& alpha) {
    for (const auto& g : ball)
        if (tc.act(g, alpha) == alpha && character(g, tc.source()) != character(tc.g_hom().apply(g), tc.target()))
            return true;
    return false;
}

/// Survivors of maximal pairwise cancellation inside one class: opposite
/// signs cancel in a nondegenerate class, any two points cancel in a degenerate one.
inline std::int64_t pairing_survivors(std::vector<int> signs, bool degenerate) {
    std::int64_t survivors = 0;
    while (!signs.empty()) {
        int s = signs.back();
        signs.pop_back();
        auto partner = signs.end();
        for (auto it = signs.begin(); it != signs.end(); ++it)
            if (degenerate || *it == -s) {
                partner = it;
                break;
            }
        if (partner == signs.end())
            ++survivors;
        else
            signs.erase(partner);
    }
    return survivors;
}

// ---------------------------------------------------------------------------
// Reports

struct CheckFailure {
    int trial = 0;
    std::string detail;
    std::string counterexample;  ///< path of the written config, if any
};

struct CheckReport {
    std::string name;
    unsigned seed = 0;
    int trials = 0;
    int passed = 0;
    std::vector<CheckFailure> failures;
    double seconds = 0.0;

    bool ok() const { return failures.empty(); }
};

struct HarnessOptions {
    unsigned seed = 20240611;
    int trials = 100;
    std::string counterexample_dir;
    bool inject_sign_fault = false;  ///< negative control: corrupts some local signs
};

class AxiomHarness {
public:
    explicit AxiomHarness(HarnessOptions options = {}) : options_(std::move(options)) {}

    const HarnessOptions& options() const { return options_; }

    /// Index and trace of an instance as the harness sees them (fault injection applies here).
    Analysis evaluate(const Instance& in) const {
        ComputeOptions co;
        co.solver.exact = in.exact;
        Analysis a = analyze(in.f, in.g, in.region, in.domain, in.orientation, co);
        if (options_.inject_sign_fault) {
            for (auto& r : a.records)
                if (!r.degenerate && r.point[0] < 0.5) r.aligned_sign = -r.aligned_sign;
            a.index = index_from_records(a.records, in.orientation);
            a.trace = trace_from_records(a.records, in.orientation);
        }
        return a;
    }

    CheckReport check_additivity() const {
        return run("additivity", 1, [&](Rng& rng, int trial, std::vector<Instance>& shown) -> std::string {
            Instance base = mixed_instance(rng, trial);
            shown.push_back(base);
            Analysis whole = evaluate(base);
            auto [u1, u2] = split_region(rng, base, whole.records);
            Instance i1 = base, i2 = base;
            i1.region = u1;
            i2.region = u2;
            Analysis a1 = evaluate(i1), a2 = evaluate(i2);
            if (!(whole.index == a1.index + a2.index))
                return "index " + to_string(whole.index) + " != " + to_string(a1.index) + " + " + to_string(a2.index);
            if (!(whole.trace == a1.trace + a2.trace)) return "trace is not additive";
            Instance empty = base;
            empty.region = OpenRegion::empty(base.f.source().size());
            Analysis a0 = evaluate(empty);
            if (!(whole.index == whole.index + a0.index) || !a0.records.empty()) return "empty part is not zero";
            return "";
        });
    }

    CheckReport check_excision() const {
        return run("excision", 2, [&](Rng& rng, int trial, std::vector<Instance>& shown) -> std::string {
            Instance base = mixed_instance(rng, trial);
            shown.push_back(base);
            Analysis whole = evaluate(base);
            Instance small = base;
            small.region = neighbourhood(base.f.source(), whole.records, 0.4);
            Analysis a = evaluate(small);
            if (!(whole.index == a.index)) return "index " + to_string(whole.index) + " != " + to_string(a.index);
            if (!(whole.trace == a.trace)) return "trace changed under excision";
            return "";
        });
    }

    CheckReport check_homotopy() const {
        return run("homotopy", 3, [&](Rng& rng, int trial, std::vector<Instance>& shown) -> std::string {
            if (trial % 10 == 9) return cancelling_homotopy(rng, shown);
            Instance base = affine_instance(rng, trial);
            shown.push_back(base);
            Analysis before = evaluate(base);
            // Perturb g by symmetrized trig terms below the amplitude cap.
            const EquivariantLift& f = base.f;
            const EquivariantLift& g = base.g;
            double sigma = min_sigma(f, g);
            std::vector<TrigTerm> terms;
            const std::size_t n = g.target().size();
            for (int k = 0; k < 2; ++k) {
                TrigTerm t;
                t.freq.assign(n, 0);
                t.freq[uniform_int(rng, 0, static_cast<int>(n) - 1)] = uniform_int(rng, 1, 2);
                if (n > 1 && uniform_int(rng, 0, 1)) t.freq[uniform_int(rng, 0, static_cast<int>(n) - 1)] = -1;
                t.amplitude.resize(n);
                for (auto& x : t.amplitude) x = uniform_real(rng, -1.0, 1.0) * 0.01 * sigma / n;
                t.phase = uniform_real(rng, 0.0, 2 * std::numbers::pi);
                for (auto& s : symmetrize_term(g.hom(), t)) terms.push_back(s);
            }
            EquivariantLift g1 = g.with_terms(terms);
            Instance after = base;
            after.g = g1;
            after.exact = false;
            if (trial % 2 == 1) {
                base.region = neighbourhood(base.f.source(), before.records, 0.45);
                after.region = base.region;
                before = evaluate(base);
            }
            AdmissibleHomotopy h(f, g, f, g1, base.region);
            h.certify();
            after.orientation = transport_through_homotopy(base.orientation, h);
            shown.push_back(after);
            Analysis a = evaluate(after);
            // Slices along the way stay equivariant with the same hom.
            auto mid = h.slice(make_rational(1, 3));
            if (!(mid.second.hom() == g.hom())) return "slice changed the homomorphism";
            if (!(before.index == a.index)) return "index " + to_string(before.index) + " != " + to_string(a.index);
            if (!(before.trace == a.trace)) return "trace changed along an admissible homotopy";
            if (is_orientation_true(h.g_start().hom()) != is_orientation_true(h.g_end().hom()))
                return "orientation-true flag changed along the homotopy";
            return "";
        });
    }

    CheckReport check_normalization() const {
        return run("normalization", 4, [&](Rng& rng, int trial, std::vector<Instance>& shown) -> std::string {
            if (trial % 2 == 0) {
                // Constant f = c against an embedding-like torus map g = B x + w.
                const std::size_t n = 1 + trial % 3;
                const FlatManifold t = FlatManifold::torus(static_cast<int>(n));
                std::vector<IntVector> b;
                do b = random_int_matrix(rng, n, 3);
                while (int_determinant(b) == 0);
                Vector<Rational> c(n), w(n);
                for (std::size_t i = 0; i < n; ++i) {
                    c[i] = random_rational(rng);
                    w[i] = random_rational(rng);
                }
                std::vector<IntVector> zero(n, IntVector(n, 0));
                Instance in{"torus normalization", torus_lift(t, zero, c), torus_lift(t, b, w), OpenRegion::whole(n),
                            DomainMarker::whole_manifold(), OrientationChoice::global(1), true};
                Analysis all = evaluate(in);
                const auto& r = all.records[uniform_int(rng, 0, static_cast<int>(all.records.size()) - 1)];
                in.region = neighbourhood(t, {r}, 0.4);
                int s = sign_of_embedding(in.g, r.point, in.orientation, r.class_rep);
                if (s < 0) in.orientation = negate(in.orientation);
                if (sign_of_embedding(in.g, r.point, in.orientation, r.class_rep) != 1) return "sign_of_embedding not +1";
                shown.push_back(in);
                IndexValue v = evaluate(in).index;
                if (!(v == IndexValue{1, 0})) return "index " + to_string(v) + " != (1,0)";
                return "";
            }
            KleinDegenerate d = random_klein_degenerate(rng);
            auto pts = d.points();
            CoincidenceRecord r;
            r.point = pts[uniform_int(rng, 0, static_cast<int>(pts.size()) - 1)];
            Instance in{"klein normalization", d.f(), d.g(), neighbourhood(klein_bottle(), {r}, 0.4),
                        DomainMarker::whole_manifold(), OrientationChoice::per_class({}), false};
            shown.push_back(in);
            Analysis a = evaluate(in);
            if (a.records.size() != 1) return "expected one coincidence, found " + std::to_string(a.records.size());
            if (!(a.index == IndexValue{0, 1})) return "index " + to_string(a.index) + " != (0,1)";
            return "";
        });
    }

    CheckReport check_swap() const {
        return run("swap", 5, [&](Rng& rng, int trial, std::vector<Instance>& shown) -> std::string {
            Instance in;
            int n = 0;
            if (trial % 4 == 3) {
                auto [f, g] = random_klein_pair(rng, true);
                in = {"klein swap", f, g, OpenRegion::whole(2), DomainMarker::whole_manifold(),
                      OrientationChoice::global(uniform_int(rng, 0, 1) ? 1 : -1), true};
                n = 2;
            } else {
                n = 1 + trial % 3;
                auto p = random_torus_pair(rng, n);
                in = {"torus swap", p.f, p.g, OpenRegion::whole(n), DomainMarker::whole_manifold(),
                      OrientationChoice::global(uniform_int(rng, 0, 1) ? 1 : -1), true};
            }
            shown.push_back(in);
            Analysis a = evaluate(in);
            TwistedConjugacy fg(in.f.hom(), in.g.hom()), gf(in.g.hom(), in.f.hom());
            std::vector<DeckElement> classes;
            for (const auto& r : a.records) classes.push_back(r.class_rep);
            Instance swapped = in;
            swapped.f = in.g;
            swapped.g = in.f;
            swapped.orientation = swap_orientation(in.orientation, fg, gf, classes);
            shown.push_back(swapped);
            Analysis b = evaluate(swapped);
            const int sign = n % 2 ? -1 : 1;
            if (!(a.index == IndexValue{sign * b.index.z, b.index.z2}))
                return "index " + to_string(a.index) + " vs swapped " + to_string(b.index) + " (n = " + std::to_string(n) + ")";
            if (a.index.z2 != 0) return "orientation-true pair has nonzero Z2 part";
            return "";
        });
    }

    CheckReport check_flip() const {
        return run("flip", 6, [&](Rng& rng, int trial, std::vector<Instance>& shown) -> std::string {
            Instance in = mixed_instance(rng, trial);
            if (trial % 5 == 4) {
                KleinDegenerate d = random_klein_degenerate(rng);
                auto pts = d.points();
                std::vector<CoincidenceRecord> rs;
                for (std::size_t i = 0; i < pts.size(); i += 2) {
                    CoincidenceRecord r;
                    r.point = pts[i];
                    rs.push_back(r);
                }
                in = {"klein flip", d.f(), d.g(), neighbourhood(klein_bottle(), rs, 0.3), DomainMarker::whole_manifold(),
                      OrientationChoice::per_class({}), false};
            }
            shown.push_back(in);
            Analysis a = evaluate(in);
            Instance neg = in;
            neg.orientation = negate(in.orientation);
            Analysis b = evaluate(neg);
            if (a.index.z != -b.index.z || a.index.z2 != b.index.z2)
                return "index " + to_string(a.index) + " vs flipped " + to_string(b.index);
            for (const auto& [rep, e] : a.trace.entries) {
                auto it = b.trace.entries.find(rep);
                if (it == b.trace.entries.end()) return "class vanished after flip";
                if (e.coefficient != (e.degenerate ? 1 : -1) * it->second.coefficient) return "trace did not flip";
            }
            if (is_orientation_true(in.g.hom()) && a.index.z2 != 0) return "orientation-true g with Z2 part";
            return "";
        });
    }

    CheckReport check_localization() const {
        return run("localization", 7, [&](Rng& rng, int trial, std::vector<Instance>& shown) -> std::string {
            Instance in;
            if (trial % 3 == 2) {
                auto [f, g] = random_klein_pair(rng, true);
                in = {"klein localization", f, g, OpenRegion::whole(2), DomainMarker::whole_manifold(),
                      OrientationChoice::global(1), true};
            } else {
                auto p = random_torus_pair(rng, 1 + trial % 3);
                in = {"torus localization", p.f, p.g, OpenRegion::whole(p.f.source().size()),
                      DomainMarker::whole_manifold(), OrientationChoice::global(1), true};
            }
            Analysis all = evaluate(in);
            if (all.records.empty()) return "";
            const auto& r = all.records[uniform_int(rng, 0, static_cast<int>(all.records.size()) - 1)];
            in.region = neighbourhood(in.f.source(), {r}, 0.2);
            // W: the box of U widened, with some coordinates opened up to full circles.
            Box w = in.region.boxes().front();
            for (std::size_t i = 0; i < w.arcs.size(); ++i) {
                if (w.arcs[i].full) continue;
                Rational grow = make_rational(uniform_int(rng, 0, 4), 1000);
                w.arcs[i] = Arc::open(w.arcs[i].lo - grow, w.arcs[i].hi + grow);
                const bool glide_axis = in.f.source().is_glide() && static_cast<int>(i) == in.f.source().glide_axis();
                if (!glide_axis && uniform_int(rng, 0, 2) == 0) w.arcs[i] = Arc::whole();
            }
            Instance local = in;
            local.domain = DomainMarker::from_box(w);
            shown.push_back(in);
            shown.push_back(local);
            Analysis a = evaluate(in), b = evaluate(local);
            if (!(a.index == b.index)) return "index " + to_string(a.index) + " vs localized " + to_string(b.index);
            return "";
        });
    }

    /// Point degeneracy flags against the class test and brute-force loop search.
    CheckReport check_degeneracy_correspondence() const {
        return run("degeneracy", 8, [&](Rng& rng, int trial, std::vector<Instance>& shown) -> std::string {
            Instance in;
            bool expect_degenerate = false;
            if (trial % 3 == 0) {
                KleinDegenerate d = random_klein_degenerate(rng);
                in = {"klein degenerate", d.f(), d.g(), OpenRegion::whole(2), DomainMarker::whole_manifold(),
                      OrientationChoice::per_class({}), false};
                expect_degenerate = true;
            } else if (trial % 3 == 1) {
                auto [f, g] = random_klein_pair(rng, false);
                in = {"klein affine", f, g, OpenRegion::whole(2), DomainMarker::whole_manifold(),
                      is_orientation_true(g.hom()) ? OrientationChoice::global(1) : OrientationChoice::per_class({}),
                      true};
            } else {
                auto p = random_torus_pair(rng, 2);
                in = {"torus", p.f, p.g, OpenRegion::whole(2), DomainMarker::whole_manifold(),
                      OrientationChoice::global(1), true};
            }
            shown.push_back(in);
            Analysis a = evaluate(in);
            TwistedConjugacy tc(in.f.hom(), in.g.hom());
            auto ball = word_ball(tc, 6);
            for (const auto& r : a.records) {
                bool cls = tc.is_degenerate(r.alpha);
                bool bf = brute_force_degenerate(tc, ball, r.alpha);
                if (r.degenerate != cls || cls != bf)
                    return "point " + format_vector(r.point) + ": record " + std::to_string(r.degenerate) + ", class " +
                           std::to_string(cls) + ", brute force " + std::to_string(bf);
                if (expect_degenerate && !r.degenerate) return "expected a degenerate point";
                if (!tc.is_degenerate(tc.canonical_rep(r.alpha)) == cls) return "degeneracy is not a class property";
            }
            // Restricting the domain to a simply-connected box kills every degeneracy.
            if (!a.records.empty()) {
                const auto& r = a.records.front();
                Instance local = in;
                local.region = neighbourhood(in.f.source(), {r}, 0.2);
                local.domain = DomainMarker::from_box(local.region.boxes().front());
                local.orientation = OrientationChoice::per_class({});
                Analysis b = evaluate(local);
                for (const auto& s : b.records)
                    if (s.degenerate) return "point degenerate inside a simply-connected domain";
            }
            return "";
        });
    }

    /// A degenerate point seen from the whole manifold and from a box around it.
    CheckReport check_domain_dependence() const {
        return run("domain-dependence", 9, [&](Rng& rng, int trial, std::vector<Instance>& shown) -> std::string {
            if (trial % 3 == 1) {
                // Torus control: no dependence.
                auto p = random_torus_pair(rng, 2);
                Instance in{"torus control", p.f, p.g, OpenRegion::whole(2), DomainMarker::whole_manifold(),
                            OrientationChoice::global(1), true};
                Analysis all = evaluate(in);
                in.region = neighbourhood(in.f.source(), {all.records.front()}, 0.2);
                Instance local = in;
                local.domain = DomainMarker::from_box(in.region.boxes().front());
                shown.push_back(in);
                if (!(evaluate(in).index == evaluate(local).index)) return "torus index depends on the domain";
                return "";
            }
            KleinDegenerate d = random_klein_degenerate(rng);
            auto pts = d.points();
            CoincidenceRecord r;
            r.point = pts[uniform_int(rng, 0, static_cast<int>(pts.size()) - 1)];
            Instance in{"klein domain", d.f(), d.g(), neighbourhood(klein_bottle(), {r}, 0.3),
                        DomainMarker::whole_manifold(), OrientationChoice::per_class({}), false};
            Instance local = in;
            local.domain = DomainMarker::from_box(in.region.boxes().front());
            shown.push_back(in);
            shown.push_back(local);
            IndexValue whole = evaluate(in).index, restricted = evaluate(local).index;
            if (!(whole == IndexValue{0, 1})) return "whole-domain index " + to_string(whole) + " != (0,1)";
            if (restricted.z2 != 0 || std::llabs(restricted.z) != 1)
                return "box-domain index " + to_string(restricted) + " is not (+-1,0)";
            return "";
        });
    }

    /// Two degenerate points removable by a homotopy, three leave parity 1.
    CheckReport check_cancellation() const {
        return run("cancellation", 10, [&](Rng& rng, int, std::vector<Instance>& shown) -> std::string {
            KleinDegenerate d = random_klein_degenerate(rng);
            auto pts = d.points();
            // Two points sharing x1 (x2 = 1/4 m2 and 3/4 m2 mirror around 1/2 m2) merge when w2 rises.
            Vector<double> p0 = pts.front();
            Box pair_box{{Arc::open(Rational(exact_rational(p0[0]) - make_rational(1, 20)),
                                    Rational(exact_rational(p0[0]) + make_rational(1, 20))),
                          Arc::open(make_rational(1, 10 * d.m2), make_rational(9, 10 * d.m2))}};
            OpenRegion two(2, {pair_box});
            Instance in{"two degenerate", d.f(), d.g(), two, DomainMarker::whole_manifold(),
                        OrientationChoice::per_class({}), false};
            shown.push_back(in);
            Analysis a = evaluate(in);
            if (a.records.size() != 2) return "expected 2 points, found " + std::to_string(a.records.size());
            if (!(a.index == IndexValue{0, 0})) return "two degenerate points give " + to_string(a.index);
            KleinDegenerate moved = d;
            moved.w = {Rational(0), exact_rational(2 * d.c)};
            AdmissibleHomotopy h(d.f(), d.g(), moved.f(), moved.g(), two);
            h.certify();
            Instance end = in;
            end.g = moved.g();
            shown.push_back(end);
            Analysis b = evaluate(end);
            if (!b.records.empty()) return "homotopy did not remove the pair";
            if (!(b.index == a.index)) return "index changed along the cancelling homotopy";
            // Three points: add a box around a point with a different x1.
            for (const auto& p : pts) {
                if (std::fabs(p[0] - p0[0]) < 0.1) continue;
                CoincidenceRecord r;
                r.point = p;
                OpenRegion one = neighbourhood(klein_bottle(), {r}, 0.1);
                std::vector<Box> boxes{pair_box, one.boxes().front()};
                OpenRegion three(2, boxes);
                if (!regions_disjoint(klein_bottle(), OpenRegion(2, {pair_box}), one)) continue;
                Instance in3 = in;
                in3.region = three;
                shown.push_back(in3);
                Analysis c = evaluate(in3);
                if (c.records.size() != 3) return "expected 3 points, found " + std::to_string(c.records.size());
                if (c.index.z2 != 1) return "three degenerate points give " + to_string(c.index);
                return "";
            }
            return "no third point available";
        });
    }

    /// Per-class semi-index against the pairing oracle.
    CheckReport check_semi_index() const {
        return run("semi-index", 11, [&](Rng& rng, int trial, std::vector<Instance>& shown) -> std::string {
            Instance in = semi_index_instance(rng, trial);
            shown.push_back(in);
            Analysis a = evaluate(in);
            std::map<DeckElement, std::vector<int>> signs;
            std::map<DeckElement, bool> degenerate;
            for (const auto& r : a.records) {
                signs[r.class_rep].push_back(r.aligned_sign * in.orientation.sign(r.class_rep));
                degenerate[r.class_rep] = r.degenerate;
            }
            auto semi = class_semi_indices(a.trace);
            std::int64_t total = 0;
            for (const auto& [rep, s] : signs) {
                std::int64_t oracle = pairing_survivors(s, degenerate[rep]);
                std::int64_t got = semi.count(rep) ? semi[rep] : 0;
                if (oracle != got)
                    return "class " + to_string(rep) + ": semi-index " + std::to_string(got) + ", pairing " +
                           std::to_string(oracle);
                total += got;
            }
            (void)total;
            return "";
        });
    }

    std::vector<CheckReport> run_all() const {
        return {check_additivity(),   check_excision(),   check_homotopy(),
                check_normalization(), check_swap(),       check_flip(),
                check_localization(),  check_degeneracy_correspondence(), check_domain_dependence(),
                check_cancellation(),  check_semi_index()};
    }

    // Public generators used by the checks.

    Instance affine_instance(Rng& rng, int trial) const {
        if (trial % 3 == 2) {
            auto [f, g] = random_klein_pair(rng, false);
            OrientationChoice o = is_orientation_true(g.hom()) ? OrientationChoice::global(1) : OrientationChoice::per_class({});
            return {"klein affine", f, g, OpenRegion::whole(2), DomainMarker::whole_manifold(), o, true};
        }
        const std::size_t n = 1 + (trial / 3) % 3;
        auto p = random_torus_pair(rng, n);
        return {"torus affine", p.f, p.g, OpenRegion::whole(n), DomainMarker::whole_manifold(),
                OrientationChoice::global(1), true};
    }

    Instance mixed_instance(Rng& rng, int trial) const {
        switch (trial % 4) {
        case 3: {
            KleinDegenerate d = random_klein_degenerate(rng);
            return {"klein degenerate", d.f(), d.g(), OpenRegion::whole(2), DomainMarker::whole_manifold(),
                    OrientationChoice::per_class({}), false};
        }
        case 2: {
            TorusCancelling t = random_torus_cancelling(rng);
            return {"torus cancelling", t.f(), t.g(), OpenRegion::whole(2), DomainMarker::whole_manifold(),
                    OrientationChoice::global(1), false};
        }
        default:
            return affine_instance(rng, trial);
        }
    }

    Instance semi_index_instance(Rng& rng, int trial) const {
        Instance in = mixed_instance(rng, trial);
        if (trial % 4 >= 2) {
            // A random sub-box so the classes carry uneven point counts.
            Box b;
            for (std::size_t i = 0; i < 2; ++i) {
                Rational lo = make_rational(uniform_int(rng, 0, 99), 100) + make_rational(1, 1000);
                Rational len = make_rational(uniform_int(rng, 30, 80), 100);
                b.arcs.push_back(Arc::open(lo, lo + len));
            }
            if (in.f.source().is_glide() && boxes_intersect(b, glide_image(in.f.source(), b)))
                b.arcs[0] = Arc::open(b.arcs[0].lo, b.arcs[0].lo + make_rational(2, 5));
            in.region = OpenRegion(2, {b});
        }
        return in;
    }

private:
    using Body = std::function<std::string(Rng&, int, std::vector<Instance>&)>;

    CheckReport run(const std::string& name, unsigned salt, const Body& body) const {
        CheckReport rep;
        rep.name = name;
        rep.seed = options_.seed;
        rep.trials = options_.trials;
        auto start = std::chrono::steady_clock::now();
        for (int trial = 0; trial < options_.trials; ++trial) {
            Rng rng(options_.seed * 1000003ull + salt * 7919ull + static_cast<unsigned>(trial));
            std::vector<Instance> shown;
            std::string problem;
            try {
                problem = body(rng, trial, shown);
            } catch (const NielsenError& e) {
                problem = std::string("error: ") + e.what();
            }
            if (problem.empty()) {
                ++rep.passed;
                continue;
            }
            CheckFailure f{trial, problem, ""};
            if (!options_.counterexample_dir.empty() && !shown.empty()) {
                std::filesystem::create_directories(options_.counterexample_dir);
                std::string path = options_.counterexample_dir + "/" + name + "_trial" + std::to_string(trial) + ".cfg";
                std::ofstream out(path);
                out << "# " << name << " trial " << trial << " seed " << options_.seed << ": " << problem << "\n";
                out << serialize_problem(to_config(shown.back()));
                f.counterexample = path;
            }
            rep.failures.push_back(f);
        }
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return rep;
    }

    static double min_sigma(const EquivariantLift& f, const EquivariantLift& g) {
        double s = 1e300;
        const FlatManifold& n = f.target();
        for (int e = 0; e <= (n.is_glide() ? 1 : 0); ++e) {
            auto diag = e ? n.glide_diagonal() : std::vector<int>(n.size(), 1);
            s = std::min(s, sigma_min_lower_bound(convert_matrix<double>(g.linear() - f.linear().row_scaled(diag))));
        }
        return s;
    }

    std::string cancelling_homotopy(Rng& rng, std::vector<Instance>& shown) const {
        TorusCancelling t = random_torus_cancelling(rng);
        t.m1 = 1;
        t.m2 = 1;
        Instance in{"torus cancelling pair", t.f(), t.g(), OpenRegion::whole(2), DomainMarker::whole_manifold(),
                    OrientationChoice::global(1), false};
        shown.push_back(in);
        Analysis before = evaluate(in);
        TorusCancelling moved = t;
        moved.w = {Rational(0), exact_rational(2 * t.c)};
        AdmissibleHomotopy h(t.f(), t.g(), moved.f(), moved.g(), in.region);
        h.certify();
        Instance end = in;
        end.g = moved.g();
        shown.push_back(end);
        Analysis after = evaluate(end);
        if (before.records.size() != 4) return "expected 4 points before cancellation";
        if (!after.records.empty()) return "cancelling homotopy left points behind";
        if (!(before.index == after.index) || !(before.trace == after.trace)) return "cancellation changed the invariants";
        return "";
    }

    /// Disjoint split U = U1 + U2 (up to two walls) along one coordinate, walls away from the points.
    std::pair<OpenRegion, OpenRegion> split_region(Rng& rng, const Instance& in,
                                                   const std::vector<CoincidenceRecord>& records) const {
        const FlatManifold& m = in.f.source();
        const std::size_t n = m.size();
        const std::size_t axis = m.is_glide() ? static_cast<std::size_t>(m.glide_axis())
                                              : static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(n) - 1));
        const Rational period = m.is_glide() ? make_rational(1, 2) : Rational(1);
        auto clear = [&](const Rational& c) {
            for (const auto& r : records) {
                double d = std::fmod(std::fabs(r.point[axis] - c.get_d()), period.get_d());
                if (std::min(d, period.get_d() - d) < 2e-3) return false;
            }
            return true;
        };
        Rational c1, c2;
        do c1 = make_rational(uniform_int(rng, 0, 999), 1000) * period;
        while (!clear(c1));
        do c2 = c1 + make_rational(uniform_int(rng, 1, 999), 1000) * period;
        while (!clear(c2));
        Box b1{std::vector<Arc>(n)}, b2{std::vector<Arc>(n)};
        b1.arcs[axis] = Arc::open(c1, c2);
        b2.arcs[axis] = Arc::open(c2, c1 + period);
        return {OpenRegion(n, {b1}), OpenRegion(n, {b2})};
    }

    /// Union of small disjoint boxes around the given points; `fraction` of
    /// half the smallest pairwise quotient distance sets the radius.
    static OpenRegion neighbourhood(const FlatManifold& m, const std::vector<CoincidenceRecord>& records, double fraction) {
        const std::size_t n = m.size();
        double gap = 0.5;
        for (std::size_t i = 0; i < records.size(); ++i)
            for (std::size_t j = i + 1; j < records.size(); ++j)
                gap = std::min(gap, quotient_distance(m, records[i].point, records[j].point));
        double radius = std::min(0.1, fraction * gap);
        Rational r = make_rational(static_cast<std::int64_t>(std::floor(radius * 4096)), 4096);
        if (r == 0) r = make_rational(1, 1 << 20);
        std::vector<Box> boxes;
        for (const auto& rec : records) {
            Box b;
            for (std::size_t i = 0; i < n; ++i) {
                Rational c = rec.exact_point ? (*rec.exact_point)[i]
                                             : make_rational(static_cast<std::int64_t>(std::llround(rec.point[i] * (1 << 20))), 1 << 20);
                b.arcs.push_back(Arc::open(c - r, c + r));
            }
            boxes.push_back(b);
        }
        return OpenRegion(n, boxes);
    }

    HarnessOptions options_;
};

} // namespace nielsen
