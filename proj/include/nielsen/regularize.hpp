#pragma once

// Regularization: replace (f, g) by a nearby pair whose coincidences in U
// are isolated with nonsingular derivative difference, together with the
// certified homotopies that connect them.

#include <random>
#include <vector>

#include "coincidence_solver.hpp"
#include "equivariant_map.hpp"
#include "errors.hpp"
#include "homotopy.hpp"

namespace nielsen {

struct RegularizeResult {
    EquivariantLift f;
    EquivariantLift g;
    AdmissibleHomotopy homotopy;
    bool changed = false;
};

struct RegularizeOptions {
    int attempts = 8;
    SolverOptions solver;
    CertificateOptions certificate;
};

namespace detail {

inline bool pair_is_regular(const EquivariantLift& f, const EquivariantLift& g, const OpenRegion& u,
                            const DomainMarker& v, SolverOptions opts) {
    opts.exact = f.is_affine() && g.is_affine();
    opts.allow_irregular = false;
    try {
        CoincidenceSolver(f, g, v, opts).solve(u);
        return true;
    } catch (const SingularPair&) {
    } catch (const NonRegularPoint&) {
    } catch (const ToleranceNotMet&) {
    }
    return false;
}

} // namespace detail

/// Leaves regular pairs untouched. Otherwise tries random small offsets of
/// g in the directions fixed by every phi(gamma), then symmetrized
/// trigonometric terms, each certified by an admissible homotopy.
inline RegularizeResult regularize(const EquivariantLift& f, const EquivariantLift& g, const OpenRegion& u,
                                   unsigned seed, const DomainMarker& v = DomainMarker::whole_manifold(),
                                   RegularizeOptions options = {}) {
    if (detail::pair_is_regular(f, g, u, v, options.solver)) {
        AdmissibleHomotopy h = AdmissibleHomotopy::constant(f, g, u);
        h.certify(options.certificate);
        return {f, g, h, false};
    }
    std::mt19937_64 rng(seed);
    const std::size_t n = g.target().size();
    const auto free_dirs = invariant_coordinates(g.hom());
    std::uniform_int_distribution<int> numer(-64, 64);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int attempt = 0; attempt < options.attempts; ++attempt) {
        const bool offsets = attempt < options.attempts / 2;
        EquivariantLift g2 = g;
        if (offsets) {
            bool any = false;
            Vector<Rational> w = g.offset();
            for (std::size_t i = 0; i < n; ++i) {
                if (!free_dirs[i]) continue;
                int p = numer(rng);
                if (p == 0) p = 1;
                w[i] += make_rational(p, 4096 << attempt);
                any = true;
            }
            if (!any) continue;
            g2 = g.with_offset(w);
        } else {
            std::vector<TrigTerm> terms = g.terms();
            std::uniform_real_distribution<double> amp(-1.0, 1.0);
            std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
            for (int k = 0; k < 2; ++k) {
                TrigTerm t;
                t.freq.assign(n, 0);
                bool nonzero = false;
                for (auto& m : t.freq) {
                    m = coin(rng) ? (coin(rng) ? 1 : -1) : 0;
                    nonzero = nonzero || m != 0;
                }
                if (!nonzero) t.freq[k % n] = 1;
                t.amplitude.resize(n);
                for (auto& a : t.amplitude) a = 1e-3 * amp(rng) / (1 << (attempt - options.attempts / 2));
                t.phase = phase(rng);
                for (auto& s : symmetrize_term(g.hom(), t)) terms.push_back(s);
            }
            try {
                g2 = g.with_terms(terms);
            } catch (const NotEquivariant&) {
                continue;
            }
        }
        if (!detail::pair_is_regular(f, g2, u, v, options.solver)) continue;
        AdmissibleHomotopy h(f, g, f, g2, u);
        try {
            h.certify(options.certificate);
        } catch (const NotAdmissible&) {
            if (attempt + 1 == options.attempts) throw;
            continue;
        }
        return {f, g2, h, true};
    }
    throw RegularizationFailed("no regular perturbation found after " + std::to_string(options.attempts) +
                               " attempts");
}

} // namespace nielsen
