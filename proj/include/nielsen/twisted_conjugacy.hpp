#pragma once

// Reidemeister classes: orbits of the action gamma . alpha = g#(gamma) alpha f#(gamma)^-1
// of the source deck group (or the loops of a domain box) on the target deck group.
//
// Reduction used here. Let G be the acting group and H = s Z^S the lattice
// subgroup of G, where s = 1 when both homs send lattice generators to
// translations and s = 2 otherwise. H is normal in G, and h = s m acts on the
// target sector eps by k -> k + (P_g - D^eps P_f) m. The H-orbits in a sector
// are therefore cosets of an integer lattice, reduced canonically with a
// Hermite basis. G/H is finite with representatives R = {(e, c)}, and a class
// is the union of the H-orbits of r . alpha over r in R.
//
// Canonical representative of a class: the smallest (eps, k) in the order
// (eps, k_1, ..., k_n) among the Hermite-reduced representatives of the
// H-orbits it contains.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "equivariant_map.hpp"
#include "errors.hpp"
#include "flat_space.hpp"
#include "integer_lattice.hpp"

namespace nielsen {

struct ReidemeisterClassSet {
    bool finite = false;
    std::vector<DeckElement> representatives;
    std::vector<bool> degenerate_flags;
};

struct CanonicalForm {
    DeckElement rep;    ///< canonical representative of the class
    DeckElement gamma;  ///< gamma . alpha == rep
};

class TwistedConjugacy {
public:
    TwistedConjugacy(InducedHom f, InducedHom g, DomainMarker domain = DomainMarker::whole_manifold())
        : f_(std::move(f)), g_(std::move(g)), domain_(std::move(domain)) {
        if (!(f_.source() == g_.source()) || !(f_.target() == g_.target()))
            throw UnsupportedGroupPair("f# and g# must share source and target groups");
        const FlatManifold& m = source();
        const FlatManifold& n = target();
        if (domain_.whole) {
            for (std::size_t i = 0; i < m.size(); ++i) dirs_.push_back(i);
        } else {
            domain_.validate(m);
            dirs_ = domain_.loop_directions();
        }
        bool glide_glide = false;
        for (std::size_t d : dirs_)
            if (f_.lattice_image(d).eps || g_.lattice_image(d).eps) glide_glide = true;
        scale_ = glide_glide ? 2 : 1;

        // Coset representatives of H in G.
        const bool with_glide = domain_.whole && m.is_glide();
        std::vector<IntVector> offsets{IntVector(m.size(), 0)};
        for (std::size_t d : dirs_) {
            std::vector<IntVector> next;
            for (const auto& o : offsets)
                for (int c = 0; c < scale_; ++c) {
                    IntVector p = o;
                    p[d] = c;
                    next.push_back(p);
                }
            offsets = std::move(next);
        }
        for (int e = 0; e <= (with_glide ? 1 : 0); ++e)
            for (const auto& o : offsets) cosets_.push_back({e, o});

        // Sector lattices.
        const int sectors = n.is_glide() ? 2 : 1;
        for (int eps = 0; eps < sectors; ++eps) {
            const auto diag = eps ? n.glide_diagonal() : std::vector<int>(n.size(), 1);
            IntMatrix q(n.size(), dirs_.size());
            std::vector<Vector<Integer>> gens;
            for (std::size_t j = 0; j < dirs_.size(); ++j) {
                const DeckElement h = lattice_generator(j);
                const DeckElement fh = f_.apply(h), gh = g_.apply(h);
                Vector<Integer> col(n.size());
                for (std::size_t i = 0; i < n.size(); ++i) {
                    col[i] = Integer(static_cast<long>(gh.k[i] - diag[i] * fh.k[i]));
                    q(i, j) = col[i];
                }
                gens.push_back(col);
            }
            sectors_.push_back({q, HermiteBasis(gens, n.size()), smith_normal_form(q)});
        }
    }

    const FlatManifold& source() const { return f_.source(); }
    const FlatManifold& target() const { return f_.target(); }
    const InducedHom& f_hom() const { return f_; }
    const InducedHom& g_hom() const { return g_; }
    const DomainMarker& domain() const { return domain_; }
    const std::vector<DeckElement>& coset_representatives() const { return cosets_; }
    int lattice_scale() const { return scale_; }

    /// gamma . alpha = g#(gamma) alpha f#(gamma)^-1
    DeckElement act(const DeckElement& gamma, const DeckElement& alpha) const {
        const FlatManifold& n = target();
        return deck_compose(n, deck_compose(n, g_.apply(gamma), alpha), deck_inverse(n, f_.apply(gamma)));
    }

    /// Membership of gamma in the acting group.
    bool acts(const DeckElement& gamma) const {
        if (domain_.whole) return true;
        if (gamma.eps) return false;
        for (std::size_t i = 0; i < gamma.k.size(); ++i)
            if (gamma.k[i] != 0 && std::find(dirs_.begin(), dirs_.end(), i) == dirs_.end()) return false;
        return true;
    }

    bool finite() const {
        if (dirs_.size() < target().size()) return false;
        for (const auto& s : sectors_)
            if (!s.basis.full_rank()) return false;
        return true;
    }

    CanonicalForm canonicalize(const DeckElement& alpha) const {
        check_target(alpha);
        std::optional<CanonicalForm> best;
        for (const auto& r : cosets_) {
            DeckElement moved = act(r, alpha);
            DeckElement reduced{moved.eps, to_int_vector(sectors_[moved.eps].basis.reduce(to_integer_vector(moved.k)))};
            if (best && !(reduced < best->rep)) continue;
            // Recover h in H with h . moved == reduced.
            auto h = solve_sector(moved.eps, moved.k, reduced.k);
            if (!h) throw NielsenError("internal: reduced vector left its H-orbit");
            best = CanonicalForm{reduced, deck_compose(source(), *h, r)};
        }
        return *best;
    }

    DeckElement canonical_rep(const DeckElement& alpha) const { return canonicalize(alpha).rep; }

    /// Some gamma with gamma . alpha == beta, or nullopt when the classes differ.
    std::optional<DeckElement> witness(const DeckElement& alpha, const DeckElement& beta) const {
        check_target(alpha);
        check_target(beta);
        for (const auto& r : cosets_) {
            DeckElement moved = act(r, alpha);
            if (moved.eps != beta.eps) continue;
            auto h = solve_sector(moved.eps, moved.k, beta.k);
            if (!h) continue;
            DeckElement gamma = deck_compose(source(), *h, r);
            if (act(gamma, alpha) != beta) throw NielsenError("internal: witness failed re-verification");
            return gamma;
        }
        return std::nullopt;
    }

    bool same_class(const DeckElement& alpha, const DeckElement& beta) const { return witness(alpha, beta).has_value(); }

    /// A stabilizer element of alpha whose source and image characters differ.
    std::optional<DeckElement> degeneracy_witness(const DeckElement& alpha) const {
        check_target(alpha);
        for (const auto& r : cosets_) {
            if (character(r, source()) == character(g_.apply(r), target())) continue;
            DeckElement moved = act(r, alpha);
            if (moved.eps != alpha.eps) continue;
            auto h = solve_sector(moved.eps, moved.k, alpha.k);
            if (!h) continue;
            DeckElement gamma = deck_compose(source(), *h, r);
            if (act(gamma, alpha) != alpha) throw NielsenError("internal: stabilizer failed re-verification");
            return gamma;
        }
        return std::nullopt;
    }

    bool is_degenerate(const DeckElement& alpha) const { return degeneracy_witness(alpha).has_value(); }

    ReidemeisterClassSet classes() const {
        ReidemeisterClassSet out;
        out.finite = finite();
        if (!out.finite) return out;
        std::set<DeckElement> reps;
        for (std::size_t eps = 0; eps < sectors_.size(); ++eps)
            for (const auto& k : sectors_[eps].basis.enumerate_cosets())
                reps.insert(canonical_rep({static_cast<int>(eps), to_int_vector(k)}));
        for (const auto& r : reps) {
            out.representatives.push_back(r);
            out.degenerate_flags.push_back(is_degenerate(r));
        }
        return out;
    }

private:
    struct Sector {
        IntMatrix matrix;
        HermiteBasis basis;
        SmithForm smith;
    };

    DeckElement lattice_generator(std::size_t j) const {
        IntVector e(source().size(), 0);
        e[dirs_[j]] = scale_;
        return deck_translation(e);
    }

    void check_target(const DeckElement& a) const {
        if (a.k.size() != target().size() || (a.eps && !target().is_glide()))
            throw UnsupportedGroupPair("element " + to_string(a) + " is not in the target deck group");
    }

    // h in H with h . (eps, from) == (eps, to), as a source deck element.
    std::optional<DeckElement> solve_sector(int eps, const IntVector& from, const IntVector& to) const {
        const Sector& s = sectors_[eps];
        Vector<Integer> rhs(from.size());
        for (std::size_t i = 0; i < from.size(); ++i) rhs[i] = Integer(static_cast<long>(to[i] - from[i]));
        Vector<Integer> ub = s.smith.left * rhs;
        Vector<Integer> y(dirs_.size(), Integer(0));
        for (std::size_t i = 0; i < ub.size(); ++i) {
            Integer d = i < std::min(s.matrix.rows(), s.matrix.cols()) ? s.smith.diag(i, i) : Integer(0);
            if (d == 0) {
                if (ub[i] != 0) return std::nullopt;
                continue;
            }
            if (ub[i] % d != 0) return std::nullopt;
            y[i] = ub[i] / d;
        }
        Vector<Integer> m = dirs_.empty() ? Vector<Integer>{} : s.smith.right * y;
        IntVector k(source().size(), 0);
        for (std::size_t j = 0; j < dirs_.size(); ++j) k[dirs_[j]] = scale_ * to_int64(m[j]);
        return deck_translation(k);
    }

    InducedHom f_;
    InducedHom g_;
    DomainMarker domain_;
    std::vector<std::size_t> dirs_;
    int scale_ = 1;
    std::vector<DeckElement> cosets_;
    std::vector<Sector> sectors_;
};

inline ReidemeisterClassSet reidemeister_classes(const InducedHom& f, const InducedHom& g) {
    return TwistedConjugacy(f, g).classes();
}

inline bool same_class(const DeckElement& alpha, const DeckElement& beta, const InducedHom& f, const InducedHom& g) {
    return TwistedConjugacy(f, g).same_class(alpha, beta);
}

inline bool is_degenerate_class(const DeckElement& alpha, const InducedHom& f, const InducedHom& g) {
    return TwistedConjugacy(f, g).is_degenerate(alpha);
}

} // namespace nielsen
