#pragma once

// Orientation choices for a coincidence pair, stored as one sign per
// Reidemeister class. A sign s at class c means: relative to the standard
// orientation of R^n at x~ and at g~(x~), where x~ is the lift of the point
// whose deck element is the canonical representative c.

#include <map>
#include <optional>
#include <vector>

#include "coincidence_solver.hpp"
#include "equivariant_map.hpp"
#include "errors.hpp"
#include "homotopy.hpp"
#include "twisted_conjugacy.hpp"

namespace nielsen {

enum class OrientationScope { Global, PerClass };

class OrientationChoice {
public:
    OrientationChoice() = default;

    static OrientationChoice global(int sign) {
        OrientationChoice o;
        o.scope_ = OrientationScope::Global;
        o.global_sign_ = normalize(sign);
        return o;
    }

    /// Unlisted classes get default_sign.
    static OrientationChoice per_class(std::map<DeckElement, int> table, int default_sign = 1) {
        OrientationChoice o;
        o.scope_ = OrientationScope::PerClass;
        o.global_sign_ = normalize(default_sign);
        for (auto& [k, s] : table) o.table_[k] = normalize(s);
        return o;
    }

    OrientationScope scope() const { return scope_; }
    bool is_global() const { return scope_ == OrientationScope::Global; }
    int global_sign() const { return global_sign_; }
    const std::map<DeckElement, int>& table() const { return table_; }

    /// Sign at a canonical class representative.
    int sign(const DeckElement& rep) const {
        if (is_global()) return global_sign_;
        auto it = table_.find(rep);
        return it == table_.end() ? global_sign_ : it->second;
    }

    bool operator==(const OrientationChoice& o) const {
        return scope_ == o.scope_ && global_sign_ == o.global_sign_ && table_ == o.table_;
    }

private:
    static int normalize(int s) {
        if (s != 1 && s != -1) throw NielsenError("orientation sign must be +1 or -1");
        return s;
    }

    OrientationScope scope_ = OrientationScope::Global;
    int global_sign_ = 1;
    std::map<DeckElement, int> table_;
};

/// Global scope needs g orientation true; per-class scope anchors
/// base_class at base_sign and leaves the remaining classes at +1.
inline OrientationChoice coherent_orientation(const InducedHom& g_hom, OrientationScope scope, int base_sign,
                                              std::optional<DeckElement> base_class = std::nullopt) {
    if (scope == OrientationScope::Global) {
        if (!is_orientation_true(g_hom))
            throw NotOrientationTrue("a single global orientation needs g to be orientation true");
        return OrientationChoice::global(base_sign);
    }
    std::map<DeckElement, int> table;
    if (base_class) table[*base_class] = base_sign;
    return OrientationChoice::per_class(table);
}

inline OrientationChoice negate(const OrientationChoice& o) {
    if (o.is_global()) return OrientationChoice::global(-o.global_sign());
    std::map<DeckElement, int> table = o.table();
    for (auto& [k, s] : table) s = -s;
    return OrientationChoice::per_class(table, -o.global_sign());
}

/// Homotopies keep the induced homomorphisms, so each surviving class keeps
/// its sign and classes born along the way fall back to +1.
inline OrientationChoice transport_through_homotopy(const OrientationChoice& o, const AdmissibleHomotopy& h) {
    if (!h.certified()) throw NotAdmissible("homotopy has not been certified admissible");
    return o;
}

/// sign det(Jg) at x times the orientation sign of the class.
inline int sign_of_embedding(const EquivariantLift& g, const Vector<double>& x, const OrientationChoice& o,
                             const DeckElement& class_rep) {
    int s = 0;
    if (g.is_affine()) {
        s = sign_of(determinant(g.linear()));
    } else {
        double d = determinant(g.jacobian(x));
        s = std::fabs(d) > 1e-12 ? (d > 0 ? 1 : -1) : 0;
    }
    if (s == 0) throw SingularJacobian("g has singular derivative at " + format_vector(x));
    return s * o.sign(class_rep);
}

/// The orientation of Coin(g, f) describing the same local orientations as
/// `o` does for Coin(f, g), tabulated on the given (f, g) classes.
inline OrientationChoice swap_orientation(const OrientationChoice& o, const TwistedConjugacy& fg,
                                          const TwistedConjugacy& gf, const std::vector<DeckElement>& classes) {
    const FlatManifold& m = fg.source();
    const FlatManifold& n = fg.target();
    std::map<DeckElement, int> table;
    for (const auto& c : classes) {
        CanonicalForm swapped = gf.canonicalize(deck_inverse(n, c));
        int s = o.sign(c) * character(c, n) * character(swapped.gamma, m) *
                character(gf.g_hom().apply(swapped.gamma), n);
        table[swapped.rep] = s;
    }
    return OrientationChoice::per_class(table, o.is_global() ? 1 : o.global_sign());
}

} // namespace nielsen
