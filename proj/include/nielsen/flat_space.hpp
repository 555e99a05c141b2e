#pragma once

// Flat model manifolds R^n / Gamma where Gamma is either the integer
// lattice (torus) or the lattice extended by a single glide x -> D x + t.
// Deck elements are kept in the normal form (eps, k) : x -> D^eps x + k + eps t.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace nielsen {

enum class ManifoldKind { Torus, Glide };

inline const char* to_string(ManifoldKind kind) { return kind == ManifoldKind::Torus ? "torus" : "glide"; }

struct DeckElement {
    int eps = 0;
    IntVector k;

    auto operator<=>(const DeckElement&) const = default;
    bool operator==(const DeckElement&) const = default;
};

inline std::string to_string(const DeckElement& g) {
    std::string s = "(" + std::to_string(g.eps) + ",(";
    for (std::size_t i = 0; i < g.k.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(g.k[i]);
    }
    return s + "))";
}

class FlatManifold {
public:
    static FlatManifold torus(int dim, std::string label = "T") {
        if (dim <= 0) throw InvalidGlide("dimension must be positive");
        FlatManifold m;
        m.dim_ = dim;
        m.kind_ = ManifoldKind::Torus;
        m.label_ = std::move(label);
        return m;
    }

    static FlatManifold glide(std::vector<int> diag, Vector<Rational> t, std::string label = "K") {
        const std::size_t n = diag.size();
        if (n == 0) throw InvalidGlide("dimension must be positive");
        if (t.size() != n) throw InvalidGlide("translation length differs from dimension");
        for (int d : diag)
            if (d != 1 && d != -1) throw InvalidGlide("D entries must be +1 or -1");
        bool t_integral = true;
        for (const auto& ti : t)
            if (ti.get_den() != 1) t_integral = false;
        if (t_integral) throw InvalidGlide("t is a lattice vector, so the glide is a lattice translation");
        FlatManifold m;
        m.dim_ = static_cast<int>(n);
        m.kind_ = ManifoldKind::Glide;
        m.diag_ = std::move(diag);
        m.t_ = std::move(t);
        m.label_ = std::move(label);
        m.square_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rational s = Rational(m.diag_[i]) * m.t_[i] + m.t_[i];
            if (s.get_den() != 1) throw InvalidGlide("D*t + t is not an integer vector");
            m.square_[i] = to_int64(s.get_num());
        }
        // Free action needs an axis fixed by D along which the glide moves by 1/2 mod 1.
        for (std::size_t i = 0; i < n; ++i) {
            if (m.diag_[i] != 1) continue;
            Rational frac = m.t_[i] - Rational(floor_integer(m.t_[i]));
            if (frac == Rational(1, 2)) {
                m.axis_ = static_cast<int>(i);
                break;
            }
        }
        if (m.axis_ < 0) throw InvalidGlide("glide has fixed points (no D-fixed axis with t_i = 1/2 mod 1)");
        return m;
    }

    int dim() const { return dim_; }
    std::size_t size() const { return static_cast<std::size_t>(dim_); }
    ManifoldKind kind() const { return kind_; }
    bool is_glide() const { return kind_ == ManifoldKind::Glide; }
    const std::string& label() const { return label_; }

    /// Diagonal of D (all +1 for a torus).
    std::vector<int> glide_diagonal() const { return is_glide() ? diag_ : std::vector<int>(size(), 1); }
    const Vector<Rational>& glide_translation() const { return t_; }
    /// Translation part of glide^2, i.e. D t + t.
    const IntVector& glide_square() const { return square_; }
    /// Axis along which the fundamental domain is halved.
    int glide_axis() const { return axis_; }

    bool orientable() const {
        if (!is_glide()) return true;
        int det = 1;
        for (int d : diag_) det *= d;
        return det == 1;
    }

    int glide_determinant() const {
        int det = 1;
        for (int d : glide_diagonal()) det *= d;
        return det;
    }

    bool operator==(const FlatManifold& o) const {
        return dim_ == o.dim_ && kind_ == o.kind_ && diag_ == o.diag_ && t_ == o.t_;
    }

private:
    int dim_ = 0;
    ManifoldKind kind_ = ManifoldKind::Torus;
    std::vector<int> diag_;
    Vector<Rational> t_;
    IntVector square_;
    int axis_ = -1;
    std::string label_;
};

inline FlatManifold make_manifold(int dim, ManifoldKind kind, std::optional<std::vector<int>> diag = std::nullopt,
                                  std::optional<Vector<Rational>> t = std::nullopt, std::string label = "") {
    if (kind == ManifoldKind::Torus) {
        if (diag || t) throw InvalidGlide("a torus carries no glide data");
        return FlatManifold::torus(dim, label.empty() ? "T" : label);
    }
    if (!diag || !t) throw InvalidGlide("glide manifold needs both D and t");
    if (static_cast<int>(diag->size()) != dim) throw InvalidGlide("D size differs from dimension");
    return FlatManifold::glide(*diag, *t, label.empty() ? "K" : label);
}

// ---------------------------------------------------------------------------
// Deck group arithmetic

inline DeckElement deck_identity(const FlatManifold& m) { return {0, IntVector(m.size(), 0)}; }

inline DeckElement deck_translation(IntVector k) { return {0, std::move(k)}; }

inline DeckElement deck_glide(const FlatManifold& m) { return {1, IntVector(m.size(), 0)}; }

/// Lattice generators e_1..e_n, then the glide when present.
inline std::vector<DeckElement> deck_generators(const FlatManifold& m) {
    std::vector<DeckElement> gens;
    for (std::size_t i = 0; i < m.size(); ++i) {
        IntVector e(m.size(), 0);
        e[i] = 1;
        gens.push_back(deck_translation(e));
    }
    if (m.is_glide()) gens.push_back(deck_glide(m));
    return gens;
}

/// a ∘ b as affine maps.
inline DeckElement deck_compose(const FlatManifold& m, const DeckElement& a, const DeckElement& b) {
    const std::size_t n = m.size();
    DeckElement r{(a.eps + b.eps) % 2, IntVector(n)};
    const auto& diag = m.glide_diagonal();
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t bk = a.eps ? diag[i] * b.k[i] : b.k[i];
        r.k[i] = a.k[i] + bk;
        if (a.eps && b.eps) r.k[i] += m.glide_square()[i];
    }
    return r;
}

inline DeckElement deck_inverse(const FlatManifold& m, const DeckElement& a) {
    const std::size_t n = m.size();
    DeckElement r{a.eps, IntVector(n)};
    const auto& diag = m.glide_diagonal();
    for (std::size_t i = 0; i < n; ++i) {
        if (a.eps)
            r.k[i] = -diag[i] * a.k[i] - m.glide_square()[i];
        else
            r.k[i] = -a.k[i];
    }
    return r;
}

inline DeckElement deck_power(const FlatManifold& m, DeckElement base, std::int64_t e) {
    if (e < 0) {
        base = deck_inverse(m, base);
        e = -e;
    }
    DeckElement acc = deck_identity(m);
    while (e > 0) {
        if (e & 1) acc = deck_compose(m, acc, base);
        base = deck_compose(m, base, base);
        e >>= 1;
    }
    return acc;
}

/// Orientation character: det(D)^eps.
inline int character(const DeckElement& g, const FlatManifold& m) {
    return g.eps ? m.glide_determinant() : 1;
}

/// Diagonal of the linear part D^eps.
inline std::vector<int> linear_diagonal(const FlatManifold& m, const DeckElement& g) {
    return g.eps ? m.glide_diagonal() : std::vector<int>(m.size(), 1);
}

inline Vector<Rational> deck_translation_part(const FlatManifold& m, const DeckElement& g) {
    Vector<Rational> c(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        c[i] = Rational(static_cast<long>(g.k[i]));
        if (g.eps) c[i] += m.glide_translation()[i];
    }
    return c;
}

template <typename T>
Vector<T> apply_deck(const FlatManifold& m, const DeckElement& g, const Vector<T>& x) {
    const auto diag = linear_diagonal(m, g);
    const auto c = deck_translation_part(m, g);
    Vector<T> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = T(diag[i]) * x[i] + scalar_from_rational<T>(c[i]);
    return y;
}

template <typename T>
struct Reduction {
    Vector<T> point;    ///< canonical representative in the fundamental domain
    DeckElement deck;   ///< deck * point == input
};

/// Canonical fundamental-domain representative. Torus: coordinatewise
/// floor. Glide: after translating into [0,1)^n, apply the inverse glide
/// once if the glide axis coordinate is >= 1/2, then translate again.
template <typename T>
Reduction<T> reduce_to_fundamental_domain(const FlatManifold& m, const Vector<T>& x) {
    const std::size_t n = m.size();
    IntVector shift(n);
    Vector<T> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        shift[i] = floor_to_int(x[i]);
        y[i] = x[i] - T(static_cast<long>(shift[i]));
    }
    DeckElement deck = deck_translation(shift);
    if (m.is_glide() && y[m.glide_axis()] >= T(1) / T(2)) {
        DeckElement g = deck_glide(m);
        Vector<T> z = apply_deck(m, deck_inverse(m, g), y);
        IntVector shift2(n);
        for (std::size_t i = 0; i < n; ++i) {
            shift2[i] = floor_to_int(z[i]);
            z[i] = z[i] - T(static_cast<long>(shift2[i]));
        }
        deck = deck_compose(m, deck_compose(m, deck, g), deck_translation(shift2));
        y = z;
    }
    return {y, deck};
}

/// Sup-norm distance between two points of the quotient (double path).
inline double quotient_distance(const FlatManifold& m, const Vector<double>& a, const Vector<double>& b) {
    auto torus_dist = [](const Vector<double>& p, const Vector<double>& q) {
        double d = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            double diff = p[i] - q[i];
            diff -= std::round(diff);
            d = std::max(d, std::fabs(diff));
        }
        return d;
    };
    double d = torus_dist(a, b);
    if (m.is_glide()) d = std::min(d, torus_dist(a, apply_deck(m, deck_glide(m), b)));
    return d;
}

// ---------------------------------------------------------------------------
// Open regions: finite unions of boxes of circle arcs, projected to M.

struct Arc {
    bool full = true;
    Rational lo = 0;
    Rational hi = 1;

    static Arc whole() { return {}; }
    static Arc open(Rational lo, Rational hi) {
        if (!(lo < hi)) throw InvalidRegion("arc needs lo < hi");
        if (hi - lo > 1) throw InvalidRegion("arc longer than the circle");
        Integer shift = floor_integer(lo);
        Arc a{false, lo - Rational(shift), hi - Rational(shift)};
        return a;
    }

    template <typename T>
    bool contains(const T& y) const {
        if (full) return true;
        T lo_t = scalar_from_rational<T>(lo);
        T hi_t = scalar_from_rational<T>(hi);
        T w = y - T(static_cast<long>(floor_to_int(T(y - lo_t))));
        return w > lo_t && w < hi_t;
    }

    bool operator==(const Arc& o) const { return full == o.full && (full || (lo == o.lo && hi == o.hi)); }
};

inline bool arcs_intersect(const Arc& a, const Arc& b) {
    if (a.full || b.full) return true;
    for (int j = -1; j <= 1; ++j) {
        Rational lo = std::max(a.lo, Rational(b.lo + j));
        Rational hi = std::min(a.hi, Rational(b.hi + j));
        if (lo < hi) return true;
    }
    return false;
}

struct Box {
    std::vector<Arc> arcs;

    template <typename T>
    bool contains_lift(const Vector<T>& y) const {
        for (std::size_t i = 0; i < arcs.size(); ++i)
            if (!arcs[i].contains(y[i])) return false;
        return true;
    }

    bool operator==(const Box& o) const { return arcs == o.arcs; }
};

/// Image of a box under the glide (as a box of the double cover).
inline Box glide_image(const FlatManifold& m, const Box& b) {
    Box out;
    const auto diag = m.glide_diagonal();
    for (std::size_t i = 0; i < b.arcs.size(); ++i) {
        const Arc& a = b.arcs[i];
        if (a.full) {
            out.arcs.push_back(a);
            continue;
        }
        const Rational& t = m.glide_translation()[i];
        if (diag[i] == 1)
            out.arcs.push_back(Arc::open(a.lo + t, a.hi + t));
        else
            out.arcs.push_back(Arc::open(t - a.hi, t - a.lo));
    }
    return out;
}

inline bool boxes_intersect(const Box& a, const Box& b) {
    for (std::size_t i = 0; i < a.arcs.size(); ++i)
        if (!arcs_intersect(a.arcs[i], b.arcs[i])) return false;
    return true;
}

class OpenRegion {
public:
    OpenRegion() = default;
    OpenRegion(std::size_t dim, std::vector<Box> boxes) : dim_(dim), boxes_(std::move(boxes)) {
        for (const auto& b : boxes_)
            if (b.arcs.size() != dim_) throw InvalidRegion("box dimension differs from region dimension");
    }

    static OpenRegion whole(std::size_t dim) { return OpenRegion(dim, {Box{std::vector<Arc>(dim)}}); }
    static OpenRegion empty(std::size_t dim) { return OpenRegion(dim, {}); }

    std::size_t dim() const { return dim_; }
    const std::vector<Box>& boxes() const { return boxes_; }
    bool is_empty() const { return boxes_.empty(); }

    /// True when some box is the whole manifold.
    bool is_whole() const {
        for (const auto& b : boxes_) {
            bool all_full = true;
            for (const auto& a : b.arcs) all_full = all_full && a.full;
            if (all_full) return true;
        }
        return false;
    }

    /// Membership of the projection of x in M.
    template <typename T>
    bool contains(const FlatManifold& m, const Vector<T>& x) const {
        for (const auto& b : boxes_) {
            if (b.contains_lift(x)) return true;
            if (m.is_glide() && b.contains_lift(apply_deck(m, deck_glide(m), x))) return true;
        }
        return false;
    }

    bool operator==(const OpenRegion& o) const { return dim_ == o.dim_ && boxes_ == o.boxes_; }

private:
    std::size_t dim_ = 0;
    std::vector<Box> boxes_;
};

/// Exact disjointness of the projections of two regions in M.
inline bool regions_disjoint(const FlatManifold& m, const OpenRegion& a, const OpenRegion& b) {
    for (const auto& ba : a.boxes())
        for (const auto& bb : b.boxes()) {
            if (boxes_intersect(ba, bb)) return false;
            if (m.is_glide() && boxes_intersect(ba, glide_image(m, bb))) return false;
        }
    return true;
}

/// The domain V whose loops decide degeneracy: the whole manifold or one
/// embedded box. A box contributes the lattice directions of its full arcs.
struct DomainMarker {
    bool whole = true;
    Box box;

    static DomainMarker whole_manifold() { return {}; }
    static DomainMarker from_box(Box b) { return {false, std::move(b)}; }

    std::vector<std::size_t> loop_directions() const {
        std::vector<std::size_t> dirs;
        for (std::size_t i = 0; i < box.arcs.size(); ++i)
            if (box.arcs[i].full) dirs.push_back(i);
        return dirs;
    }

    template <typename T>
    bool contains(const FlatManifold& m, const Vector<T>& x) const {
        if (whole) return true;
        if (box.contains_lift(x)) return true;
        return m.is_glide() && box.contains_lift(apply_deck(m, deck_glide(m), x));
    }

    /// A box domain must embed in M so its loops are exactly its full-arc translations.
    void validate(const FlatManifold& m) const {
        if (whole) return;
        if (box.arcs.size() != m.size()) throw DomainMismatch("domain box dimension differs from manifold");
        if (m.is_glide() && boxes_intersect(box, glide_image(m, box)))
            throw DomainMismatch("domain box overlaps its glide image, so it does not embed in M");
    }

    bool operator==(const DomainMarker& o) const { return whole == o.whole && (whole || box == o.box); }
};

} // namespace nielsen
