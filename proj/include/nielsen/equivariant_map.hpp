#pragma once

// Maps between flat manifolds, held as equivariant lifts to R^n:
// x -> L x + v + sum_j a_j sin(2 pi <m_j, x> + p_j), together with the
// induced homomorphism of deck groups.

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "flat_space.hpp"
#include "rational.hpp"

namespace nielsen {

class InducedHom {
public:
    InducedHom() = default;

    /// images: one per deck generator of `source` (lattice e_1..e_n, then glide).
    InducedHom(FlatManifold source, FlatManifold target, std::vector<DeckElement> images)
        : source_(std::move(source)), target_(std::move(target)), images_(std::move(images)) {
        validate();
    }

    /// Torus-to-torus hom given by an integer matrix (column i = image of e_i).
    static InducedHom from_matrix(const FlatManifold& source, const FlatManifold& target,
                                  const std::vector<IntVector>& columns) {
        std::vector<DeckElement> images;
        for (const auto& c : columns) images.push_back(deck_translation(c));
        return InducedHom(source, target, images);
    }

    const FlatManifold& source() const { return source_; }
    const FlatManifold& target() const { return target_; }
    const std::vector<DeckElement>& images() const { return images_; }

    const DeckElement& lattice_image(std::size_t i) const { return images_[i]; }
    const DeckElement& glide_image() const { return images_.back(); }

    DeckElement apply(const DeckElement& g) const {
        const FlatManifold& n = target_;
        DeckElement acc = deck_identity(n);
        for (std::size_t i = 0; i < source_.size(); ++i)
            if (g.k[i] != 0) acc = deck_compose(n, acc, deck_power(n, images_[i], g.k[i]));
        if (g.eps) acc = deck_compose(n, acc, glide_image());
        return acc;
    }

    /// Integer matrix of the hom restricted to the lattice (torus targets only).
    std::vector<IntVector> lattice_columns() const {
        std::vector<IntVector> cols;
        for (std::size_t i = 0; i < source_.size(); ++i) cols.push_back(images_[i].k);
        return cols;
    }

    bool operator==(const InducedHom& o) const {
        return source_ == o.source_ && target_ == o.target_ && images_ == o.images_;
    }

private:
    void validate() const {
        const std::size_t want = source_.size() + (source_.is_glide() ? 1 : 0);
        if (images_.size() != want)
            throw InvalidHomomorphism("expected " + std::to_string(want) + " generator images, got " +
                                      std::to_string(images_.size()));
        for (const auto& im : images_) {
            if (im.k.size() != target_.size()) throw InvalidHomomorphism("image has wrong dimension");
            if (im.eps != 0 && im.eps != 1) throw InvalidHomomorphism("image eps must be 0 or 1");
            if (im.eps && !target_.is_glide()) throw InvalidHomomorphism("glide image in a torus target");
        }
        const FlatManifold& n = target_;
        for (std::size_t i = 0; i < source_.size(); ++i)
            for (std::size_t j = i + 1; j < source_.size(); ++j)
                if (deck_compose(n, images_[i], images_[j]) != deck_compose(n, images_[j], images_[i]))
                    throw InvalidHomomorphism("images of e" + std::to_string(i + 1) + " and e" +
                                              std::to_string(j + 1) + " do not commute");
        if (!source_.is_glide()) return;
        const DeckElement& gi = glide_image();
        const DeckElement gi_inv = deck_inverse(n, gi);
        const auto diag = source_.glide_diagonal();
        for (std::size_t i = 0; i < source_.size(); ++i) {
            DeckElement lhs = deck_compose(n, deck_compose(n, gi, images_[i]), gi_inv);
            DeckElement rhs = deck_power(n, images_[i], diag[i]);
            if (lhs != rhs)
                throw InvalidHomomorphism("glide conjugation relation fails for e" + std::to_string(i + 1));
        }
        DeckElement sq = deck_compose(n, gi, gi);
        DeckElement want_sq = deck_identity(n);
        for (std::size_t i = 0; i < source_.size(); ++i)
            want_sq = deck_compose(n, want_sq, deck_power(n, images_[i], source_.glide_square()[i]));
        if (sq != want_sq) throw InvalidHomomorphism("image of glide^2 differs from image of D t + t");
    }

    FlatManifold source_;
    FlatManifold target_;
    std::vector<DeckElement> images_;
};

inline bool is_orientation_true(const InducedHom& hom) {
    const auto gens = deck_generators(hom.source());
    for (const auto& g : gens)
        if (character(g, hom.source()) != character(hom.apply(g), hom.target())) return false;
    return true;
}

/// amplitude * sin(2 pi <freq, x> + phase)
struct TrigTerm {
    Vector<double> amplitude;
    IntVector freq;
    double phase = 0.0;

    bool operator==(const TrigTerm&) const = default;
};

namespace detail {

inline double trig_angle(const TrigTerm& t, const Vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<double>(t.freq[i]) * x[i];
    return 2.0 * std::numbers::pi * s + t.phase;
}

// sum over terms of a sin(theta + p) = S sin(theta) + C cos(theta), keyed by sign-normalized frequency.
struct Fourier {
    Vector<double> s;
    Vector<double> c;
};

inline std::map<IntVector, Fourier> fourier_coefficients(const std::vector<TrigTerm>& terms, std::size_t dim) {
    std::map<IntVector, Fourier> out;
    for (const auto& t : terms) {
        IntVector m = t.freq;
        double flip = 1.0;
        for (auto mi : m) {
            if (mi == 0) continue;
            if (mi < 0) {
                for (auto& x : m) x = -x;
                flip = -1.0;
            }
            break;
        }
        auto& f = out[m];
        if (f.s.empty()) {
            f.s.assign(dim, 0.0);
            f.c.assign(dim, 0.0);
        }
        bool constant = true;
        for (auto mi : m) constant = constant && mi == 0;
        for (std::size_t i = 0; i < dim; ++i) {
            if (!constant) f.s[i] += flip * t.amplitude[i] * std::cos(t.phase);
            f.c[i] += t.amplitude[i] * std::sin(t.phase);
        }
    }
    return out;
}

inline double fourier_distance(const std::map<IntVector, Fourier>& a, const std::map<IntVector, Fourier>& b) {
    double worst = 0.0;
    auto scan = [&](const std::map<IntVector, Fourier>& x, const std::map<IntVector, Fourier>& y) {
        for (const auto& [m, f] : x) {
            auto it = y.find(m);
            for (std::size_t i = 0; i < f.s.size(); ++i) {
                double ds = f.s[i] - (it == y.end() ? 0.0 : it->second.s[i]);
                double dc = f.c[i] - (it == y.end() ? 0.0 : it->second.c[i]);
                worst = std::max({worst, std::fabs(ds), std::fabs(dc)});
            }
        }
    };
    scan(a, b);
    scan(b, a);
    return worst;
}

// Terms of x -> delta(gamma x).
inline std::vector<TrigTerm> precompose_deck(const FlatManifold& m, const DeckElement& g,
                                             const std::vector<TrigTerm>& terms) {
    const auto diag = linear_diagonal(m, g);
    const auto c = deck_translation_part(m, g);
    std::vector<TrigTerm> out;
    for (const auto& t : terms) {
        TrigTerm u = t;
        double shift = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            u.freq[i] = t.freq[i] * diag[i];
            shift += static_cast<double>(t.freq[i]) * c[i].get_d();
        }
        shift -= std::floor(shift);
        u.phase = t.phase + 2.0 * std::numbers::pi * shift;
        out.push_back(u);
    }
    return out;
}

inline std::vector<TrigTerm> scale_amplitudes(const std::vector<int>& diag, std::vector<TrigTerm> terms) {
    for (auto& t : terms)
        for (std::size_t i = 0; i < diag.size(); ++i) t.amplitude[i] *= diag[i];
    return terms;
}

} // namespace detail

class EquivariantLift {
public:
    EquivariantLift() = default;

    EquivariantLift(InducedHom hom, Matrix<Rational> linear, Vector<Rational> offset,
                    std::vector<TrigTerm> terms = {}, double tol = 1e-12)
        : hom_(std::move(hom)), linear_(std::move(linear)), offset_(std::move(offset)), terms_(std::move(terms)) {
        validate(tol);
    }

    const FlatManifold& source() const { return hom_.source(); }
    const FlatManifold& target() const { return hom_.target(); }
    const InducedHom& hom() const { return hom_; }
    const Matrix<Rational>& linear() const { return linear_; }
    const Vector<Rational>& offset() const { return offset_; }
    const std::vector<TrigTerm>& terms() const { return terms_; }
    bool is_affine() const { return terms_.empty(); }

    Vector<Rational> evaluate_exact(const Vector<Rational>& x) const {
        if (!is_affine()) throw NielsenError("exact evaluation needs an affine lift");
        return linear_ * x + offset_;
    }

    Vector<double> evaluate(const Vector<double>& x) const {
        Vector<double> y = convert_matrix<double>(linear_) * x + convert_vector<double>(offset_);
        for (const auto& t : terms_) {
            double s = std::sin(detail::trig_angle(t, x));
            for (std::size_t i = 0; i < y.size(); ++i) y[i] += t.amplitude[i] * s;
        }
        return y;
    }

    Matrix<double> jacobian(const Vector<double>& x) const {
        Matrix<double> j = convert_matrix<double>(linear_);
        for (const auto& t : terms_) {
            double c = 2.0 * std::numbers::pi * std::cos(detail::trig_angle(t, x));
            for (std::size_t r = 0; r < j.rows(); ++r)
                for (std::size_t q = 0; q < j.cols(); ++q)
                    j(r, q) += t.amplitude[r] * c * static_cast<double>(t.freq[q]);
        }
        return j;
    }

    /// Bound on |delta_i| over all of R^n.
    Vector<double> perturbation_bound() const {
        Vector<double> b(target().size(), 0.0);
        for (const auto& t : terms_)
            for (std::size_t i = 0; i < b.size(); ++i) b[i] += std::fabs(t.amplitude[i]);
        return b;
    }

    /// Entrywise bound on |d delta_i / d x_j|.
    Matrix<double> perturbation_lipschitz() const {
        Matrix<double> b(target().size(), source().size());
        for (const auto& t : terms_)
            for (std::size_t i = 0; i < b.rows(); ++i)
                for (std::size_t j = 0; j < b.cols(); ++j)
                    b(i, j) += 2.0 * std::numbers::pi * std::fabs(t.amplitude[i]) * std::fabs(double(t.freq[j]));
        return b;
    }

    EquivariantLift with_terms(std::vector<TrigTerm> terms) const {
        return EquivariantLift(hom_, linear_, offset_, std::move(terms));
    }
    EquivariantLift with_offset(Vector<Rational> offset) const {
        return EquivariantLift(hom_, linear_, std::move(offset), terms_);
    }

    bool operator==(const EquivariantLift& o) const {
        return hom_ == o.hom_ && linear_ == o.linear_ && offset_ == o.offset_ && terms_ == o.terms_;
    }

private:
    void validate(double tol) const {
        const std::size_t n = source().size();
        if (source().size() != target().size()) throw NotEquivariant("source and target dimensions differ");
        if (linear_.rows() != n || linear_.cols() != n) throw NotEquivariant("L has wrong shape");
        if (offset_.size() != n) throw NotEquivariant("v has wrong length");
        for (const auto& t : terms_)
            if (t.amplitude.size() != n || t.freq.size() != n)
                throw NotEquivariant("perturbation term has wrong dimension");
        const auto gens = deck_generators(source());
        for (std::size_t gi = 0; gi < gens.size(); ++gi) {
            const DeckElement& g = gens[gi];
            const DeckElement img = hom_.apply(g);
            const auto a_src = linear_diagonal(source(), g);
            const auto a_tgt = linear_diagonal(target(), img);
            const std::string name = gi < n ? "e" + std::to_string(gi + 1) : std::string("glide");
            // L A_g = A_phi(g) L
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (linear_(i, j) * a_src[j] != Rational(a_tgt[i]) * linear_(i, j))
                        throw NotEquivariant("generator " + name + ": L A_g != A_phi(g) L at (" +
                                             std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
            // L c_g + v = A_phi(g) v + c_phi(g)
            Vector<Rational> lhs = linear_ * deck_translation_part(source(), g) + offset_;
            Vector<Rational> rhs = deck_translation_part(target(), img);
            for (std::size_t i = 0; i < n; ++i) rhs[i] += Rational(a_tgt[i]) * offset_[i];
            if (lhs != rhs) throw NotEquivariant("generator " + name + ": translation parts disagree");
            if (terms_.empty()) continue;
            auto moved = detail::fourier_coefficients(detail::precompose_deck(source(), g, terms_), n);
            auto scaled = detail::fourier_coefficients(detail::scale_amplitudes(a_tgt, terms_), n);
            if (detail::fourier_distance(moved, scaled) > tol)
                throw NotEquivariant("generator " + name + ": perturbation is not equivariant");
        }
    }

    InducedHom hom_;
    Matrix<Rational> linear_;
    Vector<Rational> offset_;
    std::vector<TrigTerm> terms_;
};

inline EquivariantLift make_affine_lift(const InducedHom& hom, Matrix<Rational> L, Vector<Rational> v) {
    return EquivariantLift(hom, std::move(L), std::move(v));
}

/// Linear part of a deck element of N as a rational matrix.
inline Matrix<Rational> deck_linear_matrix(const FlatManifold& m, const DeckElement& g) {
    return Matrix<Rational>::diagonal(linear_diagonal(m, g));
}

/// alpha ∘ f~ as an affine map: (A_alpha L, A_alpha v + c_alpha).
inline std::pair<Matrix<Rational>, Vector<Rational>> compose_affine(const FlatManifold& n, const DeckElement& alpha,
                                                                     const EquivariantLift& f) {
    const auto diag = linear_diagonal(n, alpha);
    Matrix<Rational> l = f.linear().row_scaled(diag);
    Vector<Rational> c = deck_translation_part(n, alpha);
    Vector<Rational> v(f.offset().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = Rational(diag[i]) * f.offset()[i] + c[i];
    return {l, v};
}

/// Subspace (as coordinate mask) fixed by the linear parts of every phi(gamma):
/// constant perturbations may only live here.
inline std::vector<bool> invariant_coordinates(const InducedHom& hom) {
    std::vector<bool> mask(hom.target().size(), true);
    for (const auto& g : deck_generators(hom.source())) {
        auto d = linear_diagonal(hom.target(), hom.apply(g));
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (d[i] != 1) mask[i] = false;
    }
    return mask;
}

/// Projects an arbitrary trig term onto equivariant ones by averaging over
/// the glide (lattice invariance only needs integer frequencies), keeping
/// amplitude components in directions where every lattice image acts by +1.
inline std::vector<TrigTerm> symmetrize_term(const InducedHom& hom, const TrigTerm& t) {
    const FlatManifold& m = hom.source();
    const std::size_t n = m.size();
    TrigTerm base = t;
    for (std::size_t i = 0; i < n; ++i) {
        bool fixed = true;
        for (std::size_t j = 0; j < n; ++j)
            if (linear_diagonal(hom.target(), hom.lattice_image(j))[i] != 1) fixed = false;
        if (!fixed) base.amplitude[i] = 0.0;
    }
    if (!m.is_glide()) return {base};
    const DeckElement g = deck_glide(m);
    const auto a_tgt = linear_diagonal(hom.target(), hom.apply(g));
    // (delta + A' delta∘g) / 2 : equivariant for g since A'^2 = I and delta∘g^2 = delta.
    TrigTerm half = base;
    for (auto& a : half.amplitude) a *= 0.5;
    auto moved = detail::scale_amplitudes(a_tgt, detail::precompose_deck(m, g, {half}));
    return {half, moved.front()};
}

} // namespace nielsen
