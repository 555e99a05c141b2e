#pragma once

// Straight-line homotopies between equivariant lift pairs that share their
// induced homomorphisms, with an admissibility certificate: no slice has a
// coincidence on the boundary of U.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "coincidence_solver.hpp"
#include "equivariant_map.hpp"
#include "errors.hpp"
#include "flat_space.hpp"

namespace nielsen {

/// (1 - t) a + t b, with perturbation terms scaled by the same weights.
inline EquivariantLift interpolate(const EquivariantLift& a, const EquivariantLift& b, const Rational& t) {
    if (!(a.hom() == b.hom())) throw NotAdmissible("homotopy endpoints induce different homomorphisms");
    Rational s = 1 - t;
    Matrix<Rational> l = a.linear().scaled(s) + b.linear().scaled(t);
    Vector<Rational> v(a.offset().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * a.offset()[i] + t * b.offset()[i];
    std::vector<TrigTerm> terms;
    if (a.terms() == b.terms()) {
        terms = a.terms();
    } else {
        for (const auto& [src, w] : {std::pair{&a, s.get_d()}, std::pair{&b, t.get_d()}}) {
            if (w == 0.0) continue;
            for (TrigTerm term : src->terms()) {
                for (auto& x : term.amplitude) x *= w;
                terms.push_back(term);
            }
        }
    }
    return EquivariantLift(a.hom(), l, v, terms);
}

struct CertificateOptions {
    int max_depth = 9;  ///< subdivision levels per face-time cell
};

class AdmissibleHomotopy {
public:
    AdmissibleHomotopy(EquivariantLift f0, EquivariantLift g0, EquivariantLift f1, EquivariantLift g1, OpenRegion u)
        : f0_(std::move(f0)), g0_(std::move(g0)), f1_(std::move(f1)), g1_(std::move(g1)), u_(std::move(u)) {
        if (!(f0_.hom() == f1_.hom()) || !(g0_.hom() == g1_.hom()))
            throw NotAdmissible("homotopy endpoints induce different homomorphisms");
    }

    static AdmissibleHomotopy constant(const EquivariantLift& f, const EquivariantLift& g, const OpenRegion& u) {
        return AdmissibleHomotopy(f, g, f, g, u);
    }

    const EquivariantLift& f_start() const { return f0_; }
    const EquivariantLift& g_start() const { return g0_; }
    const EquivariantLift& f_end() const { return f1_; }
    const EquivariantLift& g_end() const { return g1_; }
    const OpenRegion& region() const { return u_; }
    bool certified() const { return certified_; }

    std::pair<EquivariantLift, EquivariantLift> slice(const Rational& t) const {
        return {interpolate(f0_, f1_, t), interpolate(g0_, g1_, t)};
    }

    /// Proves that no slice has a coincidence on the boundary of U by
    /// Lipschitz exclusion over every boundary face times [0, 1]. Throws
    /// NotAdmissible when a cell cannot be excluded at the finest level.
    void certify(CertificateOptions options = {}) {
        certified_ = false;
        if (u_.is_empty() || u_.is_whole()) {
            certified_ = true;
            return;
        }
        const FlatManifold& m = f0_.source();
        for (const auto& b : u_.boxes()) {
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (b.arcs[i].full) continue;
                for (int side = 0; side < 2; ++side) {
                    std::vector<Interval> face;
                    for (std::size_t j = 0; j < m.size(); ++j) {
                        const Arc& a = b.arcs[j];
                        if (a.full)
                            face.push_back({Rational(0), Rational(1)});
                        else
                            face.push_back({a.lo, a.hi});
                    }
                    Rational wall = side ? b.arcs[i].hi : b.arcs[i].lo;
                    face[i] = {wall, wall};
                    certify_face(face, options);
                }
            }
        }
        certified_ = true;
    }

private:
    void certify_face(const std::vector<Interval>& face, const CertificateOptions& options) const {
        const auto candidates = candidate_deck_elements({{f0_, g0_}, {f1_, g1_}}, face);
        const std::size_t dim = face.size();
        Vector<double> c(dim + 1), r(dim + 1);
        for (std::size_t j = 0; j < dim; ++j) {
            c[j] = (face[j].lo.get_d() + face[j].hi.get_d()) / 2;
            r[j] = (face[j].hi.get_d() - face[j].lo.get_d()) / 2;
        }
        c[dim] = 0.5;
        r[dim] = 0.5;
        for (const auto& alpha : candidates) {
            Residual h0{f0_, g0_, alpha};
            Residual h1{f1_, g1_, alpha};
            Matrix<double> l0 = h0.lipschitz(), l1 = h1.lipschitz();
            Matrix<double> lmax(dim, dim), lsum = l0 + l1;
            for (std::size_t p = 0; p < dim; ++p)
                for (std::size_t q = 0; q < dim; ++q) lmax(p, q) = std::max(l0(p, q), l1(p, q));
            exclude(h0, h1, lmax, lsum, c, r, 0, options.max_depth, alpha);
        }
    }

    void exclude(const Residual& h0, const Residual& h1, const Matrix<double>& lmax, const Matrix<double>& lsum,
                 const Vector<double>& c, const Vector<double>& r, int level, int max_depth,
                 const DeckElement& alpha) const {
        const std::size_t dim = c.size() - 1;
        Vector<double> x(c.begin(), c.begin() + dim);
        const double t = c[dim], rt = r[dim];
        Vector<double> v0 = h0.value(x), v1 = h1.value(x);
        bool excluded = false;
        for (std::size_t i = 0; i < dim && !excluded; ++i) {
            double vt = (1 - t) * v0[i] + t * v1[i];
            double reach_x = 0.0, drift = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                reach_x += lmax(i, j) * r[j];
                drift += lsum(i, j) * r[j];
            }
            double reach = reach_x + rt * (std::fabs(v1[i] - v0[i]) + drift);
            if (std::fabs(vt) > reach * (1 + 1e-9) + 1e-12) excluded = true;
        }
        if (excluded) return;
        if (level == max_depth)
            throw NotAdmissible("cannot certify that coincidences of alpha = " + to_string(alpha) +
                                " avoid the boundary of U near x = " + format_vector(x) +
                                ", t = " + std::to_string(t));
        std::vector<std::size_t> split;
        for (std::size_t j = 0; j <= dim; ++j)
            if (r[j] > 0) split.push_back(j);
        for (std::size_t mask = 0; mask < (std::size_t{1} << split.size()); ++mask) {
            Vector<double> cc = c, rr = r;
            for (std::size_t s = 0; s < split.size(); ++s) {
                std::size_t j = split[s];
                rr[j] = r[j] / 2;
                cc[j] += ((mask >> s) & 1) ? rr[j] : -rr[j];
            }
            exclude(h0, h1, lmax, lsum, cc, rr, level + 1, max_depth, alpha);
        }
    }

    EquivariantLift f0_, g0_, f1_, g1_;
    OpenRegion u_;
    bool certified_ = false;
};

inline bool is_orientation_true_along(const AdmissibleHomotopy& h) {
    return is_orientation_true(h.g_start().hom()) == is_orientation_true(h.g_end().hom());
}

} // namespace nielsen
