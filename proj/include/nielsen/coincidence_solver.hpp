#pragma once

// Coin(f, g, U): solve g~(x) = alpha f~(x) upstairs for each candidate deck
// element alpha of N, keep solutions in the fundamental domain and in U.
// Affine pairs are solved exactly; perturbed pairs by Lipschitz cell
// exclusion followed by Newton iteration.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "equivariant_map.hpp"
#include "errors.hpp"
#include "flat_space.hpp"
#include "rational.hpp"
#include "twisted_conjugacy.hpp"

namespace nielsen {

struct SolverOptions {
    bool exact = true;             ///< exact path (affine pairs only)
    double tol = 1e-10;            ///< Newton residual
    double regularity = 1e-8;      ///< |det| threshold for regular points
    double dedup = 1e-6;           ///< merge radius for numeric roots
    int depth = 5;                 ///< cells of width 2^-depth per axis
    double amplitude_cap = 0.05;   ///< perturbation amplitude / sigma_min(L_g - A L_f)
    bool allow_irregular = false;  ///< keep non-regular points instead of failing
};

struct CoincidenceRecord {
    Vector<double> point;                       ///< fundamental-domain coordinates
    std::optional<Vector<Rational>> exact_point;
    DeckElement alpha;                          ///< alpha f~(x) = g~(x) at x = point
    Matrix<double> jac_diff;                    ///< Jg - A_alpha Jf at point
    std::optional<Matrix<Rational>> exact_jac;
    bool regular = true;
    bool degenerate = false;
    int lift_sign = 0;                          ///< sign det(jac_diff), 0 if not regular
    DeckElement class_rep;                      ///< canonical class representative
    int aligned_sign = 0;                       ///< lift_sign moved to the lift whose alpha is class_rep
};

/// Closed interval per coordinate.
struct Interval {
    Rational lo;
    Rational hi;
};

/// The closure of the fundamental domain as intervals.
inline std::vector<Interval> fundamental_box(const FlatManifold& m) {
    std::vector<Interval> box(m.size(), Interval{Rational(0), Rational(1)});
    if (m.is_glide()) box[m.glide_axis()].hi = Rational(1, 2);
    return box;
}

template <typename T>
bool in_fundamental_domain(const FlatManifold& m, const Vector<T>& x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        T hi = (m.is_glide() && static_cast<int>(i) == m.glide_axis()) ? T(1) / T(2) : T(1);
        if (x[i] < T(0) || !(x[i] < hi)) return false;
    }
    return true;
}

namespace detail {

// Range of sum_j a_j x_j over x in box.
inline Interval affine_range(const Vector<Rational>& row, const Rational& c, const std::vector<Interval>& box) {
    Interval r{c, c};
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (sgn(row[j]) >= 0) {
            r.lo += row[j] * box[j].lo;
            r.hi += row[j] * box[j].hi;
        } else {
            r.lo += row[j] * box[j].hi;
            r.hi += row[j] * box[j].lo;
        }
    }
    return r;
}

inline Integer ceil_integer(const Rational& r) { return -floor_integer(Rational(-r)); }

} // namespace detail

/// Deck elements alpha for which alpha f~ and g~ can meet over `box`.
/// Each lift pair contributes the integer range of g~(x) - D^e f~(x) - e t.
inline std::vector<DeckElement> candidate_deck_elements(const std::vector<std::pair<EquivariantLift, EquivariantLift>>& pairs,
                                                        const std::vector<Interval>& box) {
    std::vector<DeckElement> out;
    if (pairs.empty() || box.empty()) return out;
    const FlatManifold& n = pairs.front().first.target();
    const std::size_t dim = n.size();
    for (int e = 0; e <= (n.is_glide() ? 1 : 0); ++e) {
        const auto diag = e ? n.glide_diagonal() : std::vector<int>(dim, 1);
        std::vector<Integer> lo(dim), hi(dim);
        bool first = true;
        for (const auto& [f, g] : pairs) {
            const auto bf = f.perturbation_bound();
            const auto bg = g.perturbation_bound();
            for (std::size_t i = 0; i < dim; ++i) {
                Vector<Rational> row(dim);
                for (std::size_t j = 0; j < dim; ++j) row[j] = g.linear()(i, j) - Rational(diag[i]) * f.linear()(i, j);
                Rational c = g.offset()[i] - Rational(diag[i]) * f.offset()[i];
                if (e) c -= n.glide_translation()[i];
                Interval r = detail::affine_range(row, c, box);
                Rational slack = rational_upper_bound(bf[i] + bg[i]);
                Integer l = detail::ceil_integer(Rational(r.lo - slack));
                Integer h = floor_integer(Rational(r.hi + slack));
                if (first || l < lo[i]) lo[i] = l;
                if (first || h > hi[i]) hi[i] = h;
            }
            first = false;
        }
        bool empty = false;
        for (std::size_t i = 0; i < dim; ++i) empty = empty || lo[i] > hi[i];
        if (empty) continue;
        IntVector k(dim);
        for (std::size_t i = 0; i < dim; ++i) k[i] = to_int64(lo[i]);
        while (true) {
            out.push_back({e, k});
            std::size_t i = 0;
            for (; i < dim; ++i) {
                if (k[i] < to_int64(hi[i])) {
                    ++k[i];
                    break;
                }
                k[i] = to_int64(lo[i]);
            }
            if (i == dim) break;
        }
    }
    return out;
}

inline std::vector<DeckElement> candidate_deck_elements(const EquivariantLift& f, const EquivariantLift& g,
                                                        const OpenRegion& u) {
    if (u.is_empty()) return {};
    return candidate_deck_elements({{f, g}}, fundamental_box(f.source()));
}

/// Where a point sits relative to U: inside, outside, or on its boundary.
enum class RegionPosition { Inside, Outside, Boundary };

namespace detail {

// Position of y relative to the open arc, with `margin` treated as the boundary band.
inline RegionPosition arc_position(const Arc& a, double y, double margin) {
    if (a.full) return RegionPosition::Inside;
    double lo = a.lo.get_d(), hi = a.hi.get_d();
    double w = y - std::floor(y - lo);
    // w in [lo, lo + 1)
    if (w > lo + margin && w < hi - margin) return RegionPosition::Inside;
    if (w >= hi + margin && w < lo + 1 - margin) return RegionPosition::Outside;
    return RegionPosition::Boundary;
}

inline RegionPosition arc_position(const Arc& a, const Rational& y) {
    if (a.full) return RegionPosition::Inside;
    Rational w = y - Rational(floor_integer(Rational(y - a.lo)));
    if (w > a.lo && w < a.hi) return RegionPosition::Inside;
    if (w == a.lo || w == a.hi || w == a.lo + 1) return RegionPosition::Boundary;
    return RegionPosition::Outside;
}

template <typename T, typename... Margin>
RegionPosition box_position(const Box& b, const Vector<T>& y, Margin... margin) {
    RegionPosition p = RegionPosition::Inside;
    for (std::size_t i = 0; i < b.arcs.size(); ++i) {
        RegionPosition q = arc_position(b.arcs[i], y[i], margin...);
        if (q == RegionPosition::Outside) return RegionPosition::Outside;
        if (q == RegionPosition::Boundary) p = RegionPosition::Boundary;
    }
    return p;
}

} // namespace detail

/// Exact position of x in M relative to U (boundary = closure minus U).
template <typename T, typename... Margin>
RegionPosition region_position(const FlatManifold& m, const OpenRegion& u, const Vector<T>& x, Margin... margin) {
    bool boundary = false;
    for (const auto& b : u.boxes()) {
        for (int pass = 0; pass < (m.is_glide() ? 2 : 1); ++pass) {
            Vector<T> y = pass ? apply_deck(m, deck_glide(m), x) : x;
            RegionPosition p = detail::box_position(b, y, margin...);
            if (p == RegionPosition::Inside) return p;
            if (p == RegionPosition::Boundary) boundary = true;
        }
    }
    return boundary ? RegionPosition::Boundary : RegionPosition::Outside;
}

/// h_alpha(x) = g~(x) - alpha f~(x) and its derivative.
struct Residual {
    const EquivariantLift& f;
    const EquivariantLift& g;
    DeckElement alpha;

    Vector<double> value(const Vector<double>& x) const {
        const FlatManifold& n = f.target();
        Vector<double> fx = apply_deck(n, alpha, f.evaluate(x));
        return g.evaluate(x) - fx;
    }

    Matrix<double> jacobian(const Vector<double>& x) const {
        auto diag = linear_diagonal(f.target(), alpha);
        return g.jacobian(x) - f.jacobian(x).row_scaled(diag);
    }

    Matrix<double> lipschitz() const {
        auto diag = linear_diagonal(f.target(), alpha);
        Matrix<double> l = convert_matrix<double>(g.linear() - f.linear().row_scaled(diag));
        for (auto i = 0u; i < l.rows(); ++i)
            for (auto j = 0u; j < l.cols(); ++j) l(i, j) = std::fabs(l(i, j));
        return l + f.perturbation_lipschitz() + g.perturbation_lipschitz();
    }
};

class CoincidenceSolver {
public:
    CoincidenceSolver(EquivariantLift f, EquivariantLift g, DomainMarker domain = DomainMarker::whole_manifold(),
                      SolverOptions options = {})
        : f_(std::move(f)), g_(std::move(g)), tc_(f_.hom(), g_.hom(), domain), options_(options) {
        if (!(f_.source() == g_.source()) || !(f_.target() == g_.target()))
            throw UnsupportedGroupPair("f and g must share source and target");
    }

    const TwistedConjugacy& conjugacy() const { return tc_; }
    const SolverOptions& options() const { return options_; }

    std::vector<CoincidenceRecord> solve(const OpenRegion& u) const {
        if (options_.exact && f_.is_affine() && g_.is_affine()) return finalize(find_affine(u));
        if (options_.exact && !(f_.is_affine() && g_.is_affine()))
            throw NielsenError("exact path needs affine lifts; use the numeric path for perturbed maps");
        return finalize(find_numeric(u));
    }

    /// Exact solutions; throws SingularPair when a singular difference
    /// matrix admits a continuum of solutions.
    std::vector<CoincidenceRecord> find_affine(const OpenRegion& u) const {
        std::vector<CoincidenceRecord> out;
        const FlatManifold& m = f_.source();
        const FlatManifold& n = f_.target();
        auto candidates = candidate_deck_elements(f_, g_, u);
        std::optional<Matrix<Rational>> inverse_by_eps[2];
        std::optional<Matrix<double>> inverse_double[2];
        bool computed[2] = {false, false};
        for (const auto& alpha : candidates) {
            auto [la, va] = compose_affine(n, alpha, f_);
            Matrix<Rational> delta = g_.linear() - la;
            Vector<Rational> rhs = va - g_.offset();
            if (!computed[alpha.eps]) {
                inverse_by_eps[alpha.eps] = inverse(delta);
                if (inverse_by_eps[alpha.eps]) inverse_double[alpha.eps] = convert_matrix<double>(*inverse_by_eps[alpha.eps]);
                computed[alpha.eps] = true;
            }
            const auto& inv = inverse_by_eps[alpha.eps];
            if (!inv) {
                if (is_consistent(delta, rhs))
                    throw SingularPair("L_g - A_alpha L_f is singular and the coincidence set for alpha = " +
                                       to_string(alpha) + " is not isolated; regularize the pair first");
                continue;
            }
            Vector<double> approx = *inverse_double[alpha.eps] * convert_vector<double>(rhs);
            bool near = true;
            for (double xi : approx) near = near && xi > -1e-6 && xi < 1 + 1e-6;
            if (!near) continue;
            Vector<Rational> x = *inv * rhs;
            if (!in_fundamental_domain(m, x)) continue;
            RegionPosition pos = region_position(m, u, x);
            if (pos == RegionPosition::Boundary)
                throw NotAdmissible("coincidence at " + format_vector(x) + " lies on the boundary of U");
            if (pos == RegionPosition::Outside) continue;
            CoincidenceRecord r;
            r.exact_point = x;
            r.point = convert_vector<double>(x);
            r.alpha = alpha;
            r.exact_jac = delta;
            r.jac_diff = convert_matrix<double>(delta);
            int s = sign_of(determinant(delta));
            r.regular = s != 0;
            r.lift_sign = s;
            out.push_back(std::move(r));
        }
        return out;
    }

    std::vector<CoincidenceRecord> find_numeric(const OpenRegion& u) const {
        std::vector<CoincidenceRecord> out;
        if (u.is_empty()) return out;
        const FlatManifold& m = f_.source();
        check_amplitude_cap(u);
        const auto box = fundamental_box(m);
        Vector<double> center(m.size()), radius(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            center[i] = (box[i].lo.get_d() + box[i].hi.get_d()) / 2;
            radius[i] = (box[i].hi.get_d() - box[i].lo.get_d()) / 2;
        }
        for (const auto& alpha : candidate_deck_elements(f_, g_, u)) {
            Residual h{f_, g_, alpha};
            const Matrix<double> lip = h.lipschitz();
            std::vector<Vector<double>> seeds;
            collect_cells(h, lip, center, radius, 0, seeds);
            for (const auto& seed : seeds) {
                auto root = newton(h, seed);
                if (!root) continue;
                // Snap onto half-integers so the glide cut picks a stable side.
                for (auto& x : *root) {
                    double half = std::round(2 * x) / 2;
                    if (std::fabs(x - half) < 1e-9) x = half;
                }
                // Move to the canonical lift; alpha changes by twisted conjugation.
                auto red = reduce_to_fundamental_domain(m, *root);
                DeckElement alpha0 = tc_.act(deck_inverse(m, red.deck), alpha);
                bool dup = false;
                for (const auto& r : out)
                    if (quotient_distance(m, r.point, red.point) < options_.dedup) dup = true;
                if (dup) continue;
                RegionPosition pos = region_position(m, u, red.point, options_.dedup);
                if (pos == RegionPosition::Boundary)
                    throw NotAdmissible("coincidence at " + format_vector(red.point) + " lies on the boundary of U");
                if (pos == RegionPosition::Outside) continue;
                CoincidenceRecord r;
                r.point = red.point;
                r.alpha = alpha0;
                Residual h0{f_, g_, alpha0};
                r.jac_diff = h0.jacobian(red.point);
                double det = determinant(r.jac_diff);
                r.regular = std::fabs(det) > options_.regularity;
                if (!r.regular && !options_.allow_irregular)
                    throw NonRegularPoint("det(Jg - A Jf) = " + std::to_string(det) + " at " + format_vector(red.point));
                r.lift_sign = r.regular ? (det > 0 ? 1 : -1) : 0;
                out.push_back(std::move(r));
            }
        }
        return out;
    }

    /// Attach class data and canonical ordering.
    std::vector<CoincidenceRecord> finalize(std::vector<CoincidenceRecord> records) const {
        const FlatManifold& m = f_.source();
        for (auto& r : records) {
            if (!tc_.domain().contains(m, r.point))
                throw DomainMismatch("coincidence at " + format_vector(r.point) + " lies outside the domain V");
            annotate(r);
        }
        std::sort(records.begin(), records.end(), [](const CoincidenceRecord& a, const CoincidenceRecord& b) {
            if (a.class_rep != b.class_rep) return a.class_rep < b.class_rep;
            return a.point < b.point;
        });
        return records;
    }

    void annotate(CoincidenceRecord& r) const {
        CanonicalForm c = tc_.canonicalize(r.alpha);
        r.class_rep = c.rep;
        r.degenerate = tc_.is_degenerate(r.alpha);
        r.aligned_sign = r.lift_sign * character(c.gamma, f_.source()) *
                         character(g_.hom().apply(c.gamma), f_.target());
    }

private:
    void check_amplitude_cap(const OpenRegion& u) const {
        if (f_.is_affine() && g_.is_affine()) return;
        const FlatManifold& n = f_.target();
        double amp = 0.0;
        auto bf = f_.perturbation_bound(), bg = g_.perturbation_bound();
        for (std::size_t i = 0; i < bf.size(); ++i) amp = std::max(amp, bf[i] + bg[i]);
        bool seen[2] = {false, false};
        for (const auto& alpha : candidate_deck_elements(f_, g_, u)) {
            if (seen[alpha.eps]) continue;
            seen[alpha.eps] = true;
            auto diag = linear_diagonal(n, alpha);
            Matrix<double> delta = convert_matrix<double>(g_.linear() - f_.linear().row_scaled(diag));
            double sigma = sigma_min_lower_bound(delta);
            if (sigma > 0 && amp > options_.amplitude_cap * sigma)
                throw PerturbationTooLarge("perturbation amplitude " + std::to_string(amp) + " exceeds " +
                                           std::to_string(options_.amplitude_cap) + " * sigma_min = " +
                                           std::to_string(options_.amplitude_cap * sigma));
        }
    }

    void collect_cells(const Residual& h, const Matrix<double>& lip, const Vector<double>& c, const Vector<double>& r,
                       int level, std::vector<Vector<double>>& seeds) const {
        Vector<double> v = h.value(c);
        for (std::size_t i = 0; i < v.size(); ++i) {
            double reach = 0.0;
            for (std::size_t j = 0; j < r.size(); ++j) reach += lip(i, j) * r[j];
            if (std::fabs(v[i]) > reach * (1 + 1e-12) + 1e-14) return;
        }
        if (level == options_.depth) {
            seeds.push_back(c);
            return;
        }
        const std::size_t dim = c.size();
        Vector<double> half = r;
        for (auto& x : half) x /= 2;
        for (std::size_t mask = 0; mask < (std::size_t{1} << dim); ++mask) {
            Vector<double> cc = c;
            for (std::size_t j = 0; j < dim; ++j) cc[j] += ((mask >> j) & 1) ? half[j] : -half[j];
            collect_cells(h, lip, cc, half, level + 1, seeds);
        }
    }

    std::optional<Vector<double>> newton(const Residual& h, Vector<double> x) const {
        double last = 0.0;
        for (int it = 0; it < 60; ++it) {
            Vector<double> v = h.value(x);
            double res = 0.0;
            for (double e : v) res = std::max(res, std::fabs(e));
            last = res;
            if (res < options_.tol) return polish(h, x, res);
            auto step = nielsen::solve(h.jacobian(x), v);
            if (!step) break;
            double len = 0.0;
            for (double s : *step) len = std::max(len, std::fabs(s));
            // Damp long steps so iterates stay near the seed cell.
            double scale = len > 0.25 ? 0.25 / len : 1.0;
            for (std::size_t i = 0; i < x.size(); ++i) x[i] -= scale * (*step)[i];
        }
        if (last < 1e-7) throw ToleranceNotMet("Newton stalled at residual " + std::to_string(last));
        return std::nullopt;
    }

    // Keep stepping while the residual keeps halving. Simple roots stop at
    // once; tangential ones walk onto the double root where det J vanishes.
    Vector<double> polish(const Residual& h, Vector<double> x, double res) const {
        for (int it = 0; it < 80 && res > 0.0; ++it) {
            auto step = nielsen::solve(h.jacobian(x), h.value(x));
            if (!step) break;
            Vector<double> y = x;
            for (std::size_t i = 0; i < y.size(); ++i) y[i] -= (*step)[i];
            double r = 0.0;
            for (double e : h.value(y)) r = std::max(r, std::fabs(e));
            if (!(r < 0.5 * res)) break;
            x = y;
            res = r;
        }
        return x;
    }

    EquivariantLift f_;
    EquivariantLift g_;
    TwistedConjugacy tc_;
    SolverOptions options_;
};

inline std::vector<CoincidenceRecord> find_coincidences_affine(const EquivariantLift& f, const EquivariantLift& g,
                                                               const OpenRegion& u,
                                                               const DomainMarker& v = DomainMarker::whole_manifold()) {
    if (!f.is_affine() || !g.is_affine()) throw NielsenError("find_coincidences_affine needs affine lifts");
    CoincidenceSolver s(f, g, v);
    return s.finalize(s.find_affine(u));
}

inline std::vector<CoincidenceRecord> find_coincidences_numeric(const EquivariantLift& f, const EquivariantLift& g,
                                                                const OpenRegion& u, double tol = 1e-10,
                                                                const DomainMarker& v = DomainMarker::whole_manifold(),
                                                                SolverOptions options = {}) {
    options.exact = false;
    options.tol = tol;
    CoincidenceSolver s(f, g, v, options);
    return s.finalize(s.find_numeric(u));
}

inline DeckElement class_of_point(const CoincidenceRecord& r, const EquivariantLift& f, const EquivariantLift& g,
                                  const DomainMarker& v = DomainMarker::whole_manifold()) {
    return TwistedConjugacy(f.hom(), g.hom(), v).canonical_rep(r.alpha);
}

/// The data of a record seen from the lift gamma x~ instead of x~.
struct LiftChange {
    DeckElement alpha;
    int lift_sign;
};

inline LiftChange change_lift(const CoincidenceRecord& r, const DeckElement& gamma, const EquivariantLift& f,
                              const EquivariantLift& g) {
    TwistedConjugacy tc(f.hom(), g.hom());
    return {tc.act(gamma, r.alpha),
            r.lift_sign * character(gamma, f.source()) * character(g.hom().apply(gamma), f.target())};
}

} // namespace nielsen
