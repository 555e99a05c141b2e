#pragma once

// Integer lattice toolkit: Smith normal form with unimodular transforms,
// row-style Hermite bases for canonical coset representatives, and
// integer linear system solving.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rational.hpp"

namespace nielsen {

using IntMatrix = Matrix<Integer>;

namespace detail {

// Floor division for mpz.
inline Integer floor_div(const Integer& a, const Integer& b) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline void swap_rows(IntMatrix& m, std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(a, j), m(b, j));
}

inline void swap_cols(IntMatrix& m, std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t i = 0; i < m.rows(); ++i) std::swap(m(i, a), m(i, b));
}

// row_a <- p*row_a + q*row_b ; row_b <- r*row_a + s*row_b (old values)
inline void combine_rows(IntMatrix& m, std::size_t a, std::size_t b, const Integer& p, const Integer& q,
                         const Integer& r, const Integer& s) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
        Integer x = m(a, j), y = m(b, j);
        m(a, j) = p * x + q * y;
        m(b, j) = r * x + s * y;
    }
}

inline void combine_cols(IntMatrix& m, std::size_t a, std::size_t b, const Integer& p, const Integer& q,
                         const Integer& r, const Integer& s) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Integer x = m(i, a), y = m(i, b);
        m(i, a) = p * x + q * y;
        m(i, b) = r * x + s * y;
    }
}

// Extended gcd: g = p*a + q*b with g >= 0.
inline void extended_gcd(const Integer& a, const Integer& b, Integer& g, Integer& p, Integer& q) {
    if (a != 0 && b % a == 0) {
        g = abs(a);
        p = sgn(a);
        q = 0;
        return;
    }
    mpz_gcdext(g.get_mpz_t(), p.get_mpz_t(), q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
}

} // namespace detail

/// left * input * right == diag, with left/right unimodular and the
/// nonzero diagonal entries positive, each dividing the next.
struct SmithForm {
    IntMatrix left;
    IntMatrix diag;
    IntMatrix right;

    std::size_t rank() const {
        std::size_t r = 0;
        for (std::size_t i = 0; i < std::min(diag.rows(), diag.cols()); ++i)
            if (diag(i, i) != 0) ++r;
        return r;
    }

    std::vector<Integer> invariant_factors() const {
        std::vector<Integer> out;
        for (std::size_t i = 0; i < std::min(diag.rows(), diag.cols()); ++i)
            if (diag(i, i) != 0) out.push_back(diag(i, i));
        return out;
    }
};

inline SmithForm smith_normal_form(const IntMatrix& input) {
    const std::size_t m = input.rows(), n = input.cols();
    SmithForm sf{IntMatrix::identity(m), input, IntMatrix::identity(n)};
    IntMatrix& a = sf.diag;
    const std::size_t limit = std::min(m, n);

    for (std::size_t t = 0; t < limit; ++t) {
        // Choose the nonzero entry of least magnitude in the trailing block.
        bool restart = true;
        while (restart) {
            restart = false;
            std::size_t pi = m, pj = n;
            for (std::size_t i = t; i < m; ++i)
                for (std::size_t j = t; j < n; ++j)
                    if (a(i, j) != 0 && (pi == m || abs(a(i, j)) < abs(a(pi, pj)))) {
                        pi = i;
                        pj = j;
                    }
            if (pi == m) return sf; // trailing block is zero
            detail::swap_rows(a, t, pi);
            detail::swap_rows(sf.left, t, pi);
            detail::swap_cols(a, t, pj);
            detail::swap_cols(sf.right, t, pj);

            // Clear column t below the pivot.
            for (std::size_t i = t + 1; i < m; ++i) {
                if (a(i, t) == 0) continue;
                Integer g, p, q;
                detail::extended_gcd(a(t, t), a(i, t), g, p, q);
                Integer at = a(t, t) / g, ai = a(i, t) / g;
                detail::combine_rows(a, t, i, p, q, -ai, at);
                detail::combine_rows(sf.left, t, i, p, q, -ai, at);
            }
            // Clear row t right of the pivot.
            for (std::size_t j = t + 1; j < n; ++j) {
                if (a(t, j) == 0) continue;
                Integer g, p, q;
                detail::extended_gcd(a(t, t), a(t, j), g, p, q);
                Integer at = a(t, t) / g, aj = a(t, j) / g;
                detail::combine_cols(a, t, j, p, q, -aj, at);
                detail::combine_cols(sf.right, t, j, p, q, -aj, at);
            }
            for (std::size_t i = t + 1; i < m; ++i)
                if (a(i, t) != 0) restart = true;
            if (restart) continue;
            // Divisibility: pivot must divide every trailing entry.
            for (std::size_t i = t + 1; i < m && !restart; ++i)
                for (std::size_t j = t + 1; j < n; ++j)
                    if (a(i, j) % a(t, t) != 0) {
                        // Fold row i into row t and redo.
                        for (std::size_t k = 0; k < n; ++k) a(t, k) += a(i, k);
                        for (std::size_t k = 0; k < m; ++k) sf.left(t, k) += sf.left(i, k);
                        restart = true;
                        break;
                    }
        }
        if (a(t, t) < 0) {
            for (std::size_t k = 0; k < n; ++k) a(t, k) = -a(t, k);
            for (std::size_t k = 0; k < m; ++k) sf.left(t, k) = -sf.left(t, k);
        }
    }
    return sf;
}

/// Integer solution of a·x = b, or nullopt if none exists.
inline std::optional<Vector<Integer>> solve_integer(const IntMatrix& a, const Vector<Integer>& b) {
    SmithForm sf = smith_normal_form(a);
    Vector<Integer> ub = sf.left * b;
    Vector<Integer> y(a.cols(), Integer(0));
    for (std::size_t i = 0; i < ub.size(); ++i) {
        Integer d = i < std::min(a.rows(), a.cols()) ? sf.diag(i, i) : Integer(0);
        if (d == 0) {
            if (ub[i] != 0) return std::nullopt;
            continue;
        }
        if (ub[i] % d != 0) return std::nullopt;
        y[i] = ub[i] / d;
    }
    return sf.right * y;
}

/// Row-echelon Hermite basis of the lattice spanned by a set of generators
/// in Z^dim. Pivot entries are positive and entries above each pivot are
/// reduced into [0, pivot).
class HermiteBasis {
public:
    HermiteBasis() = default;

    HermiteBasis(const std::vector<Vector<Integer>>& generators, std::size_t dim) : dim_(dim) {
        IntMatrix m(generators.size(), dim);
        for (std::size_t i = 0; i < generators.size(); ++i)
            for (std::size_t j = 0; j < dim; ++j) m(i, j) = generators[i][j];
        std::size_t r = 0;
        for (std::size_t c = 0; c < dim && r < m.rows(); ++c) {
            // gcd-combine all rows below r into row r at column c.
            for (std::size_t i = r + 1; i < m.rows(); ++i) {
                if (m(i, c) == 0) continue;
                if (m(r, c) == 0) {
                    detail::swap_rows(m, r, i);
                    continue;
                }
                Integer g, p, q;
                detail::extended_gcd(m(r, c), m(i, c), g, p, q);
                Integer ar = m(r, c) / g, ai = m(i, c) / g;
                detail::combine_rows(m, r, i, p, q, -ai, ar);
            }
            if (m(r, c) == 0) continue;
            if (m(r, c) < 0)
                for (std::size_t j = 0; j < dim; ++j) m(r, j) = -m(r, j);
            for (std::size_t i = 0; i < r; ++i) {
                Integer q = detail::floor_div(m(i, c), m(r, c));
                if (q != 0)
                    for (std::size_t j = 0; j < dim; ++j) m(i, j) -= q * m(r, j);
            }
            pivots_.push_back(c);
            ++r;
        }
        for (std::size_t i = 0; i < r; ++i) rows_.push_back(m.row(i));
    }

    std::size_t dim() const { return dim_; }
    std::size_t rank() const { return rows_.size(); }
    bool full_rank() const { return rows_.size() == dim_; }
    const std::vector<std::size_t>& pivots() const { return pivots_; }
    const std::vector<Vector<Integer>>& rows() const { return rows_; }

    /// |Z^dim / lattice| when full rank.
    Integer index() const {
        Integer prod = 1;
        for (std::size_t i = 0; i < rows_.size(); ++i) prod *= rows_[i][pivots_[i]];
        return prod;
    }

    /// Canonical coset representative: pivot coordinates land in [0, pivot).
    Vector<Integer> reduce(Vector<Integer> k) const {
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const std::size_t p = pivots_[i];
            Integer q = detail::floor_div(k[p], rows_[i][p]);
            if (q != 0)
                for (std::size_t j = 0; j < dim_; ++j) k[j] -= q * rows_[i][j];
        }
        return k;
    }

    bool contains(const Vector<Integer>& v) const {
        Vector<Integer> r = reduce(v);
        for (const auto& x : r)
            if (x != 0) return false;
        return true;
    }

    /// Every canonical coset representative (full-rank lattices only).
    std::vector<Vector<Integer>> enumerate_cosets() const {
        std::vector<Vector<Integer>> out;
        if (!full_rank()) return out;
        Vector<Integer> k(dim_, Integer(0));
        std::vector<Integer> bounds(dim_);
        for (std::size_t i = 0; i < rows_.size(); ++i) bounds[pivots_[i]] = rows_[i][pivots_[i]];
        while (true) {
            out.push_back(k);
            std::size_t j = 0;
            for (; j < dim_; ++j) {
                k[j] += 1;
                if (k[j] < bounds[j]) break;
                k[j] = 0;
            }
            if (j == dim_) break;
        }
        return out;
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::size_t> pivots_;
    std::vector<Vector<Integer>> rows_;
};

inline Vector<Integer> to_integer_vector(const IntVector& v) {
    Vector<Integer> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = Integer(static_cast<long>(v[i]));
    return r;
}

inline IntVector to_int_vector(const Vector<Integer>& v) {
    IntVector r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = to_int64(v[i]);
    return r;
}

} // namespace nielsen
