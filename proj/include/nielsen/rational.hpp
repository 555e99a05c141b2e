#pragma once

// Exact scalars plus a small dense matrix template shared by the exact
// (Rational) and floating (double) computation paths.

#include <gmpxx.h>

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace nielsen {

using Integer = mpz_class;
using Rational = mpq_class;

template <typename T>
using Vector = std::vector<T>;

using IntVector = std::vector<std::int64_t>;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
    Rational r(Integer(static_cast<long>(num)), Integer(static_cast<long>(den)));
    r.canonicalize();
    return r;
}

/// Parses "p/q", "p", or a finite decimal such as "-0.25" into an exact rational.
inline std::optional<Rational> parse_rational(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    std::string s(text);
    if (s.empty()) return std::nullopt;
    auto valid_int = [](const std::string& part) {
        if (part.empty()) return false;
        std::size_t i = (part[0] == '-' || part[0] == '+') ? 1 : 0;
        if (i == part.size()) return false;
        for (; i < part.size(); ++i)
            if (part[i] < '0' || part[i] > '9') return false;
        return true;
    };
    auto strip_plus = [](std::string part) {
        if (!part.empty() && part[0] == '+') part.erase(0, 1);
        return part;
    };
    if (auto slash = s.find('/'); slash != std::string::npos) {
        std::string num = s.substr(0, slash), den = s.substr(slash + 1);
        if (!valid_int(num) || !valid_int(den)) return std::nullopt;
        Integer d(strip_plus(den));
        if (d == 0) return std::nullopt;
        Rational r(Integer(strip_plus(num)), d);
        r.canonicalize();
        return r;
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
        std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
        bool negative = !whole.empty() && whole[0] == '-';
        if (whole == "-" || whole == "+" || whole.empty()) whole += "0";
        if (!valid_int(whole) || frac.empty()) return std::nullopt;
        for (char c : frac)
            if (c < '0' || c > '9') return std::nullopt;
        Integer scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        Integer w(strip_plus(whole));
        Integer digits(frac);
        Integer num = abs(w) * scale + digits;
        if (negative) num = -num;
        Rational r(num, scale);
        r.canonicalize();
        return r;
    }
    if (!valid_int(s)) return std::nullopt;
    return Rational(Integer(strip_plus(s)));
}

inline std::string to_string(const Rational& r) {
    if (r.get_den() == 1) return r.get_num().get_str();
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline std::string to_string(const Integer& z) { return z.get_str(); }

inline Integer floor_integer(const Rational& r) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return q;
}

inline std::int64_t to_int64(const Integer& z) {
    if (!z.fits_slong_p()) throw NielsenError("integer overflow converting " + z.get_str());
    return static_cast<std::int64_t>(z.get_si());
}

inline std::int64_t floor_to_int(const Rational& r) { return to_int64(floor_integer(r)); }
inline std::int64_t floor_to_int(double x) { return static_cast<std::int64_t>(std::floor(x)); }

inline double to_double(const Rational& r) { return r.get_d(); }
inline double to_double(double x) { return x; }

/// Exact rational value of a finite double.
inline Rational exact_rational(double x) {
    Rational r(x);
    r.canonicalize();
    return r;
}

/// Smallest rational of the form p/2^bits that is >= x.
inline Rational rational_upper_bound(double x, int bits = 30) {
    double scale = std::ldexp(1.0, bits);
    Rational r(Integer(static_cast<long>(std::ceil(x * scale))), Integer(1) << bits);
    r.canonicalize();
    return r;
}

template <typename T>
T scalar_from_rational(const Rational& r) {
    if constexpr (std::is_same_v<T, Rational>) {
        return r;
    } else {
        return static_cast<T>(r.get_d());
    }
}

template <typename T>
int sign_of(const T& x) {
    if constexpr (std::is_same_v<T, Rational>) {
        return sgn(x);
    } else {
        return (x > 0) - (x < 0);
    }
}

template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        assert(data_.size() == rows_ * cols_);
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    static Matrix diagonal(const std::vector<int>& entries) {
        Matrix m(entries.size(), entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = T(entries[i]);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Vector<T> row(std::size_t i) const {
        return Vector<T>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
    }
    Vector<T> column(std::size_t j) const {
        Vector<T> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

    Matrix operator+(const Matrix& o) const {
        Matrix r(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] + o.data_[i];
        return r;
    }
    Matrix operator-(const Matrix& o) const {
        Matrix r(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] - o.data_[i];
        return r;
    }
    Matrix operator*(const Matrix& o) const {
        assert(cols_ == o.rows_);
        Matrix r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                if ((*this)(i, k) == 0) continue;
                for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += (*this)(i, k) * o(k, j);
            }
        return r;
    }
    Vector<T> operator*(const Vector<T>& v) const {
        assert(cols_ == v.size());
        Vector<T> r(rows_, T(0));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }
    Matrix scaled(const T& s) const {
        Matrix r = *this;
        for (auto& x : r.data_) x *= s;
        return r;
    }

    /// Left multiplication by diag(entries): scales row i.
    Matrix row_scaled(const std::vector<int>& entries) const {
        Matrix r = *this;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(i, j) *= T(entries[i]);
        return r;
    }

    const std::vector<T>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

template <typename To, typename From>
Matrix<To> convert_matrix(const Matrix<From>& m) {
    Matrix<To> r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if constexpr (std::is_same_v<From, Rational> && std::is_same_v<To, double>)
                r(i, j) = m(i, j).get_d();
            else
                r(i, j) = To(m(i, j));
        }
    return r;
}

template <typename To, typename From>
Vector<To> convert_vector(const Vector<From>& v) {
    Vector<To> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if constexpr (std::is_same_v<From, Rational> && std::is_same_v<To, double>)
            r[i] = v[i].get_d();
        else
            r[i] = To(v[i]);
    }
    return r;
}

template <typename T>
Vector<T> operator+(const Vector<T>& a, const Vector<T>& b) {
    Vector<T> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

template <typename T>
Vector<T> operator-(const Vector<T>& a, const Vector<T>& b) {
    Vector<T> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

namespace detail {

inline bool is_zero(const Rational& x) { return sgn(x) == 0; }
inline bool is_zero(double x) { return x == 0.0; }
inline double magnitude(const Rational& x) { return std::fabs(x.get_d()); }
inline double magnitude(double x) { return std::fabs(x); }

// Row-reduces `m` in place (partial pivoting by magnitude). Returns the
// pivot columns and the determinant sign flips via `swaps`.
template <typename T>
std::vector<std::size_t> eliminate(Matrix<T>& m, int& swaps, std::size_t pivot_cols) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    swaps = 0;
    for (std::size_t c = 0; c < pivot_cols && r < m.rows(); ++c) {
        std::size_t best = m.rows();
        double best_mag = 0.0;
        for (std::size_t i = r; i < m.rows(); ++i) {
            if (is_zero(m(i, c))) continue;
            double mag = magnitude(m(i, c));
            if (best == m.rows() || mag > best_mag) {
                best = i;
                best_mag = mag;
                if constexpr (std::is_same_v<T, Rational>) break;
            }
        }
        if (best == m.rows()) continue;
        if (best != r) {
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(r, j), m(best, j));
            ++swaps;
        }
        for (std::size_t i = r + 1; i < m.rows(); ++i) {
            if (is_zero(m(i, c))) continue;
            T factor = m(i, c) / m(r, c);
            for (std::size_t j = c; j < m.cols(); ++j) m(i, j) -= factor * m(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

} // namespace detail

template <typename T>
T determinant(Matrix<T> m) {
    assert(m.rows() == m.cols());
    int swaps = 0;
    auto pivots = detail::eliminate(m, swaps, m.cols());
    if (pivots.size() < m.rows()) return T(0);
    T det(1);
    for (std::size_t i = 0; i < m.rows(); ++i) det *= m(i, i);
    return (swaps % 2) ? T(-det) : det;
}

template <typename T>
std::size_t rank(Matrix<T> m) {
    int swaps = 0;
    return detail::eliminate(m, swaps, m.cols()).size();
}

/// Solves a square nonsingular system; nullopt when singular.
template <typename T>
std::optional<Vector<T>> solve(const Matrix<T>& a, const Vector<T>& b) {
    const std::size_t n = a.rows();
    Matrix<T> aug(n, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
        aug(i, n) = b[i];
    }
    int swaps = 0;
    auto pivots = detail::eliminate(aug, swaps, n);
    if (pivots.size() < n) return std::nullopt;
    Vector<T> x(n, T(0));
    for (std::size_t ii = n; ii-- > 0;) {
        T acc = aug(ii, n);
        for (std::size_t j = ii + 1; j < n; ++j) acc -= aug(ii, j) * x[j];
        x[ii] = acc / aug(ii, ii);
    }
    return x;
}

template <typename T>
std::optional<Matrix<T>> inverse(const Matrix<T>& a) {
    const std::size_t n = a.rows();
    Matrix<T> inv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        Vector<T> e(n, T(0));
        e[j] = T(1);
        auto col = solve(a, e);
        if (!col) return std::nullopt;
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = (*col)[i];
    }
    return inv;
}

/// True iff a·x = b has a solution (ranks of A and [A|b] agree).
inline bool is_consistent(const Matrix<Rational>& a, const Vector<Rational>& b) {
    Matrix<Rational> aug(a.rows(), a.cols() + 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
        aug(i, a.cols()) = b[i];
    }
    return rank(a) == rank(aug);
}

/// Smallest singular value estimate via the inverse's induced 1/inf norms.
/// Returns a lower bound on sigma_min (0 for singular input).
inline double sigma_min_lower_bound(const Matrix<double>& a) {
    auto inv = inverse(a);
    if (!inv) return 0.0;
    double norm1 = 0.0, norm_inf = 0.0;
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::fabs((*inv)(i, j));
        norm1 = std::max(norm1, s);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += std::fabs((*inv)(i, j));
        norm_inf = std::max(norm_inf, s);
    }
    double norm2_bound = std::sqrt(norm1 * norm_inf);
    return norm2_bound > 0 ? 1.0 / norm2_bound : 0.0;
}

template <typename T>
std::string format_vector(const Vector<T>& v, const char* sep = " ") {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << sep;
        if constexpr (std::is_same_v<T, Rational>)
            os << to_string(v[i]);
        else
            os << v[i];
    }
    return os.str();
}

} // namespace nielsen
