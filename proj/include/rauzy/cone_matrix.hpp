#pragma once

#include "arith.hpp"

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rauzy {

// Square matrix of nonnegative big integers; indices are 1-based in the accessors.
class ConeMatrix {
public:
    ConeMatrix() = default;
    explicit ConeMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n) {
        if (n < 1) throw std::invalid_argument("matrix dimension must be positive");
    }
    ConeMatrix(std::initializer_list<std::initializer_list<long>> rows) : ConeMatrix(static_cast<int>(rows.size())) {
        int i = 1;
        for (const auto& r : rows) {
            if (static_cast<int>(r.size()) != n_) throw std::invalid_argument("matrix must be square");
            int j = 1;
            for (long v : r) set(i, j++, Int(v));
            ++i;
        }
    }

    static ConeMatrix identity(int n) {
        ConeMatrix m(n);
        for (int i = 1; i <= n; ++i) m.set(i, i, 1);
        return m;
    }

    static ConeMatrix from_rows(const std::vector<std::vector<Int>>& rows) {
        ConeMatrix m(static_cast<int>(rows.size()));
        for (int i = 1; i <= m.n_; ++i) {
            if (static_cast<int>(rows[i - 1].size()) != m.n_) throw std::invalid_argument("matrix must be square");
            for (int j = 1; j <= m.n_; ++j) m.set(i, j, rows[i - 1][j - 1]);
        }
        return m;
    }

    int size() const { return n_; }
    const Int& operator()(int i, int j) const { return a_[idx(i, j)]; }
    void set(int i, int j, Int v) {
        if (v < 0) throw std::invalid_argument("cone matrices are nonnegative");
        a_[idx(i, j)] = std::move(v);
    }

    std::vector<Int> column(int j) const {
        std::vector<Int> c(n_);
        for (int i = 1; i <= n_; ++i) c[i - 1] = (*this)(i, j);
        return c;
    }
    Int column_norm(int j) const {
        Int s = 0;
        for (int i = 1; i <= n_; ++i) s += (*this)(i, j);
        return s;
    }
    std::vector<std::vector<Int>> rows() const {
        std::vector<std::vector<Int>> r(n_, std::vector<Int>(n_));
        for (int i = 1; i <= n_; ++i)
            for (int j = 1; j <= n_; ++j) r[i - 1][j - 1] = (*this)(i, j);
        return r;
    }
    int zero_count() const {
        return static_cast<int>(std::count_if(a_.begin(), a_.end(), [](const Int& v) { return v == 0; }));
    }
    // 0/1 pattern of the nonzero entries
    std::vector<bool> support() const {
        std::vector<bool> s(a_.size());
        for (std::size_t k = 0; k < a_.size(); ++k) s[k] = a_[k] != 0;
        return s;
    }

    std::vector<Int> apply(const std::vector<Int>& v) const {
        if (static_cast<int>(v.size()) != n_) throw std::invalid_argument("vector dimension mismatch");
        std::vector<Int> out(n_);
        for (int i = 1; i <= n_; ++i) {
            Int s = 0;
            for (int j = 1; j <= n_; ++j)
                if ((*this)(i, j) != 0) s += (*this)(i, j) * v[j - 1];
            out[i - 1] = s;
        }
        return out;
    }
    std::vector<Rational> apply(const std::vector<Rational>& v) const {
        if (static_cast<int>(v.size()) != n_) throw std::invalid_argument("vector dimension mismatch");
        std::vector<Rational> out(n_);
        for (int i = 1; i <= n_; ++i) {
            Rational s = 0;
            for (int j = 1; j <= n_; ++j)
                if ((*this)(i, j) != 0) s += Rational((*this)(i, j)) * v[j - 1];
            out[i - 1] = s;
        }
        return out;
    }

    std::string str() const {
        std::string out;
        for (int i = 1; i <= n_; ++i) {
            if (i > 1) out += " / ";
            for (int j = 1; j <= n_; ++j) {
                if (j > 1) out += ' ';
                out += (*this)(i, j).str();
            }
        }
        return out;
    }

    friend bool operator==(const ConeMatrix&, const ConeMatrix&) = default;

private:
    std::size_t idx(int i, int j) const {
        if (i < 1 || i > n_ || j < 1 || j > n_) throw std::out_of_range("matrix index out of range");
        return static_cast<std::size_t>(i - 1) * n_ + (j - 1);
    }
    int n_ = 0;
    std::vector<Int> a_;
};

inline ConeMatrix multiply(const ConeMatrix& A, const ConeMatrix& B) {
    if (A.size() != B.size()) throw std::invalid_argument("dimension mismatch in multiply");
    const int n = A.size();
    ConeMatrix C(n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            Int s = 0;
            for (int k = 1; k <= n; ++k)
                if (A(i, k) != 0 && B(k, j) != 0) s += A(i, k) * B(k, j);
            C.set(i, j, std::move(s));
        }
    return C;
}

inline ConeMatrix operator*(const ConeMatrix& A, const ConeMatrix& B) { return multiply(A, B); }

inline ConeMatrix power(const ConeMatrix& A, unsigned k) {
    ConeMatrix r = ConeMatrix::identity(A.size());
    for (unsigned i = 0; i < k; ++i) r = r * A;
    return r;
}

// Signed determinant by cofactor expansion over exact integers (n is small).
inline Int determinant(const ConeMatrix& A) {
    const int n = A.size();
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[i][j] = Rational(A(i + 1, j + 1));
    Rational det = 1;
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int r = c; r < n; ++r)
            if (m[r][c] != 0) {
                piv = r;
                break;
            }
        if (piv < 0) return 0;
        if (piv != c) {
            std::swap(m[piv], m[c]);
            det = -det;
        }
        det *= m[c][c];
        for (int r = c + 1; r < n; ++r) {
            if (m[r][c] == 0) continue;
            Rational f = m[r][c] / m[c][c];
            for (int k = c; k < n; ++k) m[r][k] -= f * m[c][k];
        }
    }
    return numerator(det);
}

// Exact solution of A x = b for invertible A.
inline std::vector<Rational> solve(const ConeMatrix& A, const std::vector<Rational>& b) {
    const int n = A.size();
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n + 1));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m[i][j] = Rational(A(i + 1, j + 1));
        m[i][n] = b[i];
    }
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int r = c; r < n; ++r)
            if (m[r][c] != 0) {
                piv = r;
                break;
            }
        if (piv < 0) throw std::invalid_argument("singular matrix in solve");
        std::swap(m[piv], m[c]);
        for (int r = 0; r < n; ++r) {
            if (r == c || m[r][c] == 0) continue;
            Rational f = m[r][c] / m[c][c];
            for (int k = c; k <= n; ++k) m[r][k] -= f * m[c][k];
        }
    }
    std::vector<Rational> x(n);
    for (int i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
    return x;
}

inline std::ostream& operator<<(std::ostream& os, const ConeMatrix& m) { return os << m.str(); }

}  // namespace rauzy
