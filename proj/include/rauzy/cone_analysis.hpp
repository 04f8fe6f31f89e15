#pragma once

#include "arith.hpp"
#include "cone_matrix.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rauzy {

struct CombiningClassification {
    bool combining = false;
    std::vector<int> active;
    std::vector<int> passive;
    std::optional<int> idle;
    std::string failure_reason;
};

// Column i is added to column j when entry (i, j) is positive.
inline CombiningClassification classify_combining(const ConeMatrix& A) {
    const int n = A.size();
    auto added = [&](int i, int j) { return A(i, j) != 0; };
    std::string first_reason;
    for (int size = n; size >= 2; --size) {
        // subsets of the given size in lexicographic order
        std::vector<int> pick(size);
        for (int i = 0; i < size; ++i) pick[i] = i + 1;
        while (true) {
            std::vector<bool> in(n + 1, false);
            for (int c : pick) in[c] = true;
            bool mutual = true;
            for (int i : pick)
                for (int j : pick)
                    if (i != j && !added(i, j)) mutual = false;
            if (mutual) {
                std::string reason;
                for (int i = 1; i <= n && reason.empty(); ++i) {
                    if (in[i]) continue;
                    for (int j = 1; j <= n; ++j)
                        if (j != i && added(i, j)) {
                            reason = "column " + std::to_string(i) + " is added to column " + std::to_string(j) +
                                     " but is not active";
                            break;
                        }
                }
                CombiningClassification c;
                c.active = pick;
                std::vector<int> idle;
                for (int j = 1; j <= n; ++j) {
                    if (in[j]) continue;
                    bool receives = std::any_of(pick.begin(), pick.end(), [&](int i) { return added(i, j); });
                    (receives ? c.passive : idle).push_back(j);
                }
                if (reason.empty() && idle.size() > 1)
                    reason = "more than one column receives no active column";
                if (reason.empty()) {
                    c.combining = true;
                    if (!idle.empty()) c.idle = idle.front();
                    return c;
                }
                if (first_reason.empty()) first_reason = reason;
            }
            int k = size - 1;
            while (k >= 0 && pick[k] == n - (size - 1 - k)) --k;
            if (k < 0) break;
            ++pick[k];
            for (int t = k + 1; t < size; ++t) pick[t] = pick[t - 1] + 1;
        }
    }
    CombiningClassification c;
    c.failure_reason = first_reason.empty() ? "no two columns are added to each other" : first_reason;
    return c;
}

struct AlmostPositiveVerdict {
    bool almost_positive = false;
    int tau = 0;
};

inline AlmostPositiveVerdict is_almost_positive(const ConeMatrix& A) {
    const int n = A.size();
    AlmostPositiveVerdict v;
    bool others_ok = true;
    for (int i = 1; i <= n; ++i) {
        int zeros = 0, ones = 0;
        for (int j = 1; j <= n; ++j) {
            if (A(i, j) == 0) ++zeros;
            else if (A(i, j) == 1) ++ones;
        }
        if (zeros == 0) ++v.tau;
        else if (!(zeros == n - 1 && ones == 1)) others_ok = false;
    }
    v.almost_positive = others_ok && v.tau > 1;
    return v;
}

inline bool is_weakly_positive(const ConeMatrix& A) { return A.zero_count() <= 1; }

inline bool is_positive(const ConeMatrix& A) { return A.zero_count() == 0; }

struct PfResult {
    std::vector<Int> vector;  // unnormalized iterate
    int iterations = 0;
    Rational last_change;  // 1-norm change between the last two normalized iterates

    std::vector<Rational> normalized() const {
        Int s = 0;
        for (const auto& x : vector) s += x;
        std::vector<Rational> out;
        for (const auto& x : vector) out.emplace_back(x, s);
        return out;
    }
};

inline unsigned bits_for_tolerance(const Rational& tol) {
    if (tol <= 0 || tol >= 1) throw std::invalid_argument("tolerance must lie in (0,1)");
    Int q = denominator(tol) / numerator(tol);
    return static_cast<unsigned>(msb(q)) + 1;
}

inline Rational l1_distance_normalized(const std::vector<Int>& x, const std::vector<Int>& y) {
    Int sx = 0, sy = 0;
    for (const auto& v : x) sx += v;
    for (const auto& v : y) sy += v;
    Int acc = 0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += abs(x[i] * sy - y[i] * sx);
    return Rational(acc, sx * sy);
}

// Coordinates where the Perron-Frobenius direction is nonzero: those whose row
// graph reaches a strongly connected class of maximal spectral radius.
inline std::vector<bool> pf_support(const ConeMatrix& A) {
    const int n = A.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) {
        reach[i][i] = true;
        for (int j = 0; j < n; ++j)
            if (A(i + 1, j + 1) != 0) reach[i][j] = true;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (reach[i][k])
                for (int j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = true;
    // growth exponent of each class from the 64th power of its diagonal block
    std::vector<int> cls(n, -1);
    std::vector<double> growth;
    for (int i = 0; i < n; ++i) {
        if (cls[i] >= 0) continue;
        std::vector<int> members;
        for (int j = 0; j < n; ++j)
            if (reach[i][j] && reach[j][i]) members.push_back(j), cls[j] = static_cast<int>(growth.size());
        const int m = static_cast<int>(members.size());
        ConeMatrix B(m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) B.set(a + 1, b + 1, A(members[a] + 1, members[b] + 1));
        for (int sq = 0; sq < 6; ++sq) B = B * B;
        Int total = 0;
        for (int a = 1; a <= m; ++a) total += B.column_norm(a);
        growth.push_back(total == 0 ? -1.0 : static_cast<double>(msb(total)) / 64.0);
    }
    const double top = *std::max_element(growth.begin(), growth.end());
    std::vector<bool> support(n, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (reach[i][j] && growth[cls[j]] > top - 0.1) support[i] = true;
    return support;
}

// Power iteration on the cone; iterates are kept as integer vectors and
// truncated to a working precision tied to the tolerance.
inline PfResult pf_direction(const ConeMatrix& A, const Rational& tol, int max_iterations = 20000) {
    const int n = A.size();
    const unsigned keep = bits_for_tolerance(tol) + 64;
    std::vector<Int> v(n, Int(1));
    for (int it = 1; it <= max_iterations; ++it) {
        std::vector<Int> w = A.apply(v);
        Int mx = *std::max_element(w.begin(), w.end());
        if (mx == 0) throw std::runtime_error("power iteration collapsed to zero");
        unsigned top = static_cast<unsigned>(msb(mx));
        if (top > keep) {
            unsigned sh = top - keep;
            for (auto& x : w) x >>= sh;
        }
        Rational change = l1_distance_normalized(v, w);
        v = std::move(w);
        if (change < tol) {
            const auto support = pf_support(A);
            for (int i = 0; i < n; ++i)
                if (!support[i]) v[i] = 0;
            return PfResult{v, it, change};
        }
    }
    throw std::runtime_error("power iteration did not converge; matrix is not primitive on its dominant block");
}

// sin^2 of the angle between u and v, exactly.
inline Rational sin2_angle(const std::vector<Int>& u, const std::vector<Int>& v) {
    Int uu = 0, vv = 0, uv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uu += u[i] * u[i];
        vv += v[i] * v[i];
        uv += u[i] * v[i];
    }
    if (uu == 0 || vv == 0) throw std::invalid_argument("angle with a zero vector");
    return Rational(uu * vv - uv * uv, uu * vv);
}

inline double sin_angle(const std::vector<Int>& u, const std::vector<Int>& v, unsigned precision_bits = 128) {
    return sqrt_to_double(sin2_angle(u, v), precision_bits);
}

struct ContractionDiagnostics {
    double max_sin_angle = 0;
    Rational ratio_max_to_second_smallest = 1;
    double projective_diameter = 0;
    unsigned precision_bits = 128;
};

inline ContractionDiagnostics contraction_diagnostics(const ConeMatrix& A, unsigned precision_bits = 128) {
    const int n = A.size();
    std::vector<std::vector<Int>> cols;
    std::vector<Int> norms;
    for (int j = 1; j <= n; ++j) {
        cols.push_back(A.column(j));
        norms.push_back(A.column_norm(j));
        if (norms.back() == 0) throw std::invalid_argument("zero column in contraction_diagnostics");
    }
    ContractionDiagnostics d;
    d.precision_bits = precision_bits;
    Rational max_sin2 = 0, max_diam = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            max_sin2 = std::max(max_sin2, sin2_angle(cols[i], cols[j]));
            max_diam = std::max(max_diam, l1_distance_normalized(cols[i], cols[j]));
        }
    d.max_sin_angle = sqrt_to_double(max_sin2, precision_bits);
    d.projective_diameter = to_double(max_diam);
    // ties resolved towards the smaller index
    int cmax = 0;
    for (int j = 1; j < n; ++j)
        if (norms[j] > norms[cmax]) cmax = j;
    std::vector<int> order(n);
    for (int j = 0; j < n; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return norms[x] < norms[y]; });
    int cu = n > 1 ? order[1] : order[0];
    d.ratio_max_to_second_smallest = Rational(norms[cmax], norms[cu]);
    return d;
}

}  // namespace rauzy
