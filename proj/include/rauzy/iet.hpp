#pragma once

#include "arith.hpp"
#include "cone_matrix.hpp"
#include "permutation.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rauzy {

class LengthVector {
public:
    LengthVector() = default;
    explicit LengthVector(std::vector<Rational> entries) : e_(std::move(entries)) {
        if (e_.empty()) throw std::invalid_argument("length vector is empty");
        Rational s = 0;
        for (const auto& x : e_) {
            if (x < 0) throw std::invalid_argument("lengths must be nonnegative");
            s += x;
        }
        if (s == 0) throw std::invalid_argument("length vector has zero total length");
    }
    static LengthVector from_integers(const std::vector<Int>& v) {
        std::vector<Rational> r;
        for (const auto& x : v) r.emplace_back(x);
        return LengthVector(std::move(r));
    }

    int size() const { return static_cast<int>(e_.size()); }
    const Rational& operator[](int i) const { return e_[i - 1]; }  // 1-based
    const std::vector<Rational>& entries() const { return e_; }
    Rational total() const {
        Rational s = 0;
        for (const auto& x : e_) s += x;
        return s;
    }
    std::vector<Rational> normalized() const {
        Rational s = total();
        std::vector<Rational> out;
        for (const auto& x : e_) out.push_back(x / s);
        return out;
    }
    int zero_count() const {
        return static_cast<int>(std::count_if(e_.begin(), e_.end(), [](const Rational& x) { return x == 0; }));
    }
    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < e_.size(); ++i) {
            if (i) out += ',';
            out += to_string(e_[i]);
        }
        return out;
    }
    friend bool operator==(const LengthVector&, const LengthVector&) = default;

private:
    std::vector<Rational> e_;
};

struct IET {
    LengthVector lengths;
    Permutation perm;

    IET(LengthVector l, Permutation p) : lengths(std::move(l)), perm(std::move(p)) {
        if (lengths.size() != perm.size()) throw std::invalid_argument("length vector and permutation differ in size");
    }

    int size() const { return perm.size(); }

    // "(4321) 1/4,1/4,1/4,1/4"
    static IET parse(const std::string& text) {
        auto close = text.find(')');
        if (close == std::string::npos) throw std::invalid_argument("IET literal needs a permutation: " + text);
        Permutation p = Permutation::parse(text.substr(0, close + 1));
        std::string rest = text.substr(close + 1);
        std::vector<Rational> v;
        std::stringstream ss(rest);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.find_first_not_of(" \t") == std::string::npos) continue;
            v.push_back(parse_rational(tok));
        }
        return IET(LengthVector(std::move(v)), std::move(p));
    }
    std::string str() const { return perm.str() + " " + lengths.str(); }
};

// Start of interval I_j and of its image slot.
inline Rational interval_start(const IET& T, int j) {
    Rational s = 0;
    for (int k = 1; k < j; ++k) s += T.lengths[k];
    return s;
}
inline Rational image_start(const IET& T, int j) {
    Rational s = 0;
    for (int k = 1; k <= T.size(); ++k)
        if (T.perm.pi(k) < T.perm.pi(j)) s += T.lengths[k];
    return s;
}

inline Rational evaluate(const IET& T, const Rational& x) {
    const Rational total = T.lengths.total();
    if (x < 0 || x >= total) throw std::invalid_argument("point outside the domain of the IET");
    Rational start = 0;
    for (int j = 1; j <= T.size(); ++j) {
        const Rational& l = T.lengths[j];
        if (l > 0 && x < start + l) return x - start + image_start(T, j);
        start += l;
    }
    throw std::logic_error("evaluate: point not located");
}

inline Rational evaluate_inverse(const IET& T, const Rational& y) {
    const Rational total = T.lengths.total();
    if (y < 0 || y >= total) throw std::invalid_argument("point outside the range of the IET");
    Rational start = 0;
    for (int k = 1; k <= T.size(); ++k) {
        int j = T.perm.at(k);
        const Rational& l = T.lengths[j];
        if (l > 0 && y < start + l) return y - start + interval_start(T, j);
        start += l;
    }
    throw std::logic_error("evaluate_inverse: point not located");
}

inline IET induce_first_return(const IET& T, const Rational& cut, long step_cap = 1000000) {
    const Rational total = T.lengths.total();
    if (cut <= 0 || cut > total) throw std::invalid_argument("cut point must lie in (0, total length]");
    if (cut == total) return T;
    std::vector<Rational> seeds;
    {
        Rational s = 0;
        for (int j = 1; j <= T.size(); ++j) {
            if (T.lengths[j] == 0) continue;
            if (s > 0) seeds.push_back(s);
            s += T.lengths[j];
        }
    }
    seeds.push_back(cut);
    std::vector<Rational> cuts{Rational(0)};
    long budget = step_cap;
    for (const Rational& z : seeds) {
        Rational y = z;
        if (y < cut) {
            cuts.push_back(y);
            continue;
        }
        do {
            if (--budget < 0) throw std::runtime_error("induce_first_return: step cap exceeded (input may be non-minimal)");
            y = evaluate_inverse(T, y);
        } while (y >= cut);
        cuts.push_back(y);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    struct Piece {
        Rational start, length, shift;
    };
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        Rational a = cuts[i];
        Rational b = i + 1 < cuts.size() ? cuts[i + 1] : cut;
        Rational y = evaluate(T, a);
        while (y >= cut) {
            if (--budget < 0) throw std::runtime_error("induce_first_return: step cap exceeded (input may be non-minimal)");
            y = evaluate(T, y);
        }
        Rational shift = y - a;
        pieces.push_back({a, b - a, shift});
    }
    std::vector<int> order(pieces.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        return pieces[x].start + pieces[x].shift < pieces[y].start + pieces[y].shift;
    });
    std::vector<int> images;
    for (int i : order) images.push_back(i + 1);
    std::vector<Rational> lens;
    for (const auto& p : pieces) lens.push_back(p.length);
    return IET(LengthVector(std::move(lens)), Permutation(std::move(images)));
}

inline ConeMatrix step_matrix(const Permutation& p, Step step) {
    const int n = p.size();
    const int m = p.at(n);
    ConeMatrix M(n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            bool one;
            if (step == Step::a) {
                if (j <= m) one = i == j;
                else if (i != n) one = i == j - 1;
                else one = j == m + 1;
            } else {
                one = i == j || (i == n && j == m);
            }
            if (one) M.set(i, j, 1);
        }
    return M;
}

inline std::vector<Rational> successor_lengths(const IET& T, Step step) {
    const int n = T.size();
    const int m = T.perm.at(n);
    const auto& l = T.lengths.entries();
    std::vector<Rational> out;
    if (step == Step::a) {
        for (int j = 1; j < m; ++j) out.push_back(l[j - 1]);
        out.push_back(l[m - 1] - l[n - 1]);
        out.push_back(l[n - 1]);
        for (int j = m + 1; j < n; ++j) out.push_back(l[j - 1]);
    } else {
        out = l;
        out[n - 1] = l[n - 1] - l[m - 1];
    }
    for (const auto& x : out)
        if (x < 0) throw std::invalid_argument("step type is inconsistent with the lengths");
    return out;
}

struct InductionOutcome {
    enum class Kind { StepA, StepB, Tie };
    Kind kind;
    Rational delta_plus;
    Rational delta_minus;
    std::optional<ConeMatrix> matrix;
    std::optional<IET> successor;

    bool is_tie() const { return kind == Kind::Tie; }
    Step step() const {
        if (kind == Kind::Tie) throw std::logic_error("no step at a tie");
        return kind == Kind::StepA ? Step::a : Step::b;
    }
};

inline std::pair<ConeMatrix, IET> formal_step(const IET& T, Step choice) {
    if (!is_irreducible(T.perm)) throw std::invalid_argument("induction needs an irreducible permutation");
    IET next(LengthVector(successor_lengths(T, choice)), rauzy_move(T.perm, choice));
    return {step_matrix(T.perm, choice), std::move(next)};
}

inline InductionOutcome rauzy_step(const IET& T) {
    if (!is_irreducible(T.perm)) throw std::invalid_argument("induction needs an irreducible permutation");
    if (T.lengths.zero_count() > 0)
        throw std::invalid_argument("zero-length interval present; collapse it before inducing");
    const int n = T.size();
    const Rational total = T.lengths.total();
    InductionOutcome out{InductionOutcome::Kind::Tie, total - T.lengths[n], total - T.lengths[T.perm.at(n)], {}, {}};
    if (out.delta_plus == out.delta_minus) return out;
    Step s = out.delta_plus > out.delta_minus ? Step::a : Step::b;
    auto [M, next] = formal_step(T, s);
    out.kind = s == Step::a ? InductionOutcome::Kind::StepA : InductionOutcome::Kind::StepB;
    out.matrix = std::move(M);
    out.successor = std::move(next);
    return out;
}

class InductionTie : public std::runtime_error {
public:
    InductionTie(int step, ConeMatrix partial, IET at)
        : std::runtime_error("Rauzy induction undefined at step " + std::to_string(step + 1) + " (tie)"),
          step_(step), partial_(std::move(partial)), at_(std::move(at)) {}
    int steps_done() const { return step_; }
    const ConeMatrix& partial() const { return partial_; }
    const IET& at() const { return at_; }

private:
    int step_;
    ConeMatrix partial_;
    IET at_;
};

struct InductionResult {
    ConeMatrix matrix;
    IET iet;
    std::vector<Step> steps;
};

inline InductionResult rauzy_matrix(const IET& T, int n) {
    if (n < 0) throw std::invalid_argument("step count must be nonnegative");
    InductionResult r{ConeMatrix::identity(T.size()), T, {}};
    for (int k = 0; k < n; ++k) {
        InductionOutcome o = rauzy_step(r.iet);
        if (o.is_tie()) throw InductionTie(k, r.matrix, r.iet);
        r.matrix = r.matrix * *o.matrix;
        r.steps.push_back(o.step());
        r.iet = *o.successor;
    }
    return r;
}

struct CollapsedIET {
    IET iet;
    int removed;                 // symbol that was dropped
    std::vector<int> index_map;  // old symbol -> new symbol, 0 for the dropped one (1-based)
};

inline CollapsedIET collapse_zero_interval(const IET& T) {
    if (T.lengths.zero_count() != 1) throw std::invalid_argument("collapse needs exactly one zero-length interval");
    const int n = T.size();
    if (n < 2) throw std::invalid_argument("cannot collapse a 1-interval IET");
    int z = 1;
    while (T.lengths[z] != 0) ++z;
    std::vector<int> map(n + 1, 0);
    for (int j = 1; j <= n; ++j) map[j] = j < z ? j : (j > z ? j - 1 : 0);
    std::vector<Rational> lens;
    for (int j = 1; j <= n; ++j)
        if (j != z) lens.push_back(T.lengths[j]);
    std::vector<int> images;
    for (int k = 1; k <= n; ++k)
        if (T.perm.at(k) != z) images.push_back(map[T.perm.at(k)]);
    return {IET(LengthVector(std::move(lens)), Permutation(std::move(images))), z, std::move(map)};
}

// Drops every zero-length interval, one at a time.
inline IET drop_zero_intervals(IET T) {
    while (T.lengths.zero_count() > 0) {
        std::vector<Rational> l = T.lengths.entries();
        int z = 0;
        while (l[z] != 0) ++z;
        // make z the only zero temporarily so the collapse precondition holds
        std::vector<Rational> probe(l.size(), Rational(1));
        probe[z] = 0;
        auto c = collapse_zero_interval(IET(LengthVector(probe), T.perm));
        l.erase(l.begin() + z);
        T = IET(LengthVector(std::move(l)), c.iet.perm);
    }
    return T;
}

struct ShadowStep {
    int ell = 0;
    int n = 0;
    int sigma = 0;
    bool critical = false;
    std::optional<int> alternate_n;  // the other admissible n at a critical position
    Permutation perm;                // permutation of R^n(T_eps)
    ConeMatrix matrix;               // M(T_eps, n)
};

namespace detail {

// a + b*eps with eps an infinitesimal
struct EpsLength {
    Rational a;
    Int b;
    friend bool operator==(const EpsLength&, const EpsLength&) = default;
    friend bool operator<(const EpsLength& x, const EpsLength& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; }
};

struct EpsIET {
    std::vector<EpsLength> l;
    Permutation perm;
};

inline Step eps_step_type(const EpsIET& T) {
    const int n = T.perm.size();
    const int m = T.perm.at(n);
    if (T.l[n - 1] == T.l[m - 1]) throw std::logic_error("shadow: infinitesimal tie");
    return T.l[n - 1] < T.l[m - 1] ? Step::a : Step::b;
}

inline EpsIET eps_apply(const EpsIET& T, Step s) {
    const int n = T.perm.size();
    const int m = T.perm.at(n);
    EpsIET out{{}, rauzy_move(T.perm, s)};
    auto sub = [](const EpsLength& x, const EpsLength& y) { return EpsLength{x.a - y.a, x.b - y.b}; };
    if (s == Step::a) {
        for (int j = 1; j < m; ++j) out.l.push_back(T.l[j - 1]);
        out.l.push_back(sub(T.l[m - 1], T.l[n - 1]));
        out.l.push_back(T.l[n - 1]);
        for (int j = m + 1; j < n; ++j) out.l.push_back(T.l[j - 1]);
    } else {
        out.l = T.l;
        out.l[n - 1] = sub(T.l[n - 1], T.l[m - 1]);
    }
    return out;
}

inline ConeMatrix delete_column_and_zero_row(const ConeMatrix& M, int col) {
    const int n = M.size();
    std::vector<int> zero_rows;
    for (int i = 1; i <= n; ++i) {
        bool z = true;
        for (int j = 1; j <= n; ++j)
            if (j != col && M(i, j) != 0) z = false;
        if (z) zero_rows.push_back(i);
    }
    if (zero_rows.size() != 1) throw std::logic_error("shadow: expected exactly one zero row after deleting the column");
    ConeMatrix R(n - 1);
    int ri = 1;
    for (int i = 1; i <= n; ++i) {
        if (i == zero_rows.front()) continue;
        int rj = 1;
        for (int j = 1; j <= n; ++j) {
            if (j == col) continue;
            R.set(ri, rj++, M(i, j));
        }
        ++ri;
    }
    return R;
}

}  // namespace detail

inline ConeMatrix delete_column_and_zero_row(const ConeMatrix& M, int col) {
    return detail::delete_column_and_zero_row(M, col);
}

inline std::vector<ShadowStep> shadow_track(const IET& T, int ell) {
    if (ell < 0) throw std::invalid_argument("step count must be nonnegative");
    CollapsedIET c = collapse_zero_interval(T);
    const int d = T.size();
    detail::EpsIET eps{{}, T.perm};
    for (int j = 1; j <= d; ++j) eps.l.push_back({T.lengths[j], j == c.removed ? Int(1) : Int(0)});
    IET hat = c.iet;
    ConeMatrix M = ConeMatrix::identity(d);
    ConeMatrix Mhat = ConeMatrix::identity(d - 1);
    int n = 0;
    int sigma = c.removed;

    auto is_critical = [&](int s) { return s == d || s == eps.perm.at(d); };
    auto advance = [&](Step s) {
        const int m = eps.perm.at(d);
        M = M * step_matrix(eps.perm, s);
        eps = detail::eps_apply(eps, s);
        ++n;
        return m;
    };
    auto check = [&](int step_ell) {
        if (!(eps.l[sigma - 1].a == 0 && eps.l[sigma - 1].b > 0))
            throw std::logic_error("shadow: tracked index does not carry the infinitesimal length");
        std::vector<Rational> limit;
        for (int j = 1; j <= d; ++j)
            if (j != sigma) limit.push_back(eps.l[j - 1].a);
        if (limit != hat.lengths.entries()) throw std::logic_error("shadow: limit lengths disagree with the collapsed IET");
        std::vector<int> images;
        for (int k = 1; k <= d; ++k) {
            int s = eps.perm.at(k);
            if (s != sigma) images.push_back(s < sigma ? s : s - 1);
        }
        if (Permutation(images) != hat.perm) throw std::logic_error("shadow: order of intervals disagrees");
        if (delete_column_and_zero_row(M, sigma) != Mhat)
            throw std::logic_error("shadow: matrix relation fails at step " + std::to_string(step_ell));
    };

    std::vector<ShadowStep> out;
    check(0);
    out.push_back({0, 0, sigma, is_critical(sigma), std::nullopt, eps.perm, M});
    for (int k = 1; k <= ell; ++k) {
        InductionOutcome o = rauzy_step(hat);
        if (o.is_tie()) throw std::invalid_argument("collapsed IET hits a tie before the requested step count");
        std::optional<int> alt;
        if (is_critical(sigma)) {
            const int m = eps.perm.at(d);
            Step s = detail::eps_step_type(eps);
            int predicted = sigma == d ? m + 1 : sigma;
            advance(s);
            sigma = predicted;
            if (is_critical(sigma)) throw std::logic_error("shadow: index stayed in critical position");
            alt = n;
        }
        Step s = detail::eps_step_type(eps);
        if (s != o.step()) throw std::logic_error("shadow: step types disagree");
        int m = advance(s);
        if (!(s == Step::b || sigma < m)) sigma += 1;
        Mhat = Mhat * *o.matrix;
        hat = *o.successor;
        check(k);
        out.push_back({k, n, sigma, is_critical(sigma), alt, eps.perm, M});
    }
    return out;
}

}  // namespace rauzy
