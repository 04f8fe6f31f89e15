#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rauzy {

enum class Step { a, b };

inline char to_char(Step s) { return s == Step::a ? 'a' : 'b'; }

inline Step step_from_char(char c) {
    if (c == 'a') return Step::a;
    if (c == 'b') return Step::b;
    throw std::invalid_argument(std::string("unknown step type '") + c + "'");
}

// Stored as the list of symbols read off from left to right in the image,
// i.e. entry k is pi^{-1}(k). pi(j) is available through pi().
class Permutation {
public:
    Permutation() = default;

    explicit Permutation(std::vector<int> images) : images_(std::move(images)) {
        const int n = static_cast<int>(images_.size());
        if (n < 1) throw std::invalid_argument("permutation needs at least one symbol");
        pos_.assign(n + 1, 0);
        for (int k = 0; k < n; ++k) {
            int s = images_[k];
            if (s < 1 || s > n) throw std::invalid_argument("symbol out of range in permutation");
            if (pos_[s] != 0) throw std::invalid_argument("repeated symbol in permutation");
            pos_[s] = k + 1;
        }
    }

    static Permutation parse(std::string_view text) {
        std::string s(text);
        s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; }), s.end());
        if (s.size() < 3 || s.front() != '(' || s.back() != ')')
            throw std::invalid_argument("permutation must be written as (....): " + std::string(text));
        std::string body = s.substr(1, s.size() - 2);
        std::vector<int> v;
        if (body.find(',') != std::string::npos) {
            std::stringstream ss(body);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
                    throw std::invalid_argument("bad symbol in permutation: " + std::string(text));
                v.push_back(std::stoi(tok));
            }
        } else {
            for (char c : body) {
                if (c < '1' || c > '9') throw std::invalid_argument("bad symbol in permutation: " + std::string(text));
                v.push_back(c - '0');
            }
        }
        return Permutation(std::move(v));
    }

    static Permutation identity(int n) {
        std::vector<int> v(n);
        for (int i = 0; i < n; ++i) v[i] = i + 1;
        return Permutation(std::move(v));
    }

    int size() const { return static_cast<int>(images_.size()); }
    // symbol occupying position k (1-based), i.e. pi^{-1}(k)
    int at(int k) const { return images_[k - 1]; }
    // position of symbol j (1-based), i.e. pi(j)
    int pi(int j) const { return pos_[j]; }
    const std::vector<int>& images() const { return images_; }

    std::string str() const {
        std::string out = "(";
        const bool commas = size() > 9;
        for (int k = 0; k < size(); ++k) {
            if (commas && k > 0) out += ',';
            out += std::to_string(images_[k]);
        }
        return out + ")";
    }

    friend bool operator==(const Permutation& x, const Permutation& y) { return x.images_ == y.images_; }
    friend auto operator<=>(const Permutation& x, const Permutation& y) { return x.images_ <=> y.images_; }

private:
    std::vector<int> images_;
    std::vector<int> pos_;
};

inline Permutation from_pi(const std::vector<int>& pi_of) {
    // pi_of is 1-based: pi_of[j] = position of symbol j
    const int n = static_cast<int>(pi_of.size()) - 1;
    std::vector<int> v(n, 0);
    for (int j = 1; j <= n; ++j) {
        if (pi_of[j] < 1 || pi_of[j] > n) throw std::invalid_argument("position out of range");
        v[pi_of[j] - 1] = j;
    }
    return Permutation(std::move(v));
}

inline bool is_irreducible(const Permutation& p) {
    const int n = p.size();
    int max_pos = 0;
    for (int k = 1; k < n; ++k) {
        max_pos = std::max(max_pos, p.pi(k));
        if (max_pos == k) return false;
    }
    return true;
}

inline bool is_degenerate(const Permutation& p) {
    const int n = p.size();
    for (int j = 1; j < n; ++j) {
        const int pj = p.pi(j), pj1 = p.pi(j + 1);
        if (pj1 == pj + 1) return true;
        if (pj == n && pj1 == 1 && p.pi(1) == p.pi(n) + 1) return true;
        if (pj1 == 1 && p.pi(1) == pj + 1) return true;
        if (pj1 == p.pi(n) + 1 && pj == n) return true;
    }
    return false;
}

inline Permutation rauzy_move(const Permutation& p, Step step) {
    if (!is_irreducible(p)) throw std::invalid_argument("rauzy_move needs an irreducible permutation: " + p.str());
    const int n = p.size();
    if (n == 1) return p;
    std::vector<int> q(n + 1, 0);
    if (step == Step::a) {
        const int m = p.at(n);
        for (int j = 1; j <= n; ++j) {
            if (j <= m) q[j] = p.pi(j);
            else if (j == m + 1) q[j] = p.pi(n);
            else q[j] = p.pi(j - 1);
        }
    } else {
        const int pn = p.pi(n);
        for (int j = 1; j <= n; ++j) {
            const int pj = p.pi(j);
            if (pj <= pn) q[j] = pj;
            else if (pj < n) q[j] = pj + 1;
            else q[j] = pn + 1;
        }
    }
    return from_pi(q);
}

struct RauzyEdge {
    Permutation from;
    Permutation to;
    Step step;
};

struct RauzyClass {
    std::vector<Permutation> vertices;  // breadth-first discovery order
    std::vector<RauzyEdge> edges;

    bool contains(const Permutation& p) const {
        return std::find(vertices.begin(), vertices.end(), p) != vertices.end();
    }
};

inline RauzyClass rauzy_class(const Permutation& p) {
    if (!is_irreducible(p)) throw std::invalid_argument("rauzy_class needs an irreducible permutation: " + p.str());
    RauzyClass cls;
    std::set<Permutation> seen{p};
    std::deque<Permutation> queue{p};
    while (!queue.empty()) {
        Permutation cur = queue.front();
        queue.pop_front();
        cls.vertices.push_back(cur);
        for (Step s : {Step::a, Step::b}) {
            Permutation nxt = rauzy_move(cur, s);
            cls.edges.push_back({cur, nxt, s});
            if (seen.insert(nxt).second) queue.push_back(nxt);
        }
    }
    return cls;
}

inline const RauzyClass& class_4321() {
    static const RauzyClass cls = rauzy_class(Permutation::parse("(4321)"));
    return cls;
}

inline Permutation restrict_to(const Permutation& p, const std::vector<int>& symbols) {
    const int k = static_cast<int>(symbols.size());
    if (k < 1) throw std::invalid_argument("restriction needs at least one symbol");
    for (int i = 0; i < k; ++i) {
        if (symbols[i] < 1 || symbols[i] > p.size()) throw std::invalid_argument("restriction symbol out of range");
        if (i > 0 && symbols[i] <= symbols[i - 1]) throw std::invalid_argument("restriction tuple must be strictly increasing");
    }
    std::vector<int> order(k);
    for (int i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) { return p.pi(symbols[x]) < p.pi(symbols[y]); });
    std::vector<int> v(k);
    for (int i = 0; i < k; ++i) v[i] = order[i] + 1;
    return Permutation(std::move(v));
}

class FourTuple {
public:
    FourTuple(int p1, int p2, int p3, int p4) : idx_{p1, p2, p3, p4} {
        if (p1 < 1) throw std::invalid_argument("tuple symbols start at 1");
        for (int i = 1; i < 4; ++i)
            if (idx_[i] <= idx_[i - 1]) throw std::invalid_argument("tuple must be strictly increasing");
    }
    explicit FourTuple(const std::array<int, 4>& a) : FourTuple(a[0], a[1], a[2], a[3]) {}

    static FourTuple parse(std::string_view text) {
        std::string s(text);
        for (char& c : s)
            if (c == '(' || c == ')' || c == ',') c = ' ';
        std::stringstream ss(s);
        std::array<int, 4> a{};
        for (int& x : a)
            if (!(ss >> x)) throw std::invalid_argument("tuple needs four symbols: " + std::string(text));
        std::string rest;
        if (ss >> rest) throw std::invalid_argument("tuple has more than four symbols: " + std::string(text));
        return FourTuple(a);
    }

    int operator[](int i) const { return idx_[i]; }  // 0-based access
    std::vector<int> symbols() const { return {idx_.begin(), idx_.end()}; }
    std::string str() const {
        return "(" + std::to_string(idx_[0]) + "," + std::to_string(idx_[1]) + "," + std::to_string(idx_[2]) + "," +
               std::to_string(idx_[3]) + ")";
    }

    friend bool operator==(const FourTuple&, const FourTuple&) = default;
    friend auto operator<=>(const FourTuple&, const FourTuple&) = default;

private:
    std::array<int, 4> idx_;
};

inline bool is_valid_tuple(const Permutation& p, const FourTuple& t) {
    if (t[3] > p.size()) return false;
    return class_4321().contains(restrict_to(p, t.symbols()));
}

inline std::vector<FourTuple> valid_tuples(const Permutation& p) {
    std::vector<FourTuple> out;
    const int n = p.size();
    for (int a = 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b)
            for (int c = b + 1; c <= n; ++c)
                for (int d = c + 1; d <= n; ++d) {
                    FourTuple t(a, b, c, d);
                    if (is_valid_tuple(p, t)) out.push_back(t);
                }
    return out;
}

struct AccessWitness {
    std::pair<int, int> r;  // 1-based indices into the first tuple
    std::pair<int, int> s;  // 1-based indices into the second tuple
    std::vector<int> merged_symbols;
    Permutation merged;  // restriction of p to merged_symbols
};

// Every witness making (t1, t2) accessible, in lexicographic order of the index pairs.
inline std::vector<AccessWitness> accessible_witnesses(const Permutation& p, const FourTuple& t1, const FourTuple& t2,
                                                       bool first_only = false) {
    if (!is_valid_tuple(p, t1) || !is_valid_tuple(p, t2))
        throw std::invalid_argument("tuples must restrict into the class of (4321)");
    static const Permutation rotation = Permutation::parse("(21)");
    static const Permutation excluded = Permutation::parse("(4231)");
    std::vector<AccessWitness> out;
    for (int r1 = 1; r1 <= 4; ++r1)
        for (int r2 = r1 + 1; r2 <= 4; ++r2) {
            if (restrict_to(p, {t1[r1 - 1], t1[r2 - 1]}) != rotation) continue;
            for (int s1 = 1; s1 <= 4; ++s1)
                for (int s2 = s1 + 1; s2 <= 4; ++s2) {
                    if (restrict_to(p, {t2[s1 - 1], t2[s2 - 1]}) != rotation) continue;
                    std::vector<int> merged{t1[r1 - 1], t1[r2 - 1], t2[s1 - 1], t2[s2 - 1]};
                    std::sort(merged.begin(), merged.end());
                    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
                    Permutation m = restrict_to(p, merged);
                    if (!is_irreducible(m) || m == excluded) continue;
                    out.push_back(AccessWitness{{r1, r2}, {s1, s2}, merged, m});
                    if (first_only) return out;
                }
        }
    return out;
}

inline std::optional<AccessWitness> is_accessible_pair(const Permutation& p, const FourTuple& t1, const FourTuple& t2) {
    auto w = accessible_witnesses(p, t1, t2, true);
    if (w.empty()) return std::nullopt;
    return w.front();
}

inline std::vector<FourTuple> accessible_chain(const Permutation& p, const FourTuple& from, const FourTuple& to) {
    if (!is_irreducible(p)) throw std::invalid_argument("accessible_chain needs an irreducible permutation: " + p.str());
    if (!is_valid_tuple(p, from) || !is_valid_tuple(p, to))
        throw std::invalid_argument("tuples must restrict into the class of (4321)");
    const std::vector<FourTuple> nodes = valid_tuples(p);
    std::map<FourTuple, FourTuple> parent;
    std::set<FourTuple> seen{from};
    std::deque<FourTuple> queue{from};
    while (!queue.empty()) {
        FourTuple cur = queue.front();
        queue.pop_front();
        if (cur == to) {
            std::vector<FourTuple> chain{cur};
            while (!(chain.back() == from)) chain.push_back(parent.at(chain.back()));
            std::reverse(chain.begin(), chain.end());
            return chain;
        }
        for (const FourTuple& nxt : nodes) {
            if (seen.count(nxt) || !is_accessible_pair(p, cur, nxt)) continue;
            seen.insert(nxt);
            parent.emplace(nxt, cur);
            queue.push_back(nxt);
        }
    }
    throw std::logic_error("no accessible chain from " + from.str() + " to " + to.str() + " for " + p.str());
}

inline std::ostream& operator<<(std::ostream& os, const Permutation& p) { return os << p.str(); }

}  // namespace rauzy
