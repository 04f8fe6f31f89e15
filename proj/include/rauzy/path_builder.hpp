#pragma once

#include "arith.hpp"
#include "catalog.hpp"
#include "cone_analysis.hpp"
#include "cone_matrix.hpp"
#include "iet.hpp"
#include "permutation.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rauzy {

inline std::vector<Rational> normalize(const std::vector<Int>& v) {
    Int s = 0;
    for (const auto& x : v) s += x;
    if (s == 0) throw std::invalid_argument("cannot normalize the zero vector");
    std::vector<Rational> out;
    for (const auto& x : v) out.emplace_back(x, s);
    return out;
}

inline std::vector<Rational> normalize(const std::vector<Rational>& v) {
    Rational s = 0;
    for (const auto& x : v) s += x;
    if (s == 0) throw std::invalid_argument("cannot normalize the zero vector");
    std::vector<Rational> out;
    for (const auto& x : v) out.push_back(x / s);
    return out;
}

inline Rational l1_distance(const std::vector<Rational>& x, const std::vector<Rational>& y) {
    Rational s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += abs_r(x[i] - y[i]);
    return s;
}

// Signed fail-plane residual (l_n - l_m) / |L|; negative on the side where step a applies.
inline Rational fail_plane_residual(const Permutation& p, const std::vector<Rational>& lengths) {
    const int n = p.size();
    Rational total = 0;
    for (const auto& x : lengths) total += x;
    return (lengths[n - 1] - lengths[p.at(n) - 1]) / total;
}

struct EndpointCertificate {
    std::vector<std::string> prefix_blocks;  // blocks walked before reaching the cycle anchor
    std::vector<std::string> cycle;          // eventual cycle, starting at its anchor
    int pf_iterations = 0;
    Rational pf_change;
    int forward_transitions = 0;  // block transitions the vector provably follows
    int forward_steps = 0;        // corresponding single Rauzy steps
    int growing_columns = 0;      // columns of the 16th cycle power with norm above 2^10
    ContractionDiagnostics cycle_diagnostics;
};

struct RealizedEndpoint {
    std::vector<Int> lengths;  // unnormalized, exact
    EndpointCertificate certificate;
    std::vector<Rational> normalized() const { return normalize(lengths); }
};

struct Midpoint {
    std::vector<Int> lengths;  // F pushed from the left successor
    Rational residual;         // signed fail-plane residual of F
    Rational consistency;      // 1-norm gap to the image of the right successor's left endpoint
    std::vector<Rational> normalized() const { return normalize(lengths); }
};

class EndpointRealizer {
public:
    EndpointRealizer(const Catalog& c, unsigned precision_bits) : c_(c), bits_(precision_bits) {
        if (precision_bits < 8) throw std::invalid_argument("precision must be at least 8 bits");
    }

    const Catalog& catalog() const { return c_; }
    unsigned precision_bits() const { return bits_; }

    RealizedEndpoint endpoint(const std::string& id, Direction d) const {
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = endpoints_.find({id, d});
            if (it != endpoints_.end()) return it->second;
        }
        RealizedEndpoint e = compute_endpoint(id, d);
        std::lock_guard<std::mutex> lock(mu_);
        return endpoints_.emplace(std::make_pair(id, d), std::move(e)).first->second;
    }

    Midpoint midpoint(const std::string& id) const {
        const BuildingBlock& b = c_.block(id);
        if (!b.left || !b.right) throw std::invalid_argument("block " + id + " lacks a successor; no midpoint");
        std::vector<Int> fl = b.left->matrix.apply(endpoint(b.left->target, Direction::R).lengths);
        std::vector<Int> fr = b.right->matrix.apply(endpoint(b.right->target, Direction::L).lengths);
        Midpoint m{fl, fail_plane_residual(b.perm, normalize(fl)), l1_distance(normalize(fl), normalize(fr))};
        return m;
    }

private:
    struct CycleData {
        std::vector<Int> vector;
        int iterations;
        Rational change;
        ContractionDiagnostics diag;
        int growing;
    };

    RealizedEndpoint compute_endpoint(const std::string& id, Direction d) const {
        std::vector<std::string> walk{id};
        std::string x = id;
        std::vector<std::string> cycle;
        while (true) {
            x = c_.transition(x, d).target;
            auto pos = std::find(walk.begin(), walk.end(), x);
            if (pos != walk.end()) {
                cycle.assign(pos, walk.end());
                break;
            }
            walk.push_back(x);
        }
        const std::string anchor = *std::min_element(cycle.begin(), cycle.end());
        std::rotate(cycle.begin(), std::find(cycle.begin(), cycle.end(), anchor), cycle.end());
        const CycleData& cd = cycle_data(anchor, cycle, d);

        // walk from id to the anchor and push the anchor vector back
        std::vector<std::string> prefix;
        ConeMatrix P = ConeMatrix::identity(c_.block(id).perm.size());
        for (std::string y = id; y != anchor; y = c_.transition(y, d).target) {
            prefix.push_back(y);
            P = P * c_.transition(y, d).matrix;
        }
        RealizedEndpoint e;
        e.lengths = P.apply(cd.vector);
        e.certificate.prefix_blocks = prefix;
        e.certificate.cycle = cycle;
        e.certificate.pf_iterations = cd.iterations;
        e.certificate.pf_change = cd.change;
        e.certificate.cycle_diagnostics = cd.diag;
        e.certificate.growing_columns = cd.growing;
        forward_check(id, d, e);
        return e;
    }

    // Re-expand the vector along the block walk with exact successor lengths.
    void forward_check(const std::string& id, Direction d, RealizedEndpoint& e) const {
        constexpr int transition_cap = 256;
        std::vector<Rational> l;
        for (const auto& v : e.lengths) l.emplace_back(v);
        std::string y = id;
        for (int k = 0; k < transition_cap; ++k) {
            const Transition& t = c_.transition(y, d);
            bool ok = true;
            for (std::size_t s = 0; s < t.path.steps.size(); ++s) {
                IET cur(LengthVector(l), t.path.vertices[s]);
                try {
                    l = successor_lengths(cur, t.path.steps[s]);
                } catch (const std::invalid_argument&) {
                    ok = false;
                    break;
                }
                if (std::all_of(l.begin(), l.end(), [](const Rational& r) { return r == 0; })) {
                    ok = false;
                    break;
                }
                ++e.certificate.forward_steps;
            }
            if (!ok) return;
            ++e.certificate.forward_transitions;
            y = t.target;
        }
    }

    const CycleData& cycle_data(const std::string& anchor, const std::vector<std::string>& cycle, Direction d) const {
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cycles_.find({anchor, d});
            if (it != cycles_.end()) return it->second;
        }
        ConeMatrix C = ConeMatrix::identity(c_.block(anchor).perm.size());
        for (const auto& b : cycle) C = C * c_.transition(b, d).matrix;
        PfResult pf = pf_direction(C, pow2_neg(bits_));
        const ConeMatrix C16 = power(C, 16);
        int growing = 0;
        for (int j = 1; j <= C16.size(); ++j)
            if (C16.column_norm(j) > 1024) ++growing;
        CycleData cd{pf.vector, pf.iterations, pf.last_change, contraction_diagnostics(C, bits_), growing};
        std::lock_guard<std::mutex> lock(mu_);
        return cycles_.emplace(std::make_pair(anchor, d), std::move(cd)).first->second;
    }

    const Catalog& c_;
    unsigned bits_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<std::string, Direction>, RealizedEndpoint> endpoints_;
    mutable std::map<std::pair<std::string, Direction>, CycleData> cycles_;
};

inline RealizedEndpoint realize_endpoint(const Catalog& c, const std::string& id, Direction d, unsigned precision_bits = 256) {
    return EndpointRealizer(c, precision_bits).endpoint(id, d);
}

inline Midpoint realize_midpoint(const Catalog& c, const std::string& id, const Rational& tol, unsigned precision_bits = 256) {
    Midpoint m = EndpointRealizer(c, precision_bits).midpoint(id);
    if (abs_r(m.residual) > tol)
        throw std::runtime_error("midpoint of block " + id + " misses the fail plane by " + to_decimal(abs_r(m.residual), 12));
    return m;
}

struct RealizedBlock {
    std::string block;
    ConeMatrix prefix;
    std::vector<Rational> T1, T2, F;  // normalized, after the prefix
    EndpointCertificate cert_T1, cert_T2;
};

inline RealizedBlock realize_block(const EndpointRealizer& r, const std::string& id, const ConeMatrix& prefix) {
    RealizedEndpoint a = r.endpoint(id, Direction::L), b = r.endpoint(id, Direction::R);
    Midpoint m = r.midpoint(id);
    return {id, prefix, normalize(prefix.apply(a.lengths)), normalize(prefix.apply(b.lengths)),
            normalize(prefix.apply(m.lengths)), a.certificate, b.certificate};
}

// Point reached by running the dir-loop at `start` n times, leaving once in the
// opposite direction, and closing with the left endpoint of the block reached.
inline std::vector<Rational> realize_loop_exit(const EndpointRealizer& r, const std::string& start, Direction dir, int n) {
    const Catalog& c = r.catalog();
    ConeMatrix M = ConeMatrix::identity(c.block(start).perm.size());
    std::string x = start;
    for (int k = 0; k < n; ++k) {
        std::size_t guard = 0;
        do {
            M = M * c.transition(x, dir).matrix;
            x = c.transition(x, dir).target;
            if (++guard > c.blocks.size()) throw std::invalid_argument(start + " does not lie on a " + to_char(dir) + "-loop");
        } while (x != start);
    }
    const Transition& out = c.transition(x, opposite(dir));
    M = M * out.matrix;
    return normalize(M.apply(r.endpoint(out.target, Direction::L).lengths));
}

struct FailSideRecord {
    std::string block;
    bool declared = true;
    int side_T1 = 0;  // sign of l_n - l_m
    int side_T2 = 0;
    bool opposite = false;
    Rational midpoint_residual;
    Rational midpoint_consistency;
    bool midpoint_consistent = false;
};

inline std::vector<FailSideRecord> validate_fail_sides(const Catalog& c, unsigned precision_bits, const Rational& tol) {
    EndpointRealizer r(c, precision_bits);
    std::vector<FailSideRecord> out;
    auto sgn = [](const Rational& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); };
    for (const auto& [id, b] : c.blocks) {
        FailSideRecord rec;
        rec.block = id;
        rec.declared = b.fail_side;
        if (!b.left || !b.right) {
            out.push_back(rec);
            continue;
        }
        rec.side_T1 = sgn(fail_plane_residual(b.perm, r.endpoint(id, Direction::L).normalized()));
        rec.side_T2 = sgn(fail_plane_residual(b.perm, r.endpoint(id, Direction::R).normalized()));
        rec.opposite = rec.side_T1 * rec.side_T2 < 0;
        Midpoint m = r.midpoint(id);
        rec.midpoint_residual = m.residual;
        rec.midpoint_consistency = m.consistency;
        rec.midpoint_consistent = abs_r(m.residual) <= tol && m.consistency <= tol;
        out.push_back(rec);
    }
    return out;
}

struct Breakpoint {
    Rational t;
    std::vector<Int> lengths;  // unnormalized
    int depth_class = 0;       // direction swaps along the tree path that produced the point
    std::vector<Rational> normalized() const { return normalize(lengths); }
};

struct PathApproximation {
    int depth = 0;
    std::vector<Breakpoint> breakpoints;
    nlohmann::json metadata;
};

class PrecisionExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline PathApproximation conjugate(const PathApproximation& p, const ConeMatrix& M) {
    PathApproximation out = p;
    for (auto& b : out.breakpoints) b.lengths = M.apply(b.lengths);
    return out;
}

inline PathApproximation reversed(const PathApproximation& p) {
    PathApproximation out = p;
    std::reverse(out.breakpoints.begin(), out.breakpoints.end());
    for (auto& b : out.breakpoints) b.t = 1 - b.t;
    return out;
}

// sup over t of |fine(t) - coarse(t)|_1 for piecewise linear paths on nested dyadic grids
inline Rational sup_distance(const PathApproximation& coarse, const PathApproximation& fine) {
    if (fine.breakpoints.size() != 2 * coarse.breakpoints.size() - 1)
        throw std::invalid_argument("sup_distance expects consecutive dyadic refinements");
    Rational sup = 0;
    for (std::size_t k = 0; k < fine.breakpoints.size(); ++k) {
        auto f = fine.breakpoints[k].normalized();
        std::vector<Rational> g;
        if (k % 2 == 0) g = coarse.breakpoints[k / 2].normalized();
        else {
            auto a = coarse.breakpoints[k / 2].normalized();
            auto b = coarse.breakpoints[k / 2 + 1].normalized();
            for (std::size_t i = 0; i < a.size(); ++i) g.push_back((a[i] + b[i]) / 2);
        }
        sup = std::max(sup, l1_distance(f, g));
    }
    return sup;
}

inline Rational dyadic_disagreement(const PathApproximation& coarse, const PathApproximation& fine) {
    Rational worst = 0;
    for (std::size_t k = 0; k < coarse.breakpoints.size(); ++k)
        worst = std::max(worst, l1_distance(coarse.breakpoints[k].normalized(), fine.breakpoints[2 * k].normalized()));
    return worst;
}

struct TreeVertex {
    std::string block;
    ConeMatrix prefix;
    std::vector<Direction> path;
    int swaps() const {
        int s = 0;
        for (std::size_t i = 1; i < path.size(); ++i)
            if (path[i] != path[i - 1]) ++s;
        return s;
    }
};

inline std::vector<TreeVertex> expand_tree_level(const Catalog& c, const std::vector<TreeVertex>& level) {
    std::vector<TreeVertex> next;
    next.reserve(level.size() * 2);
    for (const auto& v : level)
        for (Direction d : {Direction::L, Direction::R}) {
            const Transition& t = c.transition(v.block, d);
            TreeVertex w{t.target, v.prefix * t.matrix, v.path};
            w.path.push_back(d);
            next.push_back(std::move(w));
        }
    return next;
}

inline PathApproximation path_from_level(const EndpointRealizer& r, const std::vector<TreeVertex>& level, int depth) {
    PathApproximation p;
    p.depth = depth;
    const Int den = Int(1) << depth;
    p.breakpoints.resize(level.size() + 1);
    for (const auto& v : level) r.endpoint(v.block, Direction::L);  // warm the cache serially
    auto fill = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            const auto& v = level[k];
            p.breakpoints[k] = {Rational(Int(k), den), v.prefix.apply(r.endpoint(v.block, Direction::L).lengths), v.swaps()};
        }
    };
    const std::size_t chunk = 256;
    std::vector<std::future<void>> jobs;
    for (std::size_t lo = 0; lo < level.size(); lo += chunk)
        jobs.push_back(std::async(std::launch::async, fill, lo, std::min(level.size(), lo + chunk)));
    for (auto& j : jobs) j.get();
    const auto& last = level.back();
    p.breakpoints.back() = {Rational(1), last.prefix.apply(r.endpoint(last.block, Direction::R).lengths), last.swaps()};
    return p;
}

struct PathBuildResult {
    PathApproximation path;
    std::vector<double> cauchy;          // cauchy[n] = sup |c_n - c_{n-1}|, n >= 1
    std::vector<double> dyadic_errors;   // disagreement on the coarser grid
    unsigned max_entry_bits = 0;
};

inline PathBuildResult build_path_with_history(const Catalog& c, const std::string& root, int depth, unsigned precision_bits) {
    if (depth < 0) throw std::invalid_argument("depth must be nonnegative");
    EndpointRealizer r(c, precision_bits);
    std::vector<TreeVertex> level{{root, ConeMatrix::identity(c.block(root).perm.size()), {}}};
    PathBuildResult res;
    res.path = path_from_level(r, level, 0);
    res.cauchy.push_back(0);
    res.dyadic_errors.push_back(0);
    const Rational budget = Rational(10) * Rational(Int(1), Int(1) << (precision_bits / 2));
    for (int n = 1; n <= depth; ++n) {
        level = expand_tree_level(c, level);
        unsigned entry_bits = 0;
        for (const auto& v : level)
            for (int i = 1; i <= v.prefix.size(); ++i)
                for (int j = 1; j <= v.prefix.size(); ++j)
                    if (v.prefix(i, j) != 0) entry_bits = std::max(entry_bits, static_cast<unsigned>(msb(v.prefix(i, j))) + 1);
        res.max_entry_bits = entry_bits;
        // realized points lose about twice the prefix entry size in relative accuracy
        if (2 * entry_bits + 16 > precision_bits)
            throw PrecisionExhausted("prefix entries reach " + std::to_string(entry_bits) + " bits at depth " + std::to_string(n) +
                                     "; increase precision_bits above " + std::to_string(2 * entry_bits + 16));
        PathApproximation next = path_from_level(r, level, n);
        Rational dis = dyadic_disagreement(res.path, next);
        if (dis > budget)
            throw PrecisionExhausted("coarse breakpoints moved by " + to_decimal(dis, 20) + " at depth " + std::to_string(n) +
                                     "; increase precision_bits");
        res.cauchy.push_back(to_double(sup_distance(res.path, next)));
        res.dyadic_errors.push_back(to_double(dis));
        res.path = std::move(next);
    }
    nlohmann::json meta;
    meta["root"] = root;
    meta["depth"] = depth;
    meta["precision_bits"] = precision_bits;
    meta["catalog_hash"] = std::to_string(std::hash<std::string>{}(c.source_text));
    meta["truncation"] = "unexpanded blocks are closed with their left endpoint";
    meta["cauchy_sup"] = res.cauchy;
    meta["dyadic_disagreement"] = res.dyadic_errors;
    meta["max_prefix_entry_bits"] = res.max_entry_bits;
    nlohmann::json certs;
    for (const auto& [id, b] : c.blocks) {
        (void)b;
        if (!c.has_transition(id, Direction::L) || !c.has_transition(id, Direction::R)) continue;
        for (Direction d : {Direction::L, Direction::R}) {
            const auto& cert = r.endpoint(id, d).certificate;
            certs[id][std::string(1, to_char(d))] = {{"cycle", cert.cycle},
                                                     {"pf_iterations", cert.pf_iterations},
                                                     {"forward_steps", cert.forward_steps},
                                                     {"forward_transitions", cert.forward_transitions}};
        }
    }
    meta["endpoint_certificates"] = certs;
    res.path.metadata = meta;
    return res;
}

inline PathApproximation build_path(const Catalog& c, const std::string& root, int depth, unsigned precision_bits = 256) {
    return build_path_with_history(c, root, depth, precision_bits).path;
}

struct UECertificate {
    enum class Verdict { certified, inconclusive };
    Verdict verdict = Verdict::inconclusive;
    int steps_checked = 0;
    double final_max_sin_angle = 1;
    double tolerance = 0;
    std::optional<int> tie_step;  // induction step that hit the fail plane
    int dimension = 0;            // symbols left after dropping zero-length intervals
    bool certified() const { return verdict == Verdict::certified; }
};

inline UECertificate certify_unique_ergodicity(const IET& T, int max_steps, double tol, unsigned precision_bits = 128) {
    UECertificate cert;
    cert.tolerance = tol;
    IET cur = drop_zero_intervals(T);
    cert.dimension = cur.size();
    if (cur.size() < 2 || !is_irreducible(cur.perm)) return cert;
    ConeMatrix M = ConeMatrix::identity(cur.size());
    for (int k = 1; k <= max_steps; ++k) {
        InductionOutcome o = rauzy_step(cur);
        if (o.is_tie()) {
            cert.tie_step = k;
            return cert;
        }
        M = M * *o.matrix;
        cur = *o.successor;
        cert.steps_checked = k;
        cert.final_max_sin_angle = contraction_diagnostics(M, precision_bits).max_sin_angle;
        if (cert.final_max_sin_angle < tol) {
            cert.verdict = UECertificate::Verdict::certified;
            return cert;
        }
    }
    return cert;
}

struct RealizedPoint {
    std::string block;
    std::string role;  // "T1", "F" or "T2"
};

namespace detail {

inline std::optional<RealizedPoint> match_point(const EndpointRealizer& r, const Permutation& perm,
                                                const std::vector<Rational>& x, const Rational& tol) {
    for (const auto& [id, b] : r.catalog().blocks) {
        if (b.perm != perm || !b.left || !b.right) continue;
        if (l1_distance(x, r.endpoint(id, Direction::L).normalized()) <= tol) return RealizedPoint{id, "T1"};
        if (l1_distance(x, r.endpoint(id, Direction::R).normalized()) <= tol) return RealizedPoint{id, "T2"};
        if (l1_distance(x, r.midpoint(id).normalized()) <= tol) return RealizedPoint{id, "F"};
    }
    return std::nullopt;
}

// One induction step that tolerates zero lengths away from a tie.
inline std::optional<std::pair<Step, std::vector<Rational>>> weak_step(const Permutation& p, const std::vector<Rational>& l) {
    const int n = p.size();
    const Rational& ln = l[n - 1];
    const Rational& lm = l[p.at(n) - 1];
    if (ln == lm) return std::nullopt;
    Step s = ln < lm ? Step::a : Step::b;
    return std::make_pair(s, successor_lengths(IET(LengthVector(l), p), s));
}

}  // namespace detail

struct Connection {
    std::vector<PathApproximation> segments;
    int steps = 0;  // induction steps applied before both points were realized
    RealizedPoint from, to;
};

inline Connection connect_endpoints(const Catalog& c, const IET& S1, const IET& S2, int K, int depth = 6,
                                    unsigned precision_bits = 256) {
    if (S1.perm != S2.perm) throw std::invalid_argument("connect_endpoints needs a common permutation");
    Connection out;
    if (S1.lengths.normalized() == S2.lengths.normalized()) {
        PathApproximation p;
        Int den = 1;
        std::vector<Int> v;
        for (const auto& x : S1.lengths.normalized()) den = boost::multiprecision::lcm(den, denominator(x));
        for (const auto& x : S1.lengths.normalized()) v.push_back(numerator(x) * (den / denominator(x)));
        p.breakpoints = {{Rational(0), v, 0}, {Rational(1), v, 0}};
        p.metadata["trivial"] = true;
        out.segments.push_back(std::move(p));
        return out;
    }
    EndpointRealizer r(c, precision_bits);
    const Rational tol = Rational(Int(1), Int(1) << (precision_bits / 2));
    Permutation perm = S1.perm;
    std::vector<Rational> x1 = S1.lengths.entries(), x2 = S2.lengths.entries();
    ConeMatrix M = ConeMatrix::identity(perm.size());
    for (int k = 0; k <= K; ++k) {
        auto m1 = detail::match_point(r, perm, normalize(x1), tol);
        auto m2 = detail::match_point(r, perm, normalize(x2), tol);
        if (m1 && m2 && m1->block == m2->block && m1->role != m2->role) {
            const std::string& id = m1->block;
            const Transition& tl = c.transition(id, Direction::L);
            const Transition& tr = c.transition(id, Direction::R);
            PathApproximation left = conjugate(build_path(c, tl.target, depth, precision_bits), M * tl.matrix);
            PathApproximation right = conjugate(build_path(c, tr.target, depth, precision_bits), M * tr.matrix);
            auto order = [](const std::string& role) { return role == "T1" ? 0 : (role == "F" ? 1 : 2); };
            const int a = order(m1->role), b = order(m2->role);
            const int lo = std::min(a, b), hi = std::max(a, b);
            std::vector<PathApproximation> segs;
            if (lo == 0) segs.push_back(left);
            if (hi == 2) segs.push_back(right);
            if (segs.size() == 2) segs[1].breakpoints.front().lengths = segs[0].breakpoints.back().lengths;
            if (a > b) {
                std::reverse(segs.begin(), segs.end());
                for (auto& s : segs) s = reversed(s);
            }
            out.segments = std::move(segs);
            out.steps = k;
            out.from = *m1;
            out.to = *m2;
            return out;
        }
        if (k == K) break;
        auto s1 = detail::weak_step(perm, x1);
        auto s2 = detail::weak_step(perm, x2);
        if (!s1 || !s2 || s1->first != s2->first)
            throw std::runtime_error("points separate after " + std::to_string(k) +
                                     " induction steps without reaching a common building block");
        M = M * step_matrix(perm, s1->first);
        perm = rauzy_move(perm, s1->first);
        x1 = s1->second;
        x2 = s2->second;
    }
    throw std::runtime_error("horizon of " + std::to_string(K) + " steps too small: points not realized in a common block");
}

enum class HAlphaCase { merged_first, merged_last, merged_middle, direct };

inline std::string to_string(HAlphaCase c) {
    switch (c) {
        case HAlphaCase::merged_first: return "merged_first";
        case HAlphaCase::merged_last: return "merged_last";
        case HAlphaCase::direct: return "direct";
        default: return "merged_middle";
    }
}

inline HAlphaCase h_alpha_case_from_string(const std::string& s) {
    if (s == "merged_first") return HAlphaCase::merged_first;
    if (s == "merged_last") return HAlphaCase::merged_last;
    if (s == "merged_middle") return HAlphaCase::merged_middle;
    if (s == "direct") return HAlphaCase::direct;
    throw std::invalid_argument("unknown H_alpha case " + s);
}

// Which interval of the 3-symbol exchange absorbs the merged pair.
inline std::optional<HAlphaCase> h_alpha_case_for(const Permutation& merged) {
    if (merged == Permutation::parse("(321)")) return HAlphaCase::direct;
    if (merged == Permutation::parse("(3421)")) return HAlphaCase::merged_first;
    if (merged == Permutation::parse("(4312)")) return HAlphaCase::merged_last;
    if (merged == Permutation::parse("(4231)")) return HAlphaCase::merged_middle;
    return std::nullopt;
}

using Point3 = std::array<Rational, 3>;

inline bool on_h_alpha(const Point3& y, const Rational& alpha) {
    return y[1] + y[2] == alpha * (y[0] + 2 * y[1] + y[2]);
}

struct HAlphaPolyline {
    Rational alpha;
    HAlphaCase kind;
    Point3 start;
    Point3 end;
    std::vector<std::vector<Rational>> vertices;  // polyline corners in the merged coordinates
    std::vector<std::vector<Rational>> samples;   // points along the polyline
    std::vector<Point3> reduced_samples;          // the same points in 3-symbol coordinates
};

inline Point3 reduce(HAlphaCase k, const std::vector<Rational>& x) {
    if (k == HAlphaCase::direct) return {x[0], x[1], x[2]};
    if (k == HAlphaCase::merged_first) return {x[0], x[1], x[2] + x[3]};
    return {x[0] + x[1], x[2], x[3]};
}

inline HAlphaPolyline h_alpha_segment(const Rational& alpha, HAlphaCase kind, int samples_per_edge = 8) {
    if (kind == HAlphaCase::merged_middle) throw std::invalid_argument("the (4231) case is excluded");
    if (alpha <= 0 || alpha >= 1) throw std::invalid_argument("alpha must lie in (0,1)");
    if (samples_per_edge < 1) throw std::invalid_argument("need at least one sample per edge");
    HAlphaPolyline h{alpha, kind, {1 - alpha, 0, alpha}, {}, {}, {}, {}};
    if (alpha <= Rational(1, 2)) h.end = {(1 - 2 * alpha) / (1 - alpha), alpha / (1 - alpha), 0};
    else h.end = {0, (1 - alpha) / alpha, (2 * alpha - 1) / alpha};
    const Rational zero = 0;
    if (kind == HAlphaCase::direct) {
        h.vertices = {{h.start.begin(), h.start.end()}, {h.end.begin(), h.end.end()}};
    } else if (kind == HAlphaCase::merged_first) {
        h.vertices = {{1 - alpha, zero, alpha, zero}, {1 - alpha, zero, zero, alpha}, {h.end[0], h.end[1], zero, h.end[2]}};
    } else {
        h.vertices = {{zero, 1 - alpha, zero, alpha}, {1 - alpha, zero, zero, alpha}, {h.end[0], zero, h.end[1], h.end[2]}};
    }
    for (std::size_t e = 0; e + 1 < h.vertices.size(); ++e)
        for (int s = 0; s <= samples_per_edge; ++s) {
            if (e > 0 && s == 0) continue;
            Rational t(s, samples_per_edge);
            std::vector<Rational> p;
            for (std::size_t i = 0; i < h.vertices[e].size(); ++i) p.push_back((1 - t) * h.vertices[e][i] + t * h.vertices[e + 1][i]);
            h.reduced_samples.push_back(reduce(kind, p));
            h.samples.push_back(std::move(p));
        }
    for (const auto& y : h.reduced_samples)
        if (!on_h_alpha(y, alpha)) throw std::logic_error("H_alpha sample off the segment");
    return h;
}

inline bool is_rotation(const Permutation& p) {
    const int n = p.size();
    for (int s = 1; s < n; ++s) {
        bool ok = true;
        for (int k = 1; k <= n && ok; ++k) ok = p.at(k) == ((k - 1 + s) % n) + 1;
        if (ok) return true;
    }
    return false;
}

struct PlanSegment {
    std::string kind;  // four_iet_path, weight_transfer, h_alpha, rotation_bridge
    std::vector<int> support;
    std::string note;
    std::optional<HAlphaCase> h_case;
};

struct ConnectionPlan {
    std::string kind;  // same_tuple, four_iet_class, rotation, three_iet
    std::optional<AccessWitness> witness;
    std::vector<PlanSegment> segments;
    bool transfer_validated = false;
};

// Moving weight between two symbols that stay adjacent in domain and image leaves the map unchanged.
inline bool validate_weight_transfer(const Permutation& p, const std::vector<Rational>& from, const std::vector<Rational>& to,
                                     int samples = 16) {
    IET A(LengthVector(from), p);
    const Rational total = A.lengths.total();
    for (int s = 0; s <= 4; ++s) {
        Rational t(s, 4);
        std::vector<Rational> mix;
        for (std::size_t i = 0; i < from.size(); ++i) mix.push_back((1 - t) * from[i] + t * to[i]);
        IET B(LengthVector(mix), p);
        if (B.lengths.total() != total) return false;
        for (int k = 0; k < samples; ++k) {
            Rational x = total * Rational(2 * k + 1, 2 * samples);
            if (evaluate(A, x) != evaluate(B, x)) return false;
        }
    }
    return true;
}

inline std::vector<int> support_of(const std::vector<Rational>& l) {
    std::vector<int> s;
    for (std::size_t i = 0; i < l.size(); ++i)
        if (l[i] != 0) s.push_back(static_cast<int>(i) + 1);
    return s;
}

namespace detail {

// Maximal runs of consecutive merged symbols that stay consecutive in the image.
inline int block_of(const Permutation& m, int k) {
    int b = 0;
    for (int j = 2; j <= k; ++j)
        if (m.pi(j) != m.pi(j - 1) + 1) ++b;
    return b;
}

}  // namespace detail

inline ConnectionPlan secret4_connect(const Permutation& p, const FourTuple& P, const FourTuple& Q, const IET& T, const IET& S,
                                      std::optional<AccessWitness> chosen = std::nullopt) {
    if (p.size() < 4) throw std::invalid_argument("secret 4-IETs need at least four symbols");
    if (is_degenerate(p)) throw std::invalid_argument("permutation is degenerate");
    if (T.perm != p || S.perm != p) throw std::invalid_argument("IETs must carry the given permutation");
    auto inside = [](const std::vector<int>& supp, const FourTuple& t) {
        auto sy = t.symbols();
        return std::all_of(supp.begin(), supp.end(), [&](int s) { return std::find(sy.begin(), sy.end(), s) != sy.end(); });
    };
    if (!inside(support_of(T.lengths.entries()), P) || !inside(support_of(S.lengths.entries()), Q))
        throw std::invalid_argument("IET lengths must vanish off their tuples");
    ConnectionPlan plan;
    if (P == Q) {
        plan.kind = "same_tuple";
        plan.segments.push_back({"four_iet_path", P.symbols(), "connect_endpoints inside the 4-symbol face", std::nullopt});
        return plan;
    }
    const auto witnesses = accessible_witnesses(p, P, Q);
    if (witnesses.empty())
        throw std::invalid_argument("tuples " + P.str() + " and " + Q.str() + " are not accessible; use accessible_chain");
    if (chosen) {
        auto same = [&](const AccessWitness& w) { return w.r == chosen->r && w.s == chosen->s; };
        if (std::none_of(witnesses.begin(), witnesses.end(), same))
            throw std::invalid_argument("supplied witness does not make the tuples accessible");
    }
    const AccessWitness w = chosen ? *chosen : witnesses.front();
    plan.witness = w;
    const std::vector<int> pr{P[w.r.first - 1], P[w.r.second - 1]};
    const std::vector<int> qs{Q[w.s.first - 1], Q[w.s.second - 1]};
    auto pair_note = [](const std::vector<int>& v) { return " (" + std::to_string(v[0]) + "," + std::to_string(v[1]) + ")"; };
    plan.segments.push_back({"four_iet_path", P.symbols(), "T to a rotation supported on" + pair_note(pr), std::nullopt});
    if (class_4321().contains(w.merged)) {
        plan.kind = "four_iet_class";
        plan.segments.push_back({"rotation_bridge", w.merged_symbols, "4-symbol path between equal-rotation 2-IETs", std::nullopt});
    } else if (is_rotation(w.merged)) {
        plan.kind = "rotation";
        plan.segments.push_back({"weight_transfer", w.merged_symbols, "shift weight inside blocks that move together", std::nullopt});
        auto local = [&](int sym) {
            return static_cast<int>(std::find(w.merged_symbols.begin(), w.merged_symbols.end(), sym) - w.merged_symbols.begin()) + 1;
        };
        auto partner = [&](int x) {
            if (std::find(qs.begin(), qs.end(), x) != qs.end()) return x;
            for (int y : qs)
                if (std::find(pr.begin(), pr.end(), y) == pr.end() &&
                    detail::block_of(w.merged, local(y)) == detail::block_of(w.merged, local(x)))
                    return y;
            return 0;
        };
        const int q0 = partner(pr[0]), q1 = partner(pr[1]);
        if (q0 && q1 && q0 != q1) {
            std::vector<Rational> from(p.size(), Rational(0)), to(p.size(), Rational(0));
            const Rational x(5, 8), y(3, 8);
            from[pr[0] - 1] = x;
            from[pr[1] - 1] = y;
            to[q0 - 1] += x;
            to[q1 - 1] += y;
            plan.transfer_validated = validate_weight_transfer(p, from, to);
        }
    } else if (auto hc = h_alpha_case_for(w.merged)) {
        plan.kind = "three_iet";
        plan.segments.push_back({"h_alpha", w.merged_symbols, "constant rotation number segment", hc});
    } else {
        throw std::logic_error("merged restriction " + w.merged.str() + " fits no connection case");
    }
    plan.segments.push_back({"four_iet_path", Q.symbols(), "rotation on" + pair_note(qs) + " to S", std::nullopt});
    return plan;
}

}  // namespace rauzy
