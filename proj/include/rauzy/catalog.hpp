#pragma once

#include "cone_analysis.hpp"
#include "cone_matrix.hpp"
#include "iet.hpp"
#include "permutation.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rauzy {

enum class Direction { L, R };

inline char to_char(Direction d) { return d == Direction::L ? 'L' : 'R'; }
inline Direction opposite(Direction d) { return d == Direction::L ? Direction::R : Direction::L; }

struct CompositePath {
    std::string label;
    std::vector<Permutation> vertices;
    std::vector<Step> steps;

    const Permutation& source() const { return vertices.front(); }
    const Permutation& target() const { return vertices.back(); }
    std::string step_string() const {
        std::string s;
        for (Step x : steps) s += to_char(x);
        return s;
    }
};

class CatalogError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline CompositePath resolve_composite_path(const std::vector<Permutation>& vertices,
                                            const std::optional<std::vector<Step>>& annotation = std::nullopt,
                                            const std::string& label = "") {
    if (vertices.empty()) throw CatalogError("path " + label + " has no vertices");
    if (annotation && annotation->size() + 1 != vertices.size())
        throw CatalogError("path " + label + ": step annotation length does not match the vertex list");
    CompositePath p{label, vertices, {}};
    for (std::size_t k = 0; k + 1 < vertices.size(); ++k) {
        const Permutation& x = vertices[k];
        const Permutation& y = vertices[k + 1];
        if (x.size() != y.size()) throw CatalogError("path " + label + ": vertices of different sizes");
        std::vector<Step> options;
        for (Step s : {Step::a, Step::b})
            if (rauzy_move(x, s) == y) options.push_back(s);
        const std::string arrow = x.str() + " -> " + y.str();
        if (options.empty()) throw CatalogError("path " + label + ": " + arrow + " is not an edge of the Rauzy diagram");
        if (annotation) {
            Step s = (*annotation)[k];
            if (std::find(options.begin(), options.end(), s) == options.end())
                throw CatalogError("path " + label + ": annotated step does not realize " + arrow);
            p.steps.push_back(s);
        } else if (options.size() > 1) {
            throw CatalogError("path " + label + ": ambiguous arrow " + arrow + " (both a and b); add a step annotation");
        } else {
            p.steps.push_back(options.front());
        }
    }
    return p;
}

inline ConeMatrix path_matrix(const CompositePath& p) {
    ConeMatrix M = ConeMatrix::identity(p.source().size());
    for (std::size_t k = 0; k < p.steps.size(); ++k) M = M * step_matrix(p.vertices[k], p.steps[k]);
    return M;
}

struct Transition {
    std::vector<std::string> labels;
    std::string target;
    CompositePath path;
    ConeMatrix matrix;
};

struct BuildingBlock {
    std::string id;
    Permutation perm;
    std::optional<Transition> left;
    std::optional<Transition> right;
    bool fail_side = true;  // endpoints declared to lie on opposite sides of the fail plane

    const std::optional<Transition>& side(Direction d) const { return d == Direction::L ? left : right; }
};

struct Catalog {
    std::map<std::string, BuildingBlock> blocks;
    std::map<std::string, CompositePath> paths;
    std::vector<std::string> start_set;
    std::string source_text;

    const BuildingBlock& block(const std::string& id) const {
        auto it = blocks.find(id);
        if (it == blocks.end()) throw std::out_of_range("unknown block " + id);
        return it->second;
    }
    const Transition& transition(const std::string& id, Direction d) const {
        const auto& t = block(id).side(d);
        if (!t) throw std::out_of_range(std::string("block ") + id + " has no " + to_char(d) + " successor");
        return *t;
    }
    bool has_transition(const std::string& id, Direction d) const { return block(id).side(d).has_value(); }
};

namespace detail {

inline Transition build_transition(const Catalog& c, const std::string& id, const Permutation& perm,
                                   const std::vector<std::string>& labels, const std::string& target) {
    if (labels.empty()) throw CatalogError("block " + id + ": empty path list");
    CompositePath whole{"", {perm}, {}};
    for (const auto& lab : labels) {
        const Permutation& cur = whole.vertices.back();
        CompositePath piece;
        if (lab == "a" || lab == "b") {
            Step s = step_from_char(lab[0]);
            piece = CompositePath{lab, {cur, rauzy_move(cur, s)}, {s}};
        } else {
            auto it = c.paths.find(lab);
            if (it == c.paths.end()) throw CatalogError("block " + id + ": unknown path label '" + lab + "'");
            piece = it->second;
        }
        if (piece.source() != cur)
            throw CatalogError("block " + id + ": path " + lab + " starts at " + piece.source().str() + ", expected " +
                               cur.str());
        whole.vertices.insert(whole.vertices.end(), piece.vertices.begin() + 1, piece.vertices.end());
        whole.steps.insert(whole.steps.end(), piece.steps.begin(), piece.steps.end());
        whole.label += (whole.label.empty() ? "" : "+") + lab;
    }
    auto tgt = c.blocks.find(target);
    if (tgt == c.blocks.end()) throw CatalogError("block " + id + ": successor '" + target + "' is not in the catalog");
    if (tgt->second.perm != whole.target())
        throw CatalogError("block " + id + ": path ends at " + whole.target().str() + " but successor " + target +
                           " has permutation " + tgt->second.perm.str());
    ConeMatrix M = path_matrix(whole);
    return Transition{labels, target, std::move(whole), std::move(M)};
}

inline std::vector<std::string> label_list(const nlohmann::json& j, const std::string& where) {
    if (j.is_string()) return {j.get<std::string>()};
    if (!j.is_array()) throw CatalogError(where + ": expected a list of path labels");
    std::vector<std::string> out;
    for (const auto& x : j) {
        if (!x.is_string()) throw CatalogError(where + ": path labels must be strings");
        out.push_back(x.get<std::string>());
    }
    return out;
}

}  // namespace detail

inline Catalog load_catalog(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("paths") || !doc.contains("blocks"))
        throw CatalogError("catalog document needs 'paths' and 'blocks' sections");
    Catalog c;
    for (const auto& [label, entry] : doc.at("paths").items()) {
        nlohmann::json verts = entry.is_object() ? entry.value("vertices", nlohmann::json()) : entry;
        if (!verts.is_array()) throw CatalogError("path " + label + ": expected a vertex list");
        std::vector<Permutation> vs;
        for (const auto& v : verts) {
            if (!v.is_string()) throw CatalogError("path " + label + ": vertices must be strings");
            vs.push_back(Permutation::parse(v.get<std::string>()));
        }
        std::optional<std::vector<Step>> ann;
        if (entry.is_object() && entry.contains("steps")) {
            std::vector<Step> st;
            for (char ch : entry.at("steps").get<std::string>()) st.push_back(step_from_char(ch));
            ann = st;
        }
        for (const auto& v : vs)
            if (!class_4321().contains(v)) throw CatalogError("path " + label + ": " + v.str() + " is outside the class of (4321)");
        c.paths.emplace(label, resolve_composite_path(vs, ann, label));
    }
    const auto& blocks = doc.at("blocks");
    if (!blocks.is_object()) throw CatalogError("'blocks' must be an object");
    for (const auto& [id, entry] : blocks.items()) {
        if (!entry.is_object() || !entry.contains("perm")) throw CatalogError("block " + id + ": missing 'perm'");
        BuildingBlock b;
        b.id = id;
        b.perm = Permutation::parse(entry.at("perm").get<std::string>());
        if (!class_4321().contains(b.perm)) throw CatalogError("block " + id + ": " + b.perm.str() + " is outside the class of (4321)");
        b.fail_side = entry.value("fail_side", true);
        c.blocks.emplace(id, std::move(b));
    }
    for (const auto& [id, entry] : blocks.items()) {
        BuildingBlock& b = c.blocks.at(id);
        for (Direction d : {Direction::L, Direction::R}) {
            const std::string key = d == Direction::L ? "left" : "right";
            const bool has_path = entry.contains(key), has_target = entry.contains(key + "_target");
            if (!has_path && !has_target) continue;
            if (has_path != has_target) throw CatalogError("block " + id + ": '" + key + "' and '" + key + "_target' go together");
            auto t = detail::build_transition(c, id, b.perm, detail::label_list(entry.at(key), "block " + id),
                                              entry.at(key + "_target").get<std::string>());
            (d == Direction::L ? b.left : b.right) = std::move(t);
        }
    }
    if (doc.contains("start_set"))
        for (const auto& s : doc.at("start_set")) {
            std::string id = s.get<std::string>();
            if (!c.blocks.count(id)) throw CatalogError("start set names unknown block " + id);
            c.start_set.push_back(id);
        }
    c.source_text = doc.dump();
    return c;
}

inline Catalog load_catalog_string(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CatalogError(std::string("catalog is not valid JSON: ") + e.what());
    }
    try {
        return load_catalog(doc);
    } catch (const nlohmann::json::exception& e) {
        throw CatalogError(std::string("catalog schema error: ") + e.what());
    }
}

inline Catalog load_catalog_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read catalog file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_catalog_string(ss.str());
}

struct BlockSequence {
    std::vector<std::string> blocks;     // visited blocks, first to last
    std::vector<Direction> directions;   // one per transition
    ConeMatrix matrix;

    int depth() const {
        int d = 0;
        for (std::size_t i = 1; i < directions.size(); ++i)
            if (directions[i] != directions[i - 1]) ++d;
        return d;
    }
    std::string str() const {
        std::string s;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            if (i) s += std::string(" -") + to_char(directions[i - 1]) + "-> ";
            s += blocks[i];
        }
        return s;
    }
};

inline BlockSequence follow(const Catalog& c, const std::string& start, const std::vector<Direction>& dirs) {
    BlockSequence seq{{start}, {}, ConeMatrix::identity(c.block(start).perm.size())};
    for (Direction d : dirs) {
        const Transition& t = c.transition(seq.blocks.back(), d);
        seq.matrix = seq.matrix * t.matrix;
        seq.directions.push_back(d);
        seq.blocks.push_back(t.target);
    }
    return seq;
}

// A loop is reported as the blocks b1..bk (without repeating b1) and k transitions.
inline BlockSequence loop_at(const Catalog& c, const std::vector<std::string>& cycle, Direction d) {
    BlockSequence s{cycle, std::vector<Direction>(cycle.size(), d), ConeMatrix::identity(c.block(cycle.front()).perm.size())};
    for (const auto& b : cycle) s.matrix = s.matrix * c.transition(b, d).matrix;
    return s;
}

inline BlockSequence rotate_loop(const Catalog& c, const BlockSequence& loop, const std::string& start) {
    auto it = std::find(loop.blocks.begin(), loop.blocks.end(), start);
    if (it == loop.blocks.end()) throw std::invalid_argument("block " + start + " is not on the loop");
    std::vector<std::string> cyc(it, loop.blocks.end());
    cyc.insert(cyc.end(), loop.blocks.begin(), it);
    return loop_at(c, cyc, loop.directions.front());
}

inline std::vector<BlockSequence> enumerate_minimal_depth0_loops(const Catalog& c) {
    std::vector<BlockSequence> out;
    for (Direction d : {Direction::L, Direction::R}) {
        std::set<std::string> reported;
        for (const auto& [id, b] : c.blocks) {
            std::vector<std::string> walk{id};
            std::string x = id;
            while (true) {
                if (!c.has_transition(x, d)) break;
                x = c.transition(x, d).target;
                auto pos = std::find(walk.begin(), walk.end(), x);
                if (pos != walk.end()) {
                    std::vector<std::string> cyc(pos, walk.end());
                    auto mn = std::min_element(cyc.begin(), cyc.end());
                    std::rotate(cyc.begin(), mn, cyc.end());
                    if (reported.insert(cyc.front()).second) out.push_back(loop_at(c, cyc, d));
                    break;
                }
                walk.push_back(x);
            }
        }
    }
    return out;
}

struct PropertyRecord {
    std::string name;
    bool passed = false;
    nlohmann::json details;
};

struct VerificationReport {
    int depth_bound = 0;
    std::vector<PropertyRecord> properties;

    bool passed() const {
        return std::all_of(properties.begin(), properties.end(), [](const PropertyRecord& p) { return p.passed; });
    }
    const PropertyRecord& property(const std::string& name) const {
        for (const auto& p : properties)
            if (p.name == name) return p;
        throw std::out_of_range("no property " + name);
    }
    nlohmann::json to_json() const {
        nlohmann::json j;
        j["depth_bound"] = depth_bound;
        j["passed"] = passed();
        for (const auto& p : properties) j["properties"].push_back({{"name", p.name}, {"passed", p.passed}, {"details", p.details}});
        return j;
    }
};

inline nlohmann::json matrix_json(const ConeMatrix& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : M.rows()) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& x : r) row.push_back(x.str());
        rows.push_back(row);
    }
    return rows;
}

namespace detail {

inline bool columns_have_two_nonzeros(const ConeMatrix& M) {
    for (int j = 1; j <= M.size(); ++j) {
        int nz = 0;
        for (int i = 1; i <= M.size(); ++i)
            if (M(i, j) != 0) ++nz;
        if (nz < 2) return false;
    }
    return true;
}

struct ApCertificate {
    BlockSequence sequence;
    std::string kind;  // "weakly positive" or "almost positive"
    int tau = 0;
};

struct ApFailure {
    BlockSequence sequence;
    std::string reason;
};

struct ApResult {
    std::vector<ApCertificate> certificates;
    std::vector<ApFailure> failures;
    int max_uncertified_depth = 0;
    int max_certified_length = 0;
};

// Depth-first search over block sequences keyed by (block, support of the product).
// Supports of products depend only on supports of the factors, so a repeated key
// means the continuation repeats: with a direction switch inside the repeated
// segment this yields sequences of unbounded depth that are never certified.
inline void ap_search(const Catalog& c, BlockSequence& seq, std::map<std::pair<std::string, std::vector<bool>>, int>& on_path,
                      int depth_bound, ApResult& res) {
    constexpr std::size_t length_cap = 64;
    for (Direction d : {Direction::L, Direction::R}) {
        const std::string& cur = seq.blocks.back();
        if (!c.has_transition(cur, d)) {
            BlockSequence s = seq;
            res.failures.push_back({s, std::string("missing ") + to_char(d) + " successor of " + cur});
            continue;
        }
        const Transition& t = c.transition(cur, d);
        BlockSequence next = seq;
        next.matrix = seq.matrix * t.matrix;
        next.directions.push_back(d);
        next.blocks.push_back(t.target);
        const bool wp = is_weakly_positive(next.matrix);
        const auto ap = is_almost_positive(next.matrix);
        if (wp || ap.almost_positive) {
            res.max_certified_length = std::max(res.max_certified_length, static_cast<int>(next.directions.size()));
            res.certificates.push_back({next, wp ? "weakly positive" : "almost positive", ap.tau});
            continue;
        }
        auto key = std::make_pair(t.target, next.matrix.support());
        auto hit = on_path.find(key);
        if (hit != on_path.end()) {
            bool switches = false;
            for (std::size_t i = static_cast<std::size_t>(hit->second) + 1; i < next.directions.size(); ++i)
                if (next.directions[i] != next.directions[i - 1]) switches = true;
            if (switches) res.failures.push_back({next, "repeating segment with a direction switch never certifies"});
            continue;
        }
        res.max_uncertified_depth = std::max(res.max_uncertified_depth, next.depth());
        if (next.depth() >= depth_bound) {
            res.failures.push_back({next, "depth bound reached without certificate"});
            continue;
        }
        if (next.directions.size() >= length_cap) {
            res.failures.push_back({next, "length cap reached without certificate"});
            continue;
        }
        on_path.emplace(key, static_cast<int>(next.directions.size()));
        ap_search(c, next, on_path, depth_bound, res);
        on_path.erase(key);
    }
}

inline nlohmann::json sequence_json(const BlockSequence& s) {
    std::string dirs;
    for (Direction d : s.directions) dirs += to_char(d);
    return {{"blocks", s.blocks}, {"directions", dirs}, {"depth", s.depth()}, {"matrix", matrix_json(s.matrix)}};
}

}  // namespace detail

inline VerificationReport verify_catalog(const Catalog& c, int depth_bound = 8) {
    if (depth_bound < 1) throw std::invalid_argument("depth bound must be positive");
    VerificationReport rep;
    rep.depth_bound = depth_bound;

    {  // Transitivity
        PropertyRecord p{"Transitivity", true, {}};
        for (const auto& v : class_4321().vertices) {
            std::vector<std::string> ids;
            for (const auto& [id, b] : c.blocks)
                if (b.perm == v) ids.push_back(id);
            if (ids.empty()) p.passed = false;
            p.details["permutations"].push_back({{"perm", v.str()}, {"blocks", ids}});
        }
        for (const auto& [id, b] : c.blocks) p.details["fail_side_flags"][id] = b.fail_side;
        rep.properties.push_back(std::move(p));
    }
    {  // Completeness
        PropertyRecord p{"Completeness", true, {}};
        p.details["missing"] = nlohmann::json::array();
        for (const auto& [id, b] : c.blocks)
            for (Direction d : {Direction::L, Direction::R})
                if (!b.side(d)) {
                    p.passed = false;
                    p.details["missing"].push_back({{"block", id}, {"direction", std::string(1, to_char(d))}});
                }
        rep.properties.push_back(std::move(p));
    }
    const auto loops = enumerate_minimal_depth0_loops(c);
    {  // Combining Loops
        PropertyRecord p{"Combining Loops", true, {}};
        for (const auto& l : loops) {
            auto cls = classify_combining(l.matrix);
            bool diag = true;
            for (int i = 1; i <= l.matrix.size(); ++i)
                if (l.matrix(i, i) == 0) diag = false;
            if (!cls.combining) p.passed = false;
            nlohmann::json rec = detail::sequence_json(l);
            rec["combining"] = cls.combining;
            rec["active"] = cls.active;
            rec["passive"] = cls.passive;
            rec["idle"] = cls.idle ? nlohmann::json(*cls.idle) : nlohmann::json();
            rec["positive_diagonal"] = diag;
            if (!cls.combining) rec["reason"] = cls.failure_reason;
            p.details["loops"].push_back(rec);
        }
        rep.properties.push_back(std::move(p));
    }
    {  // Isolated Idle
        PropertyRecord p{"Isolated Idle", true, {}};
        p.details["checked"] = nlohmann::json::array();
        for (const auto& l : loops) {
            auto cls = classify_combining(l.matrix);
            if (!cls.idle) continue;
            const Direction ld = l.directions.front();
            for (const auto& b : l.blocks)
                for (Direction d2 : {Direction::L, Direction::R})
                    for (Direction d3 : {Direction::L, Direction::R}) {
                        std::vector<Direction> dirs{opposite(ld), d2, d3};
                        nlohmann::json rec{{"loop", detail::sequence_json(l)}, {"leaving_from", b}};
                        try {
                            BlockSequence s = follow(c, b, dirs);
                            bool ok = detail::columns_have_two_nonzeros(s.matrix);
                            if (!ok) p.passed = false;
                            rec["sequence"] = detail::sequence_json(s);
                            rec["passed"] = ok;
                        } catch (const std::out_of_range& e) {
                            p.passed = false;
                            rec["passed"] = false;
                            rec["reason"] = e.what();
                        }
                        p.details["checked"].push_back(rec);
                    }
        }
        rep.properties.push_back(std::move(p));
    }
    {  // Almost Positivity
        PropertyRecord p{"Almost Positivity", true, {}};
        std::vector<std::string> starts = c.start_set;
        if (starts.empty())
            for (const auto& [id, b] : c.blocks) starts.push_back(id);
        std::vector<std::future<detail::ApResult>> jobs;
        for (const auto& s : starts)
            jobs.push_back(std::async(std::launch::async, [&c, s, depth_bound] {
                detail::ApResult r;
                BlockSequence seq{{s}, {}, ConeMatrix::identity(c.block(s).perm.size())};
                std::map<std::pair<std::string, std::vector<bool>>, int> on_path;
                on_path.emplace(std::make_pair(s, seq.matrix.support()), 0);
                detail::ap_search(c, seq, on_path, depth_bound, r);
                return r;
            }));
        int certs = 0, max_depth = 0, max_len = 0;
        p.details["failures"] = nlohmann::json::array();
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            detail::ApResult r = jobs[i].get();
            for (const auto& cert : r.certificates) {
                nlohmann::json rec = detail::sequence_json(cert.sequence);
                rec["kind"] = cert.kind;
                if (cert.kind == "almost positive") rec["tau"] = cert.tau;
                p.details["certificates"].push_back(rec);
            }
            for (const auto& f : r.failures) {
                nlohmann::json rec = detail::sequence_json(f.sequence);
                rec["reason"] = f.reason;
                p.details["failures"].push_back(rec);
            }
            if (!r.failures.empty()) p.passed = false;
            certs += static_cast<int>(r.certificates.size());
            max_depth = std::max(max_depth, r.max_uncertified_depth);
            max_len = std::max(max_len, r.max_certified_length);
        }
        p.details["start_set"] = starts;
        p.details["certificate_count"] = certs;
        p.details["max_uncertified_depth"] = max_depth;
        p.details["measured_c"] = max_depth + 1;
        p.details["max_certified_length"] = max_len;
        rep.properties.push_back(std::move(p));
    }
    return rep;
}

}  // namespace rauzy
