#include <rauzy.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#ifndef RAUZY_DEFAULT_CATALOG
#define RAUZY_DEFAULT_CATALOG "data/default_catalog.json"
#endif

namespace {

using namespace rauzy;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct RunConfig {
    std::string catalog = RAUZY_DEFAULT_CATALOG;
    int depth = -1;  // per-command default when negative
    unsigned precision_bits = 256;
    double tolerance = 1e-9;
    int max_steps = 200;
    unsigned seed = 1;
    std::string out;
    std::string svg;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void validate(const RunConfig& cfg) {
    if (cfg.precision_bits < 64) throw UsageError("--precision-bits must be at least 64");
    if (!(cfg.tolerance > 0 && cfg.tolerance < 1)) throw UsageError("--tolerance must lie in (0,1)");
    if (cfg.max_steps < 0) throw UsageError("--max-steps must be nonnegative");
}

// Writes to --out when given, otherwise to stdout.
template <class F>
void emit(const std::string& path, F&& body) {
    if (path.empty()) {
        body(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) throw UsageError("cannot open " + path + " for writing");
    body(os);
}

Catalog load(const RunConfig& cfg) {
    try {
        return load_catalog_file(cfg.catalog);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("catalog " + cfg.catalog + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError("catalog " + cfg.catalog + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
}

IET parse_iet(const std::string& text) {
    try {
        return IET::parse(text);
    } catch (const std::exception& e) {
        throw UsageError("cannot parse IET \"" + text + "\": " + e.what());
    }
}

nlohmann::json rationals_json(const std::vector<Rational>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : v) a.push_back(to_string(x));
    return a;
}

int cmd_verify_catalog(const RunConfig& cfg) {
    Catalog c = load(cfg);
    const int depth_bound = cfg.depth < 0 ? 8 : cfg.depth;
    VerificationReport rep = verify_catalog(c, depth_bound);
    nlohmann::json doc = rep.to_json();
    for (const auto& p : rep.properties) std::cout << (p.passed ? "PASS " : "FAIL ") << p.name << '\n';
    // endpoints need every successor, so sides are only checked on complete catalogs
    nlohmann::json sides = nlohmann::json::array();
    if (rep.property("Completeness").passed) {
        const Rational tol = parse_rational("1/1000000000000000000000000000000");
        for (const auto& f : validate_fail_sides(c, cfg.precision_bits, tol)) {
            sides.push_back({{"block", f.block},
                             {"declared", f.declared},
                             {"side_T1", f.side_T1},
                             {"side_T2", f.side_T2},
                             {"opposite", f.opposite},
                             {"midpoint_residual", to_double(f.midpoint_residual)},
                             {"midpoint_consistency", to_double(f.midpoint_consistency)},
                             {"flagged", !(f.opposite && f.midpoint_consistent)}});
        }
    }
    doc["fail_side_validation"] = sides;
    if (!cfg.out.empty()) emit(cfg.out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
    return rep.passed() ? kOk : kFailure;
}

int cmd_expand(const RunConfig& cfg, const std::string& literal) {
    IET T = parse_iet(literal);
    const int steps = cfg.max_steps;
    emit(cfg.out, [&](std::ostream& os) {
        IET cur = T;
        ConeMatrix M = ConeMatrix::identity(T.size());
        for (int k = 1; k <= steps; ++k) {
            nlohmann::json rec;
            rec["step"] = k;
            rec["perm"] = cur.perm.str();
            InductionOutcome o = rauzy_step(cur);
            rec["delta_plus"] = to_string(o.delta_plus);
            rec["delta_minus"] = to_string(o.delta_minus);
            if (o.is_tie()) {
                rec["type"] = "Tie";
                os << rec.dump() << '\n';
                return;
            }
            M = M * *o.matrix;
            cur = *o.successor;
            rec["type"] = o.step() == Step::a ? "StepA" : "StepB";
            rec["matrix"] = matrix_json(*o.matrix);
            rec["successor"] = rationals_json(cur.lengths.entries());
            rec["successor_perm"] = cur.perm.str();
            rec["max_sin_angle"] = contraction_diagnostics(M).max_sin_angle;
            os << rec.dump() << '\n';
        }
    });
    return kOk;
}

PathApproximation concatenate(const std::vector<PathApproximation>& segs) {
    PathApproximation out;
    const auto k = static_cast<long>(segs.size());
    for (long i = 0; i < k; ++i)
        for (std::size_t j = 0; j < segs[i].breakpoints.size(); ++j) {
            if (i > 0 && j == 0) continue;
            Breakpoint b = segs[i].breakpoints[j];
            b.t = (Rational(i) + b.t) / k;
            out.breakpoints.push_back(std::move(b));
        }
    return out;
}

void write_outputs(const RunConfig& cfg, const std::vector<PathApproximation>& segs) {
    PathApproximation whole = concatenate(segs);
    emit(cfg.out, [&](std::ostream& os) { write_csv(os, whole, cfg.precision_bits); });
    if (!cfg.svg.empty()) {
        std::ofstream os(cfg.svg);
        if (!os) throw UsageError("cannot open " + cfg.svg + " for writing");
        write_svg(os, segs);
    }
}

int cmd_build_path(const RunConfig& cfg, const std::string& root) {
    Catalog c = load(cfg);
    if (!c.blocks.count(root)) throw UsageError("unknown block " + root);
    const int depth = cfg.depth < 0 ? 6 : cfg.depth;
    PathBuildResult res = build_path_with_history(c, root, depth, cfg.precision_bits);
    write_outputs(cfg, {res.path});
    if (!cfg.out.empty()) {
        std::ofstream meta(cfg.out + ".json");
        meta << res.path.metadata.dump(2) << '\n';
    }
    std::cerr << "depth " << depth << ": " << res.path.breakpoints.size() << " breakpoints, last Cauchy sup "
              << res.cauchy.back() << '\n';
    return kOk;
}

int cmd_connect(const RunConfig& cfg, const std::string& a, const std::string& b) {
    Catalog c = load(cfg);
    IET S1 = parse_iet(a), S2 = parse_iet(b);
    Connection conn;
    try {
        conn = connect_endpoints(c, S1, S2, cfg.max_steps, cfg.depth < 0 ? 6 : cfg.depth, cfg.precision_bits);
    } catch (const std::runtime_error& e) {
        std::cerr << "connect: " << e.what() << '\n';
        return kFailure;
    }
    write_outputs(cfg, conn.segments);
    std::cerr << conn.segments.size() << " segment(s) after " << conn.steps << " induction steps\n";
    return kOk;
}

int cmd_certify(const RunConfig& cfg, const std::string& literal) {
    IET T = parse_iet(literal);
    UECertificate cert = certify_unique_ergodicity(T, cfg.max_steps, cfg.tolerance);
    nlohmann::json j{{"verdict", cert.certified() ? "certified" : "inconclusive"},
                     {"steps_checked", cert.steps_checked},
                     {"final_max_sin_angle", cert.final_max_sin_angle},
                     {"tolerance", cert.tolerance},
                     {"dimension", cert.dimension}};
    if (cert.tie_step) j["tie_step"] = *cert.tie_step;
    emit(cfg.out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    return cert.certified() ? kOk : kFailure;
}

Permutation random_permutation(int n, std::mt19937& rng) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = i + 1;
    while (true) {
        std::shuffle(v.begin(), v.end(), rng);
        Permutation p(v);
        if (is_irreducible(p) && !is_degenerate(p) && valid_tuples(p).size() >= 2) return p;
    }
}

int cmd_accessible_chain(const RunConfig& cfg, std::vector<std::string> args, int random_n) {
    Permutation p = Permutation::identity(1);
    std::optional<FourTuple> t1, t2;
    try {
        if (random_n > 0) {
            if (random_n < 4) throw UsageError("--random needs n >= 4");
            std::mt19937 rng(cfg.seed);
            p = random_permutation(random_n, rng);
            auto tuples = valid_tuples(p);
            std::uniform_int_distribution<std::size_t> pick(0, tuples.size() - 1);
            t1 = tuples[pick(rng)];
            t2 = tuples[pick(rng)];
        } else {
            if (args.size() != 3) throw UsageError("accessible-chain needs PERM TUPLE1 TUPLE2 or --random N");
            p = Permutation::parse(args[0]);
            t1 = FourTuple::parse(args[1]);
            t2 = FourTuple::parse(args[2]);
        }
        if (!is_irreducible(p)) throw UsageError(p.str() + " is reducible");
        if (is_degenerate(p)) throw UsageError(p.str() + " is degenerate");
        auto chain = accessible_chain(p, *t1, *t2);
        emit(cfg.out, [&](std::ostream& os) {
            os << "permutation " << p.str() << '\n';
            os << "chain length " << chain.size() << '\n';
            for (std::size_t i = 0; i < chain.size(); ++i) {
                os << chain[i].str();
                if (i + 1 < chain.size()) {
                    auto w = is_accessible_pair(p, chain[i], chain[i + 1]);
                    os << "  -> via r=(" << w->r.first << ',' << w->r.second << ") s=(" << w->s.first << ','
                       << w->s.second << ") merged " << w->merged.str();
                }
                os << '\n';
            }
        });
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return kOk;
}

int cmd_h_alpha(const RunConfig& cfg, const std::string& alpha_text, const std::string& tag) {
    Rational alpha;
    HAlphaPolyline h;
    try {
        alpha = parse_rational(alpha_text);
        h = h_alpha_segment(alpha, h_alpha_case_from_string(tag));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const unsigned digits = decimal_digits(cfg.precision_bits);
    emit(cfg.out, [&](std::ostream& os) {
        os << "x1,x2,x3,x4,y1,y2,y3\n";
        for (std::size_t i = 0; i < h.samples.size(); ++i) {
            for (const auto& x : h.samples[i]) os << to_decimal(x, digits) << ',';
            for (int k = 0; k < 3; ++k) os << to_decimal(h.reduced_samples[i][k], digits) << (k < 2 ? ',' : '\n');
        }
    });
    std::cerr << "end point (" << to_string(h.end[0]) << ", " << to_string(h.end[1]) << ", " << to_string(h.end[2])
              << ")\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact Rauzy-Veech induction and building-block path construction for interval exchanges"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    app.add_option("--catalog", cfg.catalog, "building-block catalog (JSON)")->envname("RAUZY_CATALOG");
    app.add_option("--depth", cfg.depth, "tree depth or verification depth bound")->envname("RAUZY_DEPTH");
    app.add_option("--precision-bits", cfg.precision_bits, "binary precision of realized points")
        ->envname("RAUZY_PRECISION_BITS");
    app.add_option("--tolerance", cfg.tolerance, "angle tolerance for certification")->envname("RAUZY_TOLERANCE");
    app.add_option("--max-steps", cfg.max_steps, "induction step budget")->envname("RAUZY_MAX_STEPS");
    app.add_option("--seed", cfg.seed, "seed for randomized inputs")->envname("RAUZY_SEED");
    app.add_option("--out", cfg.out, "output file (stdout when omitted)")->envname("RAUZY_OUT");
    app.add_option("--svg", cfg.svg, "SVG output for path commands")->envname("RAUZY_SVG");

    auto* verify = app.add_subcommand("verify-catalog", "check the five catalog properties");
    std::string literal, literal2, root = "A1", alpha, tag = "merged_first";
    auto* expand = app.add_subcommand("expand", "print a Rauzy induction trace");
    expand->add_option("iet", literal, "IET literal, e.g. \"(4321) 1/4,1/4,1/4,1/4\"")->required();
    auto* build = app.add_subcommand("build-path", "build the approximating path from a root block");
    build->add_option("root", root, "root block id");
    auto* connect = app.add_subcommand("connect", "connect two realized IETs");
    connect->add_option("from", literal, "first IET")->required();
    connect->add_option("to", literal2, "second IET")->required();
    auto* certify = app.add_subcommand("certify", "certify unique ergodicity by column contraction");
    certify->add_option("iet", literal, "IET literal")->required();
    auto* chain = app.add_subcommand("accessible-chain", "link two valid 4-tuples by accessible steps");
    std::vector<std::string> chain_args;
    int random_n = 0;
    chain->add_option("args", chain_args, "PERM TUPLE1 TUPLE2");
    chain->add_option("--random", random_n, "draw a random permutation of this size using --seed");
    auto* halpha = app.add_subcommand("h-alpha", "sample the constant rotation number segment");
    halpha->add_option("alpha", alpha, "alpha in (0,1), rational")->required();
    halpha->add_option("--case", tag, "merged_first or merged_last");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        validate(cfg);
        if (*verify) return cmd_verify_catalog(cfg);
        if (*expand) return cmd_expand(cfg, literal);
        if (*build) return cmd_build_path(cfg, root);
        if (*connect) return cmd_connect(cfg, literal, literal2);
        if (*certify) return cmd_certify(cfg, literal);
        if (*chain) return cmd_accessible_chain(cfg, chain_args, random_n);
        if (*halpha) return cmd_h_alpha(cfg, alpha, tag);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const PrecisionExhausted& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
