#include "qfiso/cli.hpp"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qfiso/realize.hpp"

using json = nlohmann::ordered_json;

namespace qfiso {

namespace {

struct BadInput : std::runtime_error {
    explicit BadInput(const std::string& w) : std::runtime_error(w) {}
};

Rat parse_rat(const json& v) {
    if (v.is_number_integer()) return Rat(static_cast<long>(v.get<long long>()));
    if (!v.is_string()) throw BadInput("rational entries must be \"num/den\" strings");
    try {
        Rat r(v.get<std::string>());
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        throw BadInput("cannot parse rational \"" + v.get<std::string>() + "\"");
    }
}

std::string rat_str(const Rat& r) { return r.get_str(); }

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw BadInput(path + ": " + e.what());
    }
    return j;
}

MatQ load_matrix(const std::string& path) {
    json j = load_json(path);
    if (!j.is_object() || !j.contains("n") || !j.contains("entries"))
        throw BadInput(path + ": expected {\"n\": int, \"entries\": [[...]]}");
    int n = j["n"].get<int>();
    const json& rows = j["entries"];
    if (n < 1 || !rows.is_array() || static_cast<int>(rows.size()) != n)
        throw BadInput(path + ": entries must hold n rows");
    MatQ m(n, n);
    for (int i = 0; i < n; ++i) {
        if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n)
            throw BadInput(path + ": row " + std::to_string(i) + " must hold n entries");
        for (int k = 0; k < n; ++k) m.at(i, k) = parse_rat(rows[i][k]);
    }
    return m;
}

json matrix_json(const MatQ& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < m.cols(); ++k) row.push_back(rat_str(m.at(i, k)));
        rows.push_back(std::move(row));
    }
    return json{{"n", m.rows()}, {"entries", std::move(rows)}};
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw BadInput("cannot write " + path);
    out << j.dump(2) << "\n";
}

std::string fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string matrix_hash(const MatQ& m) {
    std::ostringstream os;
    os << m.rows();
    for (int i = 0; i < m.rows(); ++i)
        for (int k = 0; k < m.cols(); ++k) os << "," << rat_str(m.at(i, k));
    return fnv1a(os.str());
}

json poly_json(const PolyQ& f) {
    json a = json::array();
    for (int i = 0; i <= f.degree(); ++i) a.push_back(rat_str(f.coeff(i)));
    return a;
}

PolyQ parse_poly(const json& v) {
    if (!v.is_array() || v.empty()) throw BadInput("polynomials are nonempty coefficient arrays");
    std::vector<Rat> c;
    for (const auto& e : v) c.push_back(parse_rat(e));
    return PolyQ(std::move(c));
}

const char* tag_name(FactorTag t) {
    switch (t) {
        case FactorTag::PlusOne: return "plus-one";
        case FactorTag::MinusOne: return "minus-one";
        case FactorTag::SelfReciprocal: return "self-reciprocal";
        case FactorTag::Paired: return "paired";
    }
    return "unknown";
}

FactorTag parse_tag(const std::string& s) {
    if (s == "plus-one") return FactorTag::PlusOne;
    if (s == "minus-one") return FactorTag::MinusOne;
    if (s == "self-reciprocal") return FactorTag::SelfReciprocal;
    if (s == "paired") return FactorTag::Paired;
    throw BadInput("unknown block type \"" + s + "\"");
}

json quad_json(const QuadInvariant& q) {
    return json{{"dim", q.dim}, {"det", rat_str(q.det_class.rep)}, {"hasse", q.hasse}};
}

json herm_json(const HermInvariant& h) {
    return json{{"kind", h.kind == HermCase::Field ? "field" : "split"},
                {"rank", h.rank},
                {"det_is_norm", h.det_is_norm}};
}

json invariant_json(const MilnorInvariant& inv) {
    json factors = json::array();
    for (const auto& f : inv.factors) {
        json levels = json::array();
        for (const auto& l : f.levels) {
            json lv{{"level", l.level}, {"rank", l.rank}};
            if (l.quad) lv["quad"] = quad_json(*l.quad);
            if (l.herm) lv["herm"] = herm_json(*l.herm);
            levels.push_back(std::move(lv));
        }
        factors.push_back(json{{"factor", poly_json(f.factor)},
                               {"type", tag_name(f.tag)},
                               {"multiplicity", f.multiplicity},
                               {"levels", std::move(levels)}});
    }
    return json{{"char_poly", poly_json(inv.char_poly)},
                {"factors", std::move(factors)},
                {"m0", inv.m_0},
                {"m1", inv.m_1},
                {"m2", inv.m_2}};
}

json verdict_json(const Verdict& v) {
    json j{{"single_class", v.single_class},
           {"condition", condition_name(v.condition)},
           {"failing", fail_tag_name(v.failing)}};
    if (v.odd_level) j["odd_level"] = *v.odd_level;
    if (v.residual) j["residual"] = quad_json(*v.residual);
    return j;
}

int default_precision() {
    if (const char* env = std::getenv("MILNOR_PRECISION")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 40;
}

std::vector<PolyQ> load_certificate(const std::string& path) {
    json j = load_json(path);
    if (!j.is_array()) throw BadInput(path + ": certificate is an array of polynomials");
    std::vector<PolyQ> out;
    for (const auto& e : j) out.push_back(parse_poly(e));
    return out;
}

std::vector<BlockSpec> load_spec(const std::string& path) {
    json j = load_json(path);
    if (!j.is_object() || !j.contains("blocks") || !j["blocks"].is_array())
        throw BadInput(path + ": expected {\"blocks\": [...]}");
    std::vector<BlockSpec> out;
    for (const auto& b : j["blocks"]) {
        BlockSpec spec;
        spec.factor = parse_poly(b.at("factor"));
        spec.tag = parse_tag(b.at("type").get<std::string>());
        spec.level = b.at("level").get<int>();
        spec.rank = b.at("rank").get<int>();
        if (b.contains("residual"))
            for (const auto& e : b["residual"]) spec.residual.push_back(parse_rat(e));
        out.push_back(std::move(spec));
    }
    return out;
}

json analyze_report(const MatQ& gram, const MatQ& iso, const PadicContext& ctx,
                    const std::vector<PolyQ>* cert) {
    IsometryPair pair(QuadSpace(gram, ctx), iso);
    MilnorAnalysis an = analyze(pair, cert);
    Verdict v = decide_single_class(an.invariant, ctx);
    json j{{"prime", static_cast<long>(ctx.p)},
           {"precision", ctx.precision},
           {"working_precision", an.working_precision},
           {"input", json{{"gram_hash", matrix_hash(gram)}, {"iso_hash", matrix_hash(iso)}}},
           {"invariant", invariant_json(an.invariant)},
           {"verdict", verdict_json(v)}};
    return j;
}

struct CommonArgs {
    std::string gram, iso, certificate;
    long prime = 0;
    int precision = 0;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--gram", a.gram, "gram matrix JSON file")->required();
    cmd->add_option("--iso", a.iso, "isometry matrix JSON file")->required();
    cmd->add_option("--prime", a.prime, "residue prime p")->required();
    cmd->add_option("--precision", a.precision, "working p-adic precision");
    cmd->add_option("--certificate", a.certificate, "irreducibility certificate JSON file");
}

PadicContext make_ctx(long prime, int precision) {
    if (prime < 2) throw BadInput("--prime must be a prime >= 2");
    return PadicContext(static_cast<unsigned long>(prime),
                        precision > 0 ? precision : default_precision());
}

int run_selftest(std::ostream& out);

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Milnor conjugacy invariants of p-adic isometries"};
    app.require_subcommand(1);

    CommonArgs one;
    CLI::App* analyze_cmd = app.add_subcommand("analyze", "print the invariant report");
    add_common(analyze_cmd, one);
    CLI::App* decide_cmd = app.add_subcommand("decide", "report plus single-class exit code");
    add_common(decide_cmd, one);

    struct {
        std::string a_gram, a_iso, b_gram, b_iso;
        long prime = 0;
        int precision = 0;
    } cmp;
    CLI::App* compare_cmd = app.add_subcommand("compare", "GL- and O-conjugacy of two pairs");
    compare_cmd->add_option("--a-gram", cmp.a_gram)->required();
    compare_cmd->add_option("--a-iso", cmp.a_iso)->required();
    compare_cmd->add_option("--b-gram", cmp.b_gram)->required();
    compare_cmd->add_option("--b-iso", cmp.b_iso)->required();
    compare_cmd->add_option("--prime", cmp.prime)->required();
    compare_cmd->add_option("--precision", cmp.precision);

    struct {
        std::string spec, out_gram = "gram.json", out_iso = "iso.json";
        long prime = 0;
        int precision = 0;
    } rz;
    CLI::App* realize_cmd = app.add_subcommand("realize", "build a pair from a block spec");
    realize_cmd->add_option("--spec", rz.spec, "block spec JSON file")->required();
    realize_cmd->add_option("--prime", rz.prime)->required();
    realize_cmd->add_option("--precision", rz.precision);
    realize_cmd->add_option("--out-gram", rz.out_gram);
    realize_cmd->add_option("--out-iso", rz.out_iso);

    CommonArgs cx;
    std::string cx_out_gram = "witness_gram.json", cx_out_iso = "witness_iso.json";
    std::string cx_out_recipe = "recipe.json";
    CLI::App* counter_cmd = app.add_subcommand("counterexample", "emit a non-conjugate witness");
    add_common(counter_cmd, cx);
    counter_cmd->add_option("--out-gram", cx_out_gram);
    counter_cmd->add_option("--out-iso", cx_out_iso);
    counter_cmd->add_option("--out-recipe", cx_out_recipe);

    CLI::App* selftest_cmd = app.add_subcommand("selftest", "run the embedded property corpus");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (*analyze_cmd || *decide_cmd) {
            PadicContext ctx = make_ctx(one.prime, one.precision);
            std::vector<PolyQ> cert;
            bool have_cert = !one.certificate.empty();
            if (have_cert) cert = load_certificate(one.certificate);
            json report = analyze_report(load_matrix(one.gram), load_matrix(one.iso), ctx,
                                         have_cert ? &cert : nullptr);
            out << report.dump(2) << "\n";
            if (*decide_cmd && !report["verdict"]["single_class"].get<bool>()) return 3;
            return 0;
        }
        if (*compare_cmd) {
            PadicContext ctx = make_ctx(cmp.prime, cmp.precision);
            IsometryPair a(QuadSpace(load_matrix(cmp.a_gram), ctx), load_matrix(cmp.a_iso));
            IsometryPair b(QuadSpace(load_matrix(cmp.b_gram), ctx), load_matrix(cmp.b_iso));
            bool gl = gl_conjugate(a, b);
            bool isom = is_isometric(a.space, b.space);
            bool o = isom && o_conjugate(a, b);
            out << json{{"gl_conjugate", gl}, {"ambient_isometric", isom}, {"o_conjugate", o}}
                       .dump(2)
                << "\n";
            if (gl && o) return 0;
            if (gl) return 3;
            return 4;
        }
        if (*realize_cmd) {
            PadicContext ctx = make_ctx(rz.prime, rz.precision);
            IsometryPair pair = assemble(load_spec(rz.spec), ctx);
            write_json(rz.out_gram, matrix_json(pair.space.gram));
            write_json(rz.out_iso, matrix_json(pair.iso));
            out << json{{"dim", pair.dim()}, {"gram", rz.out_gram}, {"iso", rz.out_iso}}.dump(2)
                << "\n";
            return 0;
        }
        if (*counter_cmd) {
            PadicContext ctx = make_ctx(cx.prime, cx.precision);
            std::vector<PolyQ> cert;
            bool have_cert = !cx.certificate.empty();
            if (have_cert) cert = load_certificate(cx.certificate);
            IsometryPair pair(QuadSpace(load_matrix(cx.gram), ctx), load_matrix(cx.iso));
            auto w = counterexample(pair, have_cert ? &cert : nullptr);
            if (!w) {
                err << "the conjugacy class is single: no witness exists\n";
                return 5;
            }
            write_json(cx_out_gram, matrix_json(w->witness.space.gram));
            write_json(cx_out_iso, matrix_json(w->witness.iso));
            json recipe{{"recipe", recipe_name(w->recipe.kind)}};
            if (w->recipe.gamma) recipe["gamma"] = rat_str(*w->recipe.gamma);
            if (w->recipe.delta) recipe["delta"] = rat_str(*w->recipe.delta);
            if (w->recipe.xi) recipe["xi"] = rat_str(*w->recipe.xi);
            if (w->recipe.eta) recipe["eta"] = rat_str(*w->recipe.eta);
            if (w->recipe.alpha) recipe["alpha"] = rat_str(*w->recipe.alpha);
            if (w->recipe.herm_twist) recipe["herm_twist"] = poly_json(*w->recipe.herm_twist);
            write_json(cx_out_recipe, recipe);
            recipe["gram"] = cx_out_gram;
            recipe["iso"] = cx_out_iso;
            out << recipe.dump(2) << "\n";
            return 0;
        }
        if (*selftest_cmd) return run_selftest(out);
    } catch (const NotPRegular& e) {
        err << e.what() << "\nhint: pass --certificate with the exact irreducible factors\n";
        return 2;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return 2;
    }
    return 2;
}

namespace {

int run_selftest(std::ostream& out) {
    int checks = 0;
    auto expect = [&](bool ok, const char* what) {
        ++checks;
        if (!ok) throw std::logic_error(std::string("selftest: ") + what);
    };

    for (unsigned long p : {2ul, 3ul, 5ul}) {
        PadicContext ctx(p, 40);
        for (long a : {1l, -1l, 2l, -2l, 3l, -3l, static_cast<long>(p)})
            for (long b : {1l, -1l, 2l, -2l, 3l, -3l, static_cast<long>(p)})
                expect(hilbert_symbol(Rat(a), Rat(b), ctx) ==
                           (conic_oracle(Rat(a), Rat(b), ctx) ? 1 : -1),
                       "hilbert symbol disagrees with the conic oracle");
    }

    PolyQ xm1 = PolyQ::linear_root(Rat(1));
    PolyQ xp1 = PolyQ::linear_root(Rat(-1));
    PolyQ q({Rat(1), Rat(-3), Rat(1)});
    {
        PadicContext ctx(5, 40);
        std::vector<std::vector<BlockSpec>> specs = {
            {{xm1, FactorTag::MinusOne, 1, 2, {Rat(1), Rat(2)}}},
            {{xm1, FactorTag::MinusOne, 3, 1, {Rat(1)}}},
            {{xp1, FactorTag::PlusOne, 2, 2, {}}},
            {{q, FactorTag::SelfReciprocal, 1, 1, {Rat(1)}}},
            {{q, FactorTag::SelfReciprocal, 2, 1, {Rat(2)}}},
            {{PolyQ::linear_root(Rat(2)), FactorTag::Paired, 1, 1, {}},
             {xm1, FactorTag::MinusOne, 1, 1, {Rat(1)}}},
        };
        for (const auto& s : specs) {
            IsometryPair pair = assemble(s, ctx);
            MilnorInvariant inv = milnor_invariant(pair);
            int dim = 0;
            for (const auto& f : inv.factors)
                for (const auto& l : f.levels) dim += f.factor.degree() * l.level * l.rank;
            // paired records keep one half per record but cover both halves
            for (const auto& f : inv.factors)
                if (f.tag == FactorTag::Paired)
                    for (const auto& l : f.levels) dim += f.factor.degree() * l.level * l.rank;
            expect(dim == pair.dim(), "realized dimension bookkeeping");
            expect(inv.char_poly == char_poly(pair.iso), "characteristic polynomial round trip");
        }
    }

    {
        PadicContext ctx(5, 40);
        std::vector<std::vector<BlockSpec>> corpus = {
            {{xm1, FactorTag::MinusOne, 1, 1, {Rat(1)}}},
            {{xm1, FactorTag::MinusOne, 1, 1, {Rat(1)}},
             {xp1, FactorTag::PlusOne, 1, 1, {Rat(1)}}},
            {{q, FactorTag::SelfReciprocal, 1, 1, {Rat(1)}}},
            {{q, FactorTag::SelfReciprocal, 2, 1, {Rat(1)}}},
            {{xm1, FactorTag::MinusOne, 1, 2, {Rat(1), Rat(2)}},
             {q, FactorTag::SelfReciprocal, 1, 1, {Rat(1)}}},
        };
        for (const auto& s : corpus) {
            IsometryPair pair = assemble(s, ctx);
            Verdict v = decide_single_class(milnor_invariant(pair), ctx);
            auto w = counterexample(pair);
            expect(v.single_class == !w.has_value(), "verdict and witness existence agree");
            if (w) {
                expect(gl_conjugate(pair, w->witness), "witness GL-conjugacy");
                expect(is_isometric(pair.space, w->witness.space), "witness ambient isometry");
                expect(!o_conjugate(pair, w->witness), "witness O-inequivalence");
            }
        }
    }

    out << "selftest: " << checks << " checks passed\n";
    return 0;
}

}  // namespace

}  // namespace qfiso
