#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qfiso/cli.hpp"

using qfiso::cli_run;
using json = nlohmann::json;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path("/tmp/qfiso_cli_" + name) {
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

struct Run {
    int code;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli_run(args, out, err);
    return {code, out.str(), err.str()};
}

const char* kId2 = R"({"n": 2, "entries": [["1", "0"], ["0", "1"]]})";
const char* kRefl2 = R"({"n": 2, "entries": [["1", "0"], ["0", "-1"]]})";

}  // namespace

TEST_CASE("decide exit codes and report shape") {
    TempFile gram("g1.json", R"({"n": 1, "entries": [["1"]]})");
    TempFile iso("s1.json", R"({"n": 1, "entries": [["1"]]})");
    auto r = run({"decide", "--gram", gram.path, "--iso", iso.path, "--prime", "5"});
    CHECK(r.code == 0);
    json rep = json::parse(r.out);
    CHECK(rep["verdict"]["condition"] == "(i)");
    CHECK(rep["invariant"]["m0"] == 1);

    TempFile gram2("g2.json", kId2);
    TempFile iso2("s2.json", kRefl2);
    auto r2 = run({"decide", "--gram", gram2.path, "--iso", iso2.path, "--prime", "5"});
    CHECK(r2.code == 3);
    json rep2 = json::parse(r2.out);
    CHECK(rep2["verdict"]["failing"] == "m0-too-big");
}

TEST_CASE("analyze reports are byte-deterministic") {
    TempFile gram("g3.json", kId2);
    TempFile iso("s3.json", kRefl2);
    std::vector<std::string> args = {"analyze", "--gram", gram.path, "--iso", iso.path,
                                     "--prime", "5"};
    auto a = run(args);
    auto b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(!a.out.empty());
}

TEST_CASE("malformed input exits 2") {
    TempFile bad("bad.json", R"({"n": 2, "entries": [["1"]]})");
    TempFile iso("s4.json", kRefl2);
    auto r = run({"analyze", "--gram", bad.path, "--iso", iso.path, "--prime", "5"});
    CHECK(r.code == 2);
    CHECK(!r.err.empty());

    auto r2 = run({"analyze", "--gram", bad.path, "--iso", iso.path});
    CHECK(r2.code == 2);

    TempFile degenerate("g5.json", R"({"n": 1, "entries": [["0"]]})");
    TempFile iso1("s5.json", R"({"n": 1, "entries": [["1"]]})");
    auto r3 = run({"analyze", "--gram", degenerate.path, "--iso", iso1.path, "--prime", "5"});
    CHECK(r3.code == 2);
}

TEST_CASE("compare covers the three exit codes") {
    TempFile gram("g6.json", kId2);
    TempFile iso_a("s6a.json", kRefl2);
    TempFile iso_b("s6b.json", R"({"n": 2, "entries": [["-1", "0"], ["0", "1"]]})");
    TempFile iso_c("s6c.json", kId2);

    auto same = run({"compare", "--a-gram", gram.path, "--a-iso", iso_a.path, "--b-gram",
                     gram.path, "--b-iso", iso_b.path, "--prime", "5"});
    CHECK(same.code == 0);  // swapping the two reflections is an O-conjugation here

    TempFile gram_d("g6d.json", R"({"n": 2, "entries": [["1", "0"], ["0", "2"]]})");
    auto glonly = run({"compare", "--a-gram", gram.path, "--a-iso", iso_a.path, "--b-gram",
                       gram_d.path, "--b-iso", iso_a.path, "--prime", "5"});
    CHECK(glonly.code == 3);
    json rep = json::parse(glonly.out);
    CHECK(rep["gl_conjugate"] == true);
    CHECK(rep["o_conjugate"] == false);

    auto unrelated = run({"compare", "--a-gram", gram.path, "--a-iso", iso_a.path, "--b-gram",
                          gram.path, "--b-iso", iso_c.path, "--prime", "5"});
    CHECK(unrelated.code == 4);
}

TEST_CASE("realize then analyze round trip through files") {
    TempFile spec("spec.json", R"({"blocks": [
        {"factor": [-1, 1], "type": "minus-one", "level": 1, "rank": 2, "residual": ["1", "2"]},
        {"factor": [1, -3, 1], "type": "self-reciprocal", "level": 1, "rank": 1, "residual": ["1"]}
    ]})");
    std::string g = "/tmp/qfiso_cli_rt_gram.json", s = "/tmp/qfiso_cli_rt_iso.json";
    auto r = run({"realize", "--spec", spec.path, "--prime", "5", "--out-gram", g,
                  "--out-iso", s});
    REQUIRE(r.code == 0);
    json meta = json::parse(r.out);
    CHECK(meta["dim"] == 4);

    auto d = run({"decide", "--gram", g, "--iso", s, "--prime", "5"});
    CHECK(d.code == 3);
    json rep = json::parse(d.out);
    CHECK(rep["verdict"]["failing"] == "residual-too-big");

    std::string wg = "/tmp/qfiso_cli_w_gram.json", ws = "/tmp/qfiso_cli_w_iso.json";
    std::string wr = "/tmp/qfiso_cli_w_recipe.json";
    auto c = run({"counterexample", "--gram", g, "--iso", s, "--prime", "5", "--out-gram", wg,
                  "--out-iso", ws, "--out-recipe", wr});
    REQUIRE(c.code == 0);
    json recipe = json::parse(c.out);
    CHECK(recipe["recipe"] == "m0-m1-residual-big");

    auto cmp = run({"compare", "--a-gram", g, "--a-iso", s, "--b-gram", wg, "--b-iso", ws,
                    "--prime", "5"});
    CHECK(cmp.code == 3);  // GL-conjugate but not O-conjugate
    for (const auto& p : {g, s, wg, ws, wr}) std::remove(p.c_str());
}

TEST_CASE("counterexample exits 5 on a single class") {
    TempFile gram("g7.json", R"({"n": 1, "entries": [["1"]]})");
    TempFile iso("s7.json", R"({"n": 1, "entries": [["1"]]})");
    auto r = run({"counterexample", "--gram", gram.path, "--iso", iso.path, "--prime", "5"});
    CHECK(r.code == 5);
}

TEST_CASE("selftest passes") {
    auto r = run({"selftest"});
    CHECK(r.code == 0);
    CHECK(r.out.find("checks passed") != std::string::npos);
}
