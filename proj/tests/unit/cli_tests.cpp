#include <doctest.h>

#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "crpq/morphism.hpp"
#include "crpq/queryio.hpp"

using namespace crpq;
using namespace crpq::cli;

namespace {

std::string slurp(const std::string& rel) {
    std::ifstream in(std::string(CRPQ_TEST_DATA_DIR) + "/" + rel);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("query text round-trips to an isomorphic query") {
    for (const char* file : {"gamma2.query", "gamma3.query", "gamma4.query", "gamma5.query",
                             "ex13.query", "ex13_delta_union.query", "triangle.query",
                             "remark39.query", "remark73_k2.query"}) {
        Uc2rpq q = parse_query_text(slurp(file));
        Uc2rpq back = parse_query_text(emit_query_text(q));
        REQUIRE(back.disjuncts.size() == q.disjuncts.size());
        for (size_t i = 0; i < q.disjuncts.size(); ++i)
            CHECK(is_isomorphic(back.disjuncts[i], q.disjuncts[i]));
    }
}

TEST_CASE("emission handles repeated outputs and refinement middles") {
    Uc2rpq q = parse_query_text("query q(x, y) := x -[a*]-> y , x -[c]-> y ;");
    SublangCache cache;
    RefinementEnumerator en(q.disjuncts[0], 1, cache);
    while (auto ref = en.next()) {
        Uc2rpq u = as_union(ref->result);
        Uc2rpq back = parse_query_text(emit_query_text(u));
        CHECK(is_isomorphic(back.disjuncts[0], ref->result));
    }
}

TEST_CASE("parse errors carry positions and produce exit code 2") {
    CHECK_THROWS_AS(parse_query_text("query q(x := x -[a]-> y ;"), QueryParseError);
    CHECK_THROWS_AS(parse_query_text("frob q(x) := x ;"), QueryParseError);
    Report r = cmd_width("query q(x) := x -[a]-> ;");
    CHECK(r.exit_code == kExitParse);
    CHECK(r.payload.contains("error"));
}

TEST_CASE("cmd_width reports the fixture widths") {
    Report r = cmd_width(slurp("ex13.query"));
    REQUIRE(r.exit_code == 0);
    CHECK(r.payload["disjuncts"][0]["tree_width"] == 3);

    Report tri = cmd_width(slurp("triangle.query"));
    CHECK(tri.payload["disjuncts"][0]["tree_width"] == 2);
    CHECK(tri.payload["disjuncts"][0]["contracted_tree_width"] == 0);

    Report single = cmd_width("query q(x, y) := x -[a]-> y ;");
    CHECK(single.payload["disjuncts"][0]["tree_width"] == 1);
    CHECK(single.payload["disjuncts"][0]["path_width"] == 1);
}

TEST_CASE("cmd_eval across engines agrees and respects caps") {
    std::string q = slurp("gamma2.query"), db = slurp("fig1.db");
    Report naive = cmd_eval(q, db, "naive", 3);
    Report tw = cmd_eval(q, db, "tw", 3);
    Report pw = cmd_eval(q, db, "pw", 3);
    REQUIRE(naive.exit_code == 0);
    CHECK(naive.payload["rows"] == tw.payload["rows"]);
    CHECK(naive.payload["rows"] == pw.payload["rows"]);

    Report boolean = cmd_eval(slurp("gamma4.query"), db, "tw", 3);
    CHECK(boolean.payload["satisfied"] == true);

    Report capped = cmd_eval(slurp("ex13.query"), db, "tw", 2);
    CHECK(capped.exit_code == kExitCap);

    Report empty = cmd_eval(q, "", "naive", 3);
    CHECK(empty.payload["row_count"] == 0);
}

TEST_CASE("cmd_contain wraps the bounded containment") {
    Report r = cmd_contain("query a(x, y) := x -[a]-> z , z -[b]-> y ;",
                           "query b(x, y) := x -[a.b]-> y ;", 4);
    REQUIRE(r.exit_code == 0);
    CHECK(r.payload["verdict"]["kind"] == "Yes");
    CHECK(r.payload["verdict"]["exact"] == true);
}

TEST_CASE("cmd_expand and cmd_refine enumerate with caps") {
    Report e = cmd_expand("query q(x, y) := x -[a|b]-> y ;", 1, 100);
    CHECK(e.payload["count"] == 2);

    std::string aaq = "query g3(x, y) := x -[(a.a^-)*]-> y ;";
    Report r = cmd_refine(aaq, 7, 100000);
    REQUIRE(r.exit_code == 0);
    // Example 2.3's seven-segment refinement appears among the outputs.
    Uc2rpq want = parse_query_text(
        "query r(x, y) := x -[a]-> t1 , t1 -[(a^-.a)*]-> t2 , t2 -[(a^-.a)*]-> t3 , "
        "t3 -[a^-]-> t4 , t4 -[(a.a^-)*]-> t5 , t5 -[(a.a^-)*.a]-> t6 , t6 -[a^-]-> y ;");
    bool found = false;
    for (const auto& text : r.payload["refinements"]) {
        Uc2rpq got = parse_query_text(text.get<std::string>());
        if (is_isomorphic(got.disjuncts[0], want.disjuncts[0])) found = true;
    }
    CHECK(found);

    Report capped = cmd_refine(aaq, 7, 5);
    CHECK(capped.payload["count"] == 5);
    CHECK(capped.payload["truncated"] == true);
}

TEST_CASE("cmd_approx emits a re-parseable union plus a sidecar") {
    ApproxOpts opt;
    opt.cls = "tw";
    opt.k = 1;
    opt.m = 1;
    std::string emitted, sidecar;
    Report r = cmd_approx(slurp("triangle.query"), opt, &emitted, &sidecar);
    REQUIRE(r.exit_code == 0);
    CHECK(r.payload["disjuncts_emitted"] == 4);
    Uc2rpq back = parse_query_text(emitted);
    CHECK(back.disjuncts.size() == 4);
    auto prov = nlohmann::json::parse(sidecar);
    CHECK(prov.size() == 4);
    CHECK(prov[0].contains("refinement"));
    CHECK(prov[0].contains("partition"));
}

TEST_CASE("cmd_decide reports and redirects") {
    DecideOpts opt;
    opt.cls = "tw";
    opt.k = 1;
    opt.m = 1;
    opt.word_bound = 4;
    Report r = cmd_decide(slurp("triangle.query"), opt);
    REQUIRE(r.exit_code == 0);
    CHECK(r.payload["effective_class"] == "ctw(1)");
    CHECK(r.payload["verdict"]["kind"] == "Yes");
    CHECK(r.payload["verdict"]["exact"] == true);

    DecideOpts bad = opt;
    bad.cls = "ctw";
    Report rej = cmd_decide(slurp("triangle.query"), bad);
    CHECK(rej.exit_code == kExitParse);
}

TEST_CASE("reports render identical facts as JSON and text") {
    Report r = cmd_width(slurp("triangle.query"));
    std::string text = r.to_text();
    std::string json = r.to_json();
    CHECK(text.find("tree_width: 2") != std::string::npos);
    CHECK(json.find("\"tree_width\": 2") != std::string::npos);
    CHECK(text.find("contracted_tree_width: 0") != std::string::npos);
    // Determinism: the same command gives byte-identical reports.
    CHECK(cmd_width(slurp("triangle.query")).to_json() == json);
}
