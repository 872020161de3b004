#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "crpq/evaluation.hpp"
#include "crpq/queryio.hpp"

using namespace crpq;

namespace {

std::string slurp(const std::string& rel) {
    std::ifstream in(std::string(CRPQ_TEST_DATA_DIR) + "/" + rel);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

GraphDb fig1() { return load_db(slurp("fig1.db")); }

TaggedTreeDecomposition decomp_for(const C2rpq& q, bool path) {
    Multigraph g = underlying_multigraph(q);
    auto [w, dec] = path ? exact_pathwidth(g) : exact_treewidth(g);
    return tag_atoms(q, dec);
}

GraphDb random_db(std::mt19937& rng, int max_nodes, std::vector<std::string> labels) {
    GraphDb db;
    int n = 1 + int(rng() % max_nodes);
    for (int v = 0; v < n; ++v) db.add_node("n" + std::to_string(v));
    int edges = int(rng() % (3 * n));
    for (int e = 0; e < edges; ++e)
        db.add_edge("n" + std::to_string(rng() % n), {labels[rng() % labels.size()], false},
                    "n" + std::to_string(rng() % n));
    return db;
}

} // namespace

TEST_CASE("gamma2 on the authors database contains (author2, author5)") {
    Uc2rpq q = parse_query_text(slurp("gamma2.query"));
    ResultSet r = evaluate_naive(q, fig1());
    CHECK(r.tuples.count({"author2", "author5"}));
}

TEST_CASE("gamma3 chains co-authorship both ways") {
    Uc2rpq q = parse_query_text(slurp("gamma3.query"));
    ResultSet r = evaluate_naive(q, fig1());
    CHECK(r.tuples.count({"author1", "author3"}));
    CHECK(r.tuples.count({"author1", "author1"}));
    CHECK_FALSE(r.tuples.count({"author1", "author4"}));
}

TEST_CASE("Boolean gamma4 is satisfied") {
    Uc2rpq q = parse_query_text(slurp("gamma4.query"));
    ResultSet r = evaluate_naive(q, fig1());
    CHECK(r.satisfied());
    CHECK(r.tuples.count({}));
}

TEST_CASE("empty database yields the empty result") {
    Uc2rpq q = parse_query_text(slurp("gamma2.query"));
    CHECK(evaluate_naive(q, GraphDb{}).tuples.empty());
    Uc2rpq boolean = parse_query_text(slurp("gamma4.query"));
    CHECK_FALSE(evaluate_naive(boolean, GraphDb{}).satisfied());
}

TEST_CASE("width-aware engines match naive on the fixtures") {
    GraphDb db = fig1();
    for (const char* file : {"gamma2.query", "gamma3.query", "gamma4.query"}) {
        Uc2rpq q = parse_query_text(slurp(file));
        ResultSet naive = evaluate_naive(q, db);
        for (const C2rpq& d : q.disjuncts) {
            CHECK(evaluate_treewidth(d, db, decomp_for(d, false)) == naive);
            CHECK(evaluate_pathwidth(d, db, decomp_for(d, true)) == naive);
        }
    }
}

TEST_CASE("treewidth engine rejects an invalid decomposition") {
    Uc2rpq q = parse_query_text("query q(x, z) := x -[a]-> y , y -[b]-> z ;");
    const C2rpq& d = q.disjuncts[0];
    TaggedTreeDecomposition ttd = decomp_for(d, false);
    TaggedTreeDecomposition broken = ttd;
    for (auto& bag : broken.dec.bags) bag.erase("y");
    CHECK_THROWS_AS(evaluate_treewidth(d, fig1(), broken), std::invalid_argument);
}

TEST_CASE("engine agreement on random instances") {
    std::mt19937 rng(31337);
    int done_tw = 0, done_pw = 0;
    for (int trial = 0; trial < 200; ++trial) {
        C2rpq q;
        q.name = "q";
        int nv = 2 + int(rng() % 4);
        std::vector<std::string> regexes{"a", "b", "a*", "a.b", "(a|b)*", "b+", "a^-"};
        for (int e = 0; e < 1 + int(rng() % 4); ++e) {
            q.atoms.push_back({"v" + std::to_string(rng() % nv),
                               parse_regex(regexes[rng() % regexes.size()]),
                               "v" + std::to_string(rng() % nv)});
        }
        q.sync_vars();
        if (!q.vars.empty() && rng() % 2) q.output.push_back(*q.vars.begin());

        GraphDb db = random_db(rng, 12, {"a", "b"});
        ResultSet naive = evaluate_naive(q, db);

        Multigraph g = underlying_multigraph(q);
        auto [tw, tdec] = exact_treewidth(g);
        if (tw <= 2) {
            TaggedTreeDecomposition ttd = tag_atoms(q, tdec);
            CHECK(evaluate_treewidth(q, db, ttd) == naive);
            ++done_tw;
        }
        auto [pw, pdec] = exact_pathwidth(g);
        if (pw <= 2) {
            TaggedTreeDecomposition tpd = tag_atoms(q, pdec);
            CHECK(evaluate_pathwidth(q, db, tpd) == naive);
            ++done_pw;
        }
    }
    // The generators keep widths small, so nearly every instance runs.
    CHECK(done_tw >= 150);
    CHECK(done_pw >= 150);
}

TEST_CASE("bag relations respect the |V|^(k+1) guard on the random suite") {
    // The engine throws if a materialized relation ever exceeds the bound;
    // this sweep doubles as the zero-violation check.
    std::mt19937 rng(4096);
    for (int trial = 0; trial < 100; ++trial) {
        C2rpq q;
        q.name = "q";
        int nv = 2 + int(rng() % 3);
        for (int e = 0; e < 1 + int(rng() % 3); ++e)
            q.atoms.push_back({"v" + std::to_string(rng() % nv),
                               Nfa::single_letter({rng() % 2 ? "a" : "b", false}),
                               "v" + std::to_string(rng() % nv)});
        q.sync_vars();
        GraphDb db = random_db(rng, 8, {"a", "b"});
        Multigraph g = underlying_multigraph(q);
        auto [tw, tdec] = exact_treewidth(g);
        TaggedTreeDecomposition ttd = tag_atoms(q, tdec);
        CHECK_NOTHROW(evaluate_treewidth(q, db, ttd));
    }
}

TEST_CASE("single-bag path decomposition degenerates to naive over that bag") {
    Uc2rpq q = parse_query_text("query q(x, y) := x -[a]-> y , y -[b]-> x ;");
    const C2rpq& d = q.disjuncts[0];
    TreeDecomposition dec;
    dec.kind = TreeDecomposition::Kind::Path;
    dec.bags = {{"x", "y"}};
    dec.parent = {-1};
    TaggedTreeDecomposition pd = tag_atoms(d, dec);
    std::mt19937 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        GraphDb db = random_db(rng, 6, {"a", "b"});
        CHECK(evaluate_pathwidth(d, db, pd) == evaluate_naive(q, db));
    }
}
