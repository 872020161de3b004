#include <doctest.h>

#include <random>

#include "crpq/evaluation.hpp"
#include "crpq/morphism.hpp"
#include "crpq/queryio.hpp"
#include "crpq/refine.hpp"
#include "oracles.hpp"

using namespace crpq;

namespace {

Word w(std::initializer_list<const char*> letters) {
    Word out;
    for (const char* l : letters) {
        std::string s = l;
        if (s.size() > 2 && s.compare(s.size() - 2, 2, "^-") == 0)
            out.push_back({s.substr(0, s.size() - 2), true});
        else
            out.push_back({s, false});
    }
    return out;
}

C2rpq parse1(const std::string& text) { return parse_query_text(text).disjuncts.at(0); }

} // namespace

TEST_CASE("collapse_equalities merges classes to the least representative") {
    SUBCASE("paper example") {
        C2rpq q;
        q.name = "g";
        q.output = {"x", "y"};
        q.atoms = {{"x", parse_regex("K"), "y"}, {"y", parse_regex("L"), "z"}};
        q.equalities = {{"x", "y"}};
        q.sync_vars();
        CollapseResult col = collapse_equalities(q);
        CHECK(col.query.equalities.empty());
        CHECK(col.query.output == std::vector<Var>{"x", "x"});
        CHECK(col.query.vars == std::set<Var>{"x", "z"});
        REQUIRE(col.query.atoms.size() == 2);
        CHECK(col.query.atoms[0].src == "x");
        CHECK(col.query.atoms[0].dst == "x");
        CHECK(col.query.atoms[1].src == "x");
        CHECK(col.query.atoms[1].dst == "z");
    }
    SUBCASE("no equalities is the identity") {
        C2rpq q = parse1("query q(x) := x -[a]-> y ;");
        CollapseResult col = collapse_equalities(q);
        CHECK(col.query.atoms.size() == 1);
        for (const auto& [from, to] : col.renaming) CHECK(from == to);
    }
    SUBCASE("chains match the union-find oracle") {
        std::mt19937 rng(3);
        for (int trial = 0; trial < 30; ++trial) {
            C2rpq q;
            std::set<std::string> vars;
            for (int v = 0; v < 5; ++v) {
                q.vars.insert("v" + std::to_string(v));
                vars.insert("v" + std::to_string(v));
            }
            std::vector<std::pair<std::string, std::string>> eqs;
            for (int e = 0; e < int(rng() % 4); ++e) {
                std::string a = "v" + std::to_string(rng() % 5);
                std::string b = "v" + std::to_string(rng() % 5);
                eqs.push_back({a, b});
                q.equalities.push_back({a, b});
            }
            auto expect = oracle::equality_classes_bruteforce(vars, eqs);
            CollapseResult col = collapse_equalities(q);
            for (const auto& [v, rep] : expect) CHECK(col.renaming.at(v) == rep);
        }
    }
}

TEST_CASE("atom refinements of x -(aa^-)*-> y include the length-7 fixture") {
    NfaPtr lang = parse_regex("(a.a^-)*");
    Atom atom{"x", lang, "y"};
    SublangCache cache;
    auto traces = enumerate_atom_refinements(atom, 7, cache);

    Nfa::State q0 = *lang->initial().begin();
    Nfa::State q1 = q0 == 0 ? 1 : 0;
    // x -a-> t1 -(a^-a)*-> t2 -(a^-a)*-> t3 <-a- t4 -(aa^-)*-> t5 -(aa^-)*a-> t6 <-a- y
    std::vector<Nfa::State> want_states{q0, q1, q1, q1, q0, q0, q1, q0};
    std::vector<std::pair<bool, const char*>> want_kind{
        {true, "a"}, {false, ""}, {false, ""}, {true, "a^-"},
        {false, ""}, {false, ""}, {true, "a^-"}};

    bool found = false;
    for (const AtomTrace& t : traces) {
        if (t.equality_collapse || t.trace != want_states) continue;
        bool match = true;
        for (size_t i = 0; i < t.segments.size(); ++i) {
            bool is_letter = t.segments[i].kind == AtomTrace::Segment::SingleLetter;
            if (is_letter != want_kind[i].first) match = false;
            else if (is_letter && t.segments[i].letter.str() != want_kind[i].second) match = false;
        }
        if (match) {
            found = true;
            validate_trace(atom, t, cache);
            // Sampled language check on the middle: (a^-a)*.
            CHECK(t.segments[1].lang->accepts(w({"a^-", "a"})));
            CHECK(t.segments[1].lang->accepts({}));
            CHECK_FALSE(t.segments[1].lang->accepts(w({"a", "a^-"})));
        }
    }
    CHECK(found);
    // Epsilon is in the language, so the equality collapse is offered first.
    REQUIRE(!traces.empty());
    CHECK(traces.front().equality_collapse);
}

TEST_CASE("atom refinement count matches the definitional brute force at m = 1") {
    // 2-state single-final NFA: count = sum over (q0 in I, qf in F) of the
    // per-segment kind choices.
    NfaPtr lang = parse_regex("a.b*");
    Atom atom{"x", lang, "y"};
    SublangCache cache;
    auto traces = enumerate_atom_refinements(atom, 1, cache);

    size_t expect = 0;
    for (Nfa::State qi : lang->initial())
        for (Nfa::State qf : lang->final()) {
            size_t kinds = 1; // the sublanguage choice
            for (const Letter& l : lang->alphabet())
                if (letter_in_sublanguage(*lang, qi, l, qf)) ++kinds;
            expect += kinds;
        }
    if (lang->accepts_epsilon()) ++expect;
    CHECK(traces.size() == expect);
    for (const AtomTrace& t : traces) validate_trace(atom, t, cache);
}

TEST_CASE("condense reproduces the paper's condensation and rejects the fake") {
    NfaPtr lang = parse_regex("(a.a^-)*");
    Atom atom{"x", lang, "y"};
    C2rpq base;
    base.name = "g";
    base.output = {"x", "y"};
    base.atoms = {atom};
    base.sync_vars();

    Nfa::State q0 = *lang->initial().begin();
    Nfa::State q1 = q0 == 0 ? 1 : 0;
    SublangCache cache;
    AtomTrace rho;
    rho.trace = {q0, q1, q1, q1, q0, q0, q1, q0};
    auto sub = [&](Nfa::State a, Nfa::State b) {
        return AtomTrace::Segment{AtomTrace::Segment::Sublanguage, cache.get(lang, a, b), {}};
    };
    auto letter = [&](const char* s) {
        Letter l = std::string(s) == "a" ? Letter{"a", false} : Letter{"a", true};
        return AtomTrace::Segment{AtomTrace::Segment::SingleLetter, Nfa::single_letter(l), l};
    };
    rho.segments = {letter("a"), sub(q1, q1), sub(q1, q1), letter("a-"),
                    sub(q0, q0), sub(q0, q1), letter("a-")};
    rho.segments[3].letter = {"a", true};
    rho.segments[6].letter = {"a", true};
    Refinement ref = assemble_refinement(base, {rho});
    validate_trace(atom, ref.traces[0], cache);
    CHECK(ref.result.atom_count() == 7);

    SUBCASE("condensing between t4 and y keeps the prefix and closes with (aa^-)*") {
        Refinement condensed = condense(ref, 0, 4, 7, cache);
        CHECK(condensed.result.atom_count() == 5);
        const AtomTrace& t = condensed.traces[0];
        CHECK(t.segments.size() == 5);
        CHECK(t.segments[4].kind == AtomTrace::Segment::Sublanguage);
        CHECK(t.segments[4].lang->accepts({}));
        CHECK(t.segments[4].lang->accepts(w({"a", "a^-"})));
        CHECK_FALSE(t.segments[4].lang->accepts(w({"a^-", "a"})));
        validate_trace(atom, t, cache);
    }
    SUBCASE("full condensation gives a single sublanguage segment") {
        Refinement condensed = condense(ref, 0, 0, 7, cache);
        CHECK(condensed.result.atom_count() == 1);
        CHECK(language_equal(condensed.traces[0].segments[0].lang, lang));
    }
    SUBCASE("rho'' = x -a-> t1 <-a- y is not producible by any condensation") {
        C2rpq rho2 = parse1("query r(x, y) := x -[a]-> t1 , y -[a]-> t1 ;");
        for (size_t i = 0; i + 1 < 8; ++i)
            for (size_t j = i + 2; j <= 7; ++j) {
                Refinement c = condense(ref, 0, i, j, cache);
                CHECK_FALSE(is_isomorphic(c.result, rho2));
            }
    }
    SUBCASE("index errors") {
        CHECK_THROWS_AS(condense(ref, 0, 3, 4, cache), std::invalid_argument);
        CHECK_THROWS_AS(condense(ref, 0, 5, 99, cache), std::out_of_range);
        CHECK_THROWS_AS(condense(ref, 7, 0, 2, cache), std::out_of_range);
    }
}

TEST_CASE("enumerate_refinements on x -a*-> y, x -c-> y") {
    C2rpq g = parse1("query g(x, y) := x -[a*]-> y , x -[c]-> y ;");
    SublangCache cache;

    SUBCASE("m = 1 includes the equality collapse rho(x,x) = x -c-> x") {
        RefinementEnumerator en(g, 1, cache);
        C2rpq want = parse1("query r(x, x) := x -[c]-> x ;");
        bool found = false;
        while (auto ref = en.next())
            if (is_isomorphic(ref->result, want)) found = true;
        CHECK(found);
    }
    SUBCASE("m = 2 includes rho'(x,y) = x -a-> t -a-> y, x -c-> y") {
        RefinementEnumerator en(g, 2, cache);
        C2rpq want = parse1("query r(x, y) := x -[a]-> t , t -[a]-> y , x -[c]-> y ;");
        bool found = false;
        while (auto ref = en.next())
            if (is_isomorphic(ref->result, want)) found = true;
        CHECK(found);
    }
    SUBCASE("count equals the per-atom product") {
        RefinementEnumerator en(g, 2, cache);
        size_t count = 0;
        while (en.next()) ++count;
        Atom astar{"x", parse_regex("a*"), "y"};
        Atom c{"x", parse_regex("c"), "y"};
        size_t expect = enumerate_atom_refinements(astar, 2, cache).size() *
                        enumerate_atom_refinements(c, 2, cache).size();
        CHECK(count == expect);
        CHECK(en.total() == expect);
    }
}

TEST_CASE("trivial refinement exists for single-final atoms at m = 1") {
    C2rpq g = parse1("query g(x, y) := x -[a.(b.b)+]-> y ;");
    SublangCache cache;
    RefinementEnumerator en(g, 1, cache);
    bool found = false;
    while (auto ref = en.next()) {
        if (ref->result.atom_count() == 1 &&
            language_equal(ref->result.atoms[0].lang, g.atoms[0].lang))
            found = true;
    }
    CHECK(found);
}

TEST_CASE("expansions") {
    SUBCASE("the (aa^-)* zigzag") {
        C2rpq rho = parse1("query r(x, y) := x -[(a.a^-)*]-> y ;");
        auto exps = enumerate_expansions(rho, 4);
        // Expansion atoms keep the inverted letters of the word a a^- a a^-.
        C2rpq want = parse1(
            "query x(x, y) := x -[a]-> t1 , t1 -[a^-]-> t2 , t2 -[a]-> t3 , t3 -[a^-]-> y ;");
        bool found = false;
        for (const C2rpq& e : exps)
            if (is_isomorphic(e, want)) found = true;
        CHECK(found);
        // Shortest first: the epsilon expansion collapses x and y.
        REQUIRE(!exps.empty());
        CHECK(exps.front().atom_count() == 0);
        CHECK(exps.front().vars.size() == 1);
    }
    SUBCASE("single-word language has exactly one expansion") {
        C2rpq g = parse1("query g(x) := x -[a.b.c]-> x ;");
        auto exps = enumerate_expansions(g, 5);
        REQUIRE(exps.size() == 1);
        CHECK(exps[0].atom_count() == 3);
        CHECK(exps[0].vars.size() == 3);
        CHECK(exps[0].is_cq());
    }
    SUBCASE("x -(a|b)-> y has two expansions at bound 1") {
        C2rpq g = parse1("query g(x, y) := x -[a|b]-> y ;");
        CHECK(enumerate_expansions(g, 1).size() == 2);
    }
}

TEST_CASE("expansions are exactly the all-letters refinements") {
    C2rpq g = parse1("query g(x, y) := x -[a|b.b]-> y , x -[c]-> y ;");
    SublangCache cache;
    auto exps = enumerate_expansions(g, 2);

    RefinementEnumerator en(g, 2, cache);
    std::vector<C2rpq> letter_refinements;
    while (auto ref = en.next()) {
        bool all_letters = true;
        for (const AtomTrace& t : ref->traces)
            for (const auto& s : t.segments)
                if (s.kind != AtomTrace::Segment::SingleLetter) all_letters = false;
        if (all_letters) letter_refinements.push_back(ref->result);
    }
    // Every expansion matches some all-letters refinement and vice versa.
    for (const C2rpq& e : exps) {
        bool found = false;
        for (const C2rpq& r : letter_refinements)
            if (is_isomorphic(e, r)) found = true;
        CHECK(found);
    }
    for (const C2rpq& r : letter_refinements) {
        bool found = false;
        for (const C2rpq& e : exps)
            if (is_isomorphic(e, r)) found = true;
        CHECK(found);
    }
}

TEST_CASE("contract") {
    SUBCASE("two-way contraction of x0 -L-> y <-M- x1") {
        C2rpq g = parse1("query g(x0, x1) := x0 -[K]-> y , x1 -[M]-> y ;");
        C2rpq two = contract(g, ContractionMode::TwoWay);
        REQUIRE(two.atom_count() == 1);
        CHECK(two.atoms[0].src == "x0");
        CHECK(two.atoms[0].dst == "x1");
        // K . M^-
        CHECK(two.atoms[0].lang->accepts(w({"K", "M^-"})));
        CHECK_FALSE(two.atoms[0].lang->accepts(w({"K", "M"})));
        // One-way: y has in-degree 2, nothing contracts.
        C2rpq one = contract(g, ContractionMode::OneWay);
        CHECK(one.atom_count() == 2);
    }
    SUBCASE("remark fixture contracts to x -b a^- a-> x") {
        C2rpq g = parse1("query g(x) := z -[a]-> x , z -[a]-> y , x -[b]-> y ;");
        C2rpq two = contract(g, ContractionMode::TwoWay);
        REQUIRE(two.atom_count() == 1);
        CHECK(two.atoms[0].src == "x");
        CHECK(two.atoms[0].dst == "x");
        CHECK(two.atoms[0].lang->accepts(w({"b", "a^-", "a"})));
        CHECK_FALSE(two.atoms[0].lang->accepts(w({"b", "a", "a"})));
        CHECK_FALSE(two.atoms[0].lang->accepts(w({"b"})));
    }
    SUBCASE("one-way contraction concatenates chains") {
        C2rpq g = parse1("query g(x, z) := x -[a]-> y , y -[b]-> z ;");
        C2rpq one = contract(g, ContractionMode::OneWay);
        REQUIRE(one.atom_count() == 1);
        CHECK(one.atoms[0].lang->accepts(w({"a", "b"})));
        CHECK_FALSE(one.atoms[0].lang->accepts(w({"a"})));
    }
    SUBCASE("output variables are never suppressed") {
        C2rpq g = parse1("query g(x, y, z) := x -[a]-> y , y -[b]-> z ;");
        CHECK(contract(g, ContractionMode::TwoWay).atom_count() == 2);
    }
}

TEST_CASE("contraction preserves naive evaluation on random databases") {
    std::mt19937 rng(1234);
    C2rpq g = parse1("query g(x) := x -[a]-> y , y -[b.a*]-> z , z -[c]-> x , z -[b]-> w ;");
    C2rpq two = contract(g, ContractionMode::TwoWay);
    C2rpq one = contract(g, ContractionMode::OneWay);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        GraphDb db;
        int n = 2 + int(rng() % 5);
        for (int v = 0; v < n; ++v) db.add_node("n" + std::to_string(v));
        std::vector<std::string> ls{"a", "b", "c"};
        for (int e = 0; e < 2 + int(rng() % 10); ++e)
            db.add_edge("n" + std::to_string(rng() % n), {ls[rng() % 3], false},
                        "n" + std::to_string(rng() % n));
        ResultSet naive = evaluate_naive(g, db);
        CHECK(naive == evaluate_naive(two, db));
        CHECK(naive == evaluate_naive(one, db));
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("is_sre") {
    CHECK(is_sre(parse_query_text("query q(x, y) := x -[a*]-> y , x -[b]-> y , x -[a|b|c]-> y ;")));
    CHECK_FALSE(is_sre(parse_query_text("query q(x) := x -[a.(b.b)+]-> x ;")));
    CHECK_FALSE(is_sre(parse_query_text("query q(x, y) := x -[a^-]-> y ;")));
    CHECK_FALSE(is_sre(parse_query_text("query q(x, y) := x -[a.b]-> y ;")));
    CHECK(is_sre(parse_query_text("query q(x, y) := x -[a]-> y ;")));
}

TEST_CASE("underlying_multigraph") {
    SUBCASE("the 4-clique of the six-atom fixture") {
        C2rpq g = parse1(
            "query g(x0, x1, y, z) := x0 -[a]-> y , x0 -[c]-> x1 , x0 -[d]-> z , x1 -[a]-> y , "
            "x1 -[e]-> z , y -[b]-> z ;");
        Multigraph mg = underlying_multigraph(g);
        CHECK(mg.verts.size() == 4);
        CHECK(mg.edges.size() == 6);
        std::set<std::pair<int, int>> simple;
        for (auto [a, b] : mg.edges) simple.insert({std::min(a, b), std::max(a, b)});
        CHECK(simple.size() == 6);
    }
    SUBCASE("self-loop and parallel atoms keep multiset semantics") {
        C2rpq loop = parse1("query q(x) := x -[a]-> x ;");
        CHECK(underlying_multigraph(loop).edges.size() == 1);
        C2rpq par = parse1("query q(x, y) := x -[a]-> y , x -[b]-> y ;");
        CHECK(underlying_multigraph(par).edges.size() == 2);
    }
}

TEST_CASE("A query with a multi-final atom language is not a refinement of itself") {
    C2rpq g = parse1("query g(x, y) := x -[a+|b+]-> y ;");
    SublangCache cache;
    RefinementEnumerator en(g, 3, cache);
    while (auto ref = en.next()) {
        if (ref->result.atom_count() != 1) continue;
        CHECK_FALSE(language_equal(ref->result.atoms[0].lang, g.atoms[0].lang, 3));
    }
}
