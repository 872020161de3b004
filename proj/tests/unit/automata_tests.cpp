#include <doctest.h>

#include <random>

#include "crpq/nfa.hpp"
#include "crpq/regular_path.hpp"
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

} // namespace

TEST_CASE("single letter parses to the canonical 2-state NFA") {
    NfaPtr a = parse_regex("a");
    CHECK(a->num_states() == 2);
    CHECK(a->initial().size() == 1);
    CHECK(a->final().size() == 1);
    CHECK(a->accepts(w({"a"})));
    CHECK_FALSE(a->accepts({}));
    CHECK_FALSE(a->accepts(w({"a", "a"})));
    CHECK(a->literal().has_value());
    // Interned: parsing again shares the object.
    CHECK(parse_regex("a") == a);
    CHECK(Nfa::single_letter({"a", false}) == a);
}

TEST_CASE("(a.a^-)* matches the two-way round trips") {
    NfaPtr n = parse_regex("(a.a^-)*");
    CHECK(n->accepts({}));
    CHECK(n->accepts(w({"a", "a^-"})));
    CHECK(n->accepts(w({"a", "a^-", "a", "a^-"})));
    CHECK_FALSE(n->accepts(w({"a"})));
    CHECK_FALSE(n->accepts(w({"a^-", "a"})));
    // The reduced automaton is the minimal one: q0 initial+final, q1.
    CHECK(n->num_states() == 2);
    CHECK(n->initial().size() == 1);
    CHECK(n->final().size() == 1);
    CHECK(n->final() == n->initial());
}

TEST_CASE("a|b|c equals the brute-force union oracle on words up to 4") {
    NfaPtr n = parse_regex("a|b|c");
    std::set<Letter> alpha{{"a", false}, {"b", false}, {"c", false}};
    for (const Word& word : words_up_to(alpha, 4))
        CHECK(n->accepts(word) == oracle::regex_matches("a|b|c", word));
}

TEST_CASE("regex syntax errors carry a position") {
    CHECK_THROWS_AS(parse_regex("a|"), RegexSyntaxError);
    CHECK_THROWS_AS(parse_regex("(a"), RegexSyntaxError);
    CHECK_THROWS_AS(parse_regex("a^x"), RegexSyntaxError);
    CHECK_THROWS_AS(parse_regex(""), RegexSyntaxError);
    try {
        parse_regex("a|*b");
    } catch (const RegexSyntaxError& e) {
        CHECK(e.position == 2);
    }
}

TEST_CASE("sublanguage of the (aa^-)* automaton") {
    NfaPtr n = parse_regex("(a.a^-)*");
    Nfa::State q0 = *n->initial().begin();
    Nfa::State q1 = q0 == 0 ? 1 : 0;
    // A[q1,q1] accepts (a^- a)*, the middle segments of the length-7
    // refinement fixture.
    NfaPtr mid = sublanguage(n, q1, q1);
    CHECK(mid->accepts({}));
    CHECK(mid->accepts(w({"a^-", "a"})));
    CHECK(mid->accepts(w({"a^-", "a", "a^-", "a"})));
    CHECK_FALSE(mid->accepts(w({"a", "a^-"})));

    SUBCASE("A[q,q] always accepts epsilon") {
        for (Nfa::State q = 0; q < n->num_states(); ++q)
            CHECK(sublanguage(n, q, q)->accepts({}));
    }
    SUBCASE("unknown state id") {
        CHECK_THROWS_AS(sublanguage(n, 0, 99), std::invalid_argument);
    }
}

TEST_CASE("sublanguage membership equals run search on random NFAs") {
    std::mt19937 rng(4242);
    std::set<Letter> alpha{{"a", false}, {"b", false}};
    for (int trial = 0; trial < 25; ++trial) {
        // Random 4-state NFA.
        std::vector<Nfa::Transition> ts;
        for (int s = 0; s < 4; ++s)
            for (int d = 0; d < 4; ++d)
                for (const Letter& l : alpha)
                    if (rng() % 3 == 0) ts.push_back({s, l, d});
        Nfa nfa(4, ts, {0}, {3});
        auto shared = std::make_shared<Nfa>(nfa);
        for (Nfa::State q = 0; q < 4; ++q)
            for (Nfa::State q2 = 0; q2 < 4; ++q2) {
                NfaPtr sub = sublanguage(shared, q, q2);
                for (const Word& word : words_up_to(alpha, 4)) {
                    bool direct = nfa.run({q}, word).count(q2) > 0;
                    CHECK(sub->accepts(word) == direct);
                }
            }
    }
}

TEST_CASE("inverse_language on fixtures") {
    CHECK(inverse_language(parse_regex("a"))->accepts(w({"a^-"})));
    CHECK_FALSE(inverse_language(parse_regex("a"))->accepts(w({"a"})));
    NfaPtr eps = Nfa::epsilon();
    CHECK(inverse_language(eps)->accepts({}));
    CHECK(inverse_language(eps)->transitions().empty());
}

TEST_CASE("inverse_language agrees with the word-level inverse on random NFAs") {
    std::mt19937 rng(77);
    std::set<Letter> alpha{{"a", false}, {"b", false}, {"a", true}};
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<Nfa::Transition> ts;
        std::vector<Letter> letters(alpha.begin(), alpha.end());
        for (int s = 0; s < 3; ++s)
            for (int d = 0; d < 3; ++d)
                if (rng() % 2 == 0) ts.push_back({s, letters[rng() % letters.size()], d});
        auto nfa = std::make_shared<Nfa>(3, ts, std::set<int>{0}, std::set<int>{int(rng() % 3)});
        NfaPtr inv = inverse_language(nfa);
        std::set<Letter> sample = nfa->alphabet();
        for (const Letter& l : nfa->alphabet()) sample.insert(l.inverse());
        for (const Word& word : words_up_to(sample, 4))
            CHECK(nfa->accepts(word) == inv->accepts(word_inverse(word)));
        // Involution up to language equality.
        CHECK(language_equal_sampled(*inverse_language(inv), *nfa, 4));
    }
}

TEST_CASE("language splits into the union of initial-final sublanguages") {
    for (const char* re : {"(a.a^-)*", "a.(b.b)+", "a+|b+", "a*", "(a|b.b)*"}) {
        NfaPtr n = parse_regex(re);
        std::set<Letter> alpha = n->alphabet();
        for (const Word& word : words_up_to(alpha, 4)) {
            bool whole = n->accepts(word);
            bool any = false;
            for (Nfa::State qi : n->initial())
                for (Nfa::State qf : n->final())
                    if (sublanguage(n, qi, qf)->accepts(word)) any = true;
            CHECK(whole == any);
        }
    }
}

TEST_CASE("regular_path_pairs on the authors database") {
    GraphDb db;
    for (int i = 1; i <= 5; ++i) db.add_node("author" + std::to_string(i));
    for (int i = 1; i <= 3; ++i) db.add_node("paper" + std::to_string(i));
    auto wrote = [&](const char* a, const char* p) { db.add_edge(a, {"wrote", false}, p); };
    wrote("author1", "paper1");
    wrote("author2", "paper1");
    wrote("author2", "paper2");
    wrote("author3", "paper2");
    wrote("author4", "paper3");
    wrote("author5", "paper3");
    db.add_edge("author4", {"advised", false}, "author3");
    db.add_edge("author5", {"advised", false}, "author4");
    REQUIRE(db.nodes.size() == 8);
    REQUIRE(db.edge_count() == 8);

    SUBCASE("single letter yields exactly the wrote edges") {
        auto pairs = regular_path_pairs(*parse_regex("wrote"), db);
        CHECK(pairs.size() == 6);
        CHECK(pairs.count({"author1", "paper1"}));
        CHECK_FALSE(pairs.count({"author4", "author3"}));
    }
    SUBCASE("epsilon-only NFA yields the identity relation") {
        auto pairs = regular_path_pairs(*Nfa::epsilon(), db);
        CHECK(pairs.size() == db.nodes.size());
        for (const NodeId& n : db.nodes) CHECK(pairs.count({n, n}));
    }
    SUBCASE("co-authorship chains on the expanded database") {
        GraphDb ex = expand_inverses(db);
        auto pairs = regular_path_pairs(*parse_regex("(wrote.wrote^-)*"), ex);
        CHECK(pairs.count({"author1", "author3"}));
        CHECK(pairs.count({"author1", "author1"}));
        CHECK_FALSE(pairs.count({"author1", "author4"}));
    }
}

TEST_CASE("concat_languages composes word-wise") {
    NfaPtr ab = concat_languages(parse_regex("a"), parse_regex("b*"));
    CHECK(ab->accepts(w({"a"})));
    CHECK(ab->accepts(w({"a", "b", "b"})));
    CHECK_FALSE(ab->accepts(w({"b"})));
    NfaPtr witheps = concat_languages(parse_regex("a*"), parse_regex("b"));
    CHECK(witheps->accepts(w({"b"})));
    CHECK(witheps->accepts(w({"a", "a", "b"})));
}

TEST_CASE("the a+|b+ automaton keeps two final states for the pre-pass") {
    NfaPtr n = parse_regex("a+|b+");
    CHECK(n->final().size() == 2);
    CHECK(n->initial().size() == 1);
}
