#pragma once

#include <random>
#include <sstream>
#include <string>

#include "crpq/evaluation.hpp"
#include "crpq/queryio.hpp"
#include "crpq/semantics.hpp"
#include "crpq/trio.hpp"
#include "oracles.hpp"

// Randomized property suites shared by the property tests and the acceptance
// runner. Every suite uses a fixed seed and returns (cases run, failures).
namespace crpq::properties {

struct Outcome {
    std::string name;
    size_t cases = 0;
    size_t failures = 0;
    std::string detail;

    bool ok() const { return failures == 0; }
};

inline C2rpq parse1(const std::string& text) {
    return parse_query_text(text).disjuncts.at(0);
}

inline GraphDb random_db(std::mt19937& rng, int max_nodes,
                         const std::vector<std::string>& labels) {
    GraphDb db;
    int n = 1 + int(rng() % max_nodes);
    for (int v = 0; v < n; ++v) db.add_node("n" + std::to_string(v));
    for (int e = 0; e < int(rng() % (2 * n + 2)); ++e)
        db.add_edge("n" + std::to_string(rng() % n), {labels[rng() % labels.size()], false},
                    "n" + std::to_string(rng() % n));
    return db;
}

inline C2rpq random_query(std::mt19937& rng, int max_atoms,
                          const std::vector<std::string>& regexes, bool with_output = true) {
    C2rpq q;
    q.name = "q";
    int nv = 2 + int(rng() % 3);
    for (int e = 0; e < 1 + int(rng() % max_atoms); ++e)
        q.atoms.push_back({"v" + std::to_string(rng() % nv),
                           parse_regex(regexes[rng() % regexes.size()]),
                           "v" + std::to_string(rng() % nv)});
    q.sync_vars();
    if (with_output && !q.vars.empty()) q.output.push_back(*q.vars.begin());
    q.sync_vars();
    return q;
}

// Refinement soundness: every bounded expansion of every sampled refinement
// is contained in the original query.
inline Outcome refinement_soundness(size_t target_cases = 100) {
    Outcome out{"refinement soundness"};
    std::mt19937 rng(101);
    SublangCache cache;
    std::vector<std::string> regexes{"a*", "a.b", "a|b", "b+", "(a.b)*"};
    while (out.cases < target_cases) {
        C2rpq gamma = random_query(rng, 2, regexes);
        Uc2rpq gu = as_union(gamma);
        RefinementEnumerator en(gamma, 2, cache);
        size_t skip = rng() % 10;
        std::optional<Refinement> pick;
        for (size_t i = 0; i <= skip; ++i) {
            auto r = en.next();
            if (!r) break;
            pick = *r;
        }
        if (!pick) continue;
        ExpansionEnumerator exps(pick->result, 2);
        size_t used = 0;
        while (used < 3) {
            auto xi = exps.next();
            if (!xi) break;
            ++used;
            ++out.cases;
            if (!cq_contained(*xi, gu)) {
                ++out.failures;
                out.detail = "expansion escaped: " + emit_query_text(*xi);
            }
        }
    }
    return out;
}

// Fact-2.2 shape at the expansion level: rho contained in its condensation,
// condensation contained in gamma.
inline Outcome condensation_ordering(size_t target_cases = 100) {
    Outcome out{"condensation ordering"};
    std::mt19937 rng(202);
    SublangCache cache;
    std::vector<std::string> regexes{"(a.b)*", "a*", "(a|b)+", "a.b.a"};
    while (out.cases < target_cases) {
        C2rpq gamma = parse1("query g(x, y) := x -[" + regexes[rng() % regexes.size()] +
                             "]-> y ;");
        RefinementEnumerator en(gamma, 4, cache);
        std::optional<Refinement> pick;
        size_t skip = rng() % 20;
        for (size_t i = 0; i <= skip; ++i) {
            auto r = en.next();
            if (!r) break;
            if (r->traces[0].segments.size() >= 3) pick = *r;
        }
        if (!pick) continue;
        size_t n = pick->traces[0].segments.size();
        size_t i = rng() % (n - 2);
        size_t j = i + 2 + rng() % (n - i - 2 + 1);
        if (j > n) j = n;
        Refinement condensed = condense(*pick, 0, i, j, cache);

        Uc2rpq rho_c = as_union(condensed.result);
        Uc2rpq gu = as_union(gamma);
        ExpansionEnumerator rho_exps(pick->result, 2);
        size_t used = 0;
        while (used < 2) {
            auto xi = rho_exps.next();
            if (!xi) break;
            ++used;
            ++out.cases;
            if (!cq_contained(*xi, rho_c)) ++out.failures;
        }
        ExpansionEnumerator cond_exps(condensed.result, 2);
        used = 0;
        while (used < 2) {
            auto xi = cond_exps.next();
            if (!xi) break;
            ++used;
            ++out.cases;
            if (!cq_contained(*xi, gu)) ++out.failures;
        }
    }
    return out;
}

// Refinements preserve tree-width k for k >= 2.
inline Outcome width_preservation(size_t target_cases = 100) {
    Outcome out{"refinements preserve tree-width k >= 2"};
    std::mt19937 rng(303);
    SublangCache cache;
    std::vector<std::string> regexes{"a*", "a.b", "(a.b)*", "a|b"};
    while (out.cases < target_cases) {
        for (int k : {2, 3}) {
            C2rpq gamma = random_query(rng, 3, regexes);
            int tw = exact_treewidth(underlying_multigraph(gamma)).first;
            if (tw > k) continue;
            RefinementEnumerator en(gamma, 3, cache);
            size_t looked = 0;
            while (looked < 8) {
                auto r = en.next();
                if (!r) break;
                ++looked;
                ++out.cases;
                int rw = exact_treewidth(underlying_multigraph(r->result)).first;
                if (rw > k) {
                    ++out.failures;
                    out.detail = "width " + std::to_string(rw) + " from tw<=" + std::to_string(k);
                }
            }
        }
    }
    return out;
}

// Contractions preserve naive evaluation.
inline Outcome contraction_invariance(size_t target_cases = 100) {
    Outcome out{"contraction semantic invariance"};
    std::mt19937 rng(404);
    std::vector<std::string> regexes{"a", "b", "a*", "a.b", "b+"};
    while (out.cases < target_cases) {
        C2rpq gamma = random_query(rng, 4, regexes);
        C2rpq two = contract(gamma, ContractionMode::TwoWay);
        C2rpq one = contract(gamma, ContractionMode::OneWay);
        GraphDb db = random_db(rng, 12, {"a", "b"});
        ResultSet naive = evaluate_naive(gamma, db);
        ++out.cases;
        if (!(naive == evaluate_naive(two, db) && naive == evaluate_naive(one, db)))
            ++out.failures;
    }
    return out;
}

// All three engines agree where their preconditions hold.
inline Outcome engine_agreement(size_t target_cases = 100) {
    Outcome out{"engine agreement"};
    std::mt19937 rng(505);
    std::vector<std::string> regexes{"a", "b", "a*", "a.b", "(a|b)*", "a^-"};
    while (out.cases < target_cases) {
        C2rpq q = random_query(rng, 4, regexes, rng() % 2);
        GraphDb db = random_db(rng, 12, {"a", "b"});
        ResultSet naive = evaluate_naive(q, db);
        Multigraph g = underlying_multigraph(q);
        auto [tw, tdec] = exact_treewidth(g);
        auto [pw, pdec] = exact_pathwidth(g);
        if (tw > 2 || pw > 2) continue;
        ++out.cases;
        bool ok = evaluate_treewidth(q, db, tag_atoms(q, tdec)) == naive &&
                  evaluate_pathwidth(q, db, tag_atoms(q, pdec)) == naive;
        if (!ok) ++out.failures;
    }
    return out;
}

// Fact-5.5-style pigeonhole: under the hypotheses a valid pair always exists
// and the search routine finds one with all side conditions.
inline Outcome pigeonhole(size_t target_cases = 1000) {
    Outcome out{"pigeonhole search"};
    std::mt19937 rng(606);
    while (out.cases < target_cases) {
        size_t n = 1 + rng() % 4;   // profile alphabet
        size_t d = 1 + rng() % 4;
        size_t t = rng() % 3;
        size_t m = oracle::pigeonhole_bound(n, d, t) + rng() % 10;

        // Sequence respecting the hypotheses: at most t traps, at most half
        // avoids.
        std::vector<int> tokens;
        size_t traps = 0, avoids = 0;
        for (size_t i = 0; i < m; ++i) {
            int pick = int(rng() % 10);
            if (pick == 0 && traps < t) {
                tokens.push_back(kTrapToken);
                ++traps;
            } else if (pick <= 4 && 2 * (avoids + 1) <= m) {
                tokens.push_back(kAvoidToken);
                ++avoids;
            } else {
                tokens.push_back(int(rng() % n));
            }
        }
        ++out.cases;
        auto pair = pigeonhole_search(tokens, d);
        if (!pair) {
            ++out.failures;
            continue;
        }
        auto [i, j] = *pair;
        bool valid = j - i >= d && tokens[i] == tokens[j] && tokens[i] >= 0;
        for (size_t p = i; p <= j && valid; ++p)
            if (tokens[p] == kTrapToken) valid = false;
        if (!valid) ++out.failures;
    }
    return out;
}

// Word-level inverse language test.
inline Outcome inverse_words(size_t target_cases = 100) {
    Outcome out{"inverse language word test"};
    std::mt19937 rng(707);
    std::vector<Letter> letters{{"a", false}, {"b", false}, {"a", true}};
    while (out.cases < target_cases) {
        std::vector<Nfa::Transition> ts;
        int n = 2 + int(rng() % 3);
        for (int s = 0; s < n; ++s)
            for (int d2 = 0; d2 < n; ++d2)
                if (rng() % 3 == 0) ts.push_back({s, letters[rng() % letters.size()], d2});
        auto nfa = std::make_shared<Nfa>(n, ts, std::set<int>{0}, std::set<int>{n - 1});
        NfaPtr inv = inverse_language(nfa);
        std::set<Letter> alpha(letters.begin(), letters.end());
        for (const Letter& l : letters) alpha.insert(l.inverse());
        ++out.cases;
        bool ok = true;
        for (const Word& word : words_up_to(alpha, 4))
            if (nfa->accepts(word) != inv->accepts(word_inverse(word))) ok = false;
        if (!language_equal_sampled(*inverse_language(inv), *nfa, 4)) ok = false;
        if (!ok) ++out.failures;
    }
    return out;
}

// Post-invariants of the two rewriting passes on randomized trios.
inline Outcome pass_invariants(size_t target_cases = 100) {
    Outcome out{"rewriting pass invariants"};
    std::mt19937 rng(808);
    SublangCache cache;
    std::vector<std::string> regexes{"a*", "a.b", "(a.b)*", "a+"};
    size_t m0 = 8;
    while (out.cases < target_cases) {
        std::string r1 = regexes[rng() % regexes.size()];
        std::string r2 = regexes[rng() % regexes.size()];
        C2rpq gamma =
            parse1("query g(x, y) := x -[" + r1 + "]-> y , y -[" + r2 + "]-> x ;");
        RefinementEnumerator en(gamma, 2, cache);
        std::optional<Refinement> pick;
        size_t skip = rng() % 12;
        for (size_t i = 0; i <= skip; ++i) {
            auto r = en.next();
            if (!r) break;
            pick = *r;
        }
        if (!pick) continue;
        std::vector<std::vector<Var>> merges;
        std::vector<Var> vars(pick->result.vars.begin(), pick->result.vars.end());
        if (vars.size() > 2 && rng() % 2) {
            size_t a = rng() % vars.size(), b = rng() % vars.size();
            if (a != b) merges.push_back({vars[a], vars[b]});
        }
        ImageResult img = quotient_by_partition(pick->result, merges);
        Trio trio{gamma, *pick, img.image, img.quotient};
        if (trio.alpha.vars.size() > 10) continue;
        Multigraph g = underlying_multigraph(trio.alpha);
        auto [w, dec] = exact_treewidth(g);
        TaggedTreeDecomposition ttd = tag_atoms(trio.rho.result, make_fine(dec), trio.f);
        int k = std::max(1, w);

        ++out.cases;
        bool ok = true;
        std::string why;
        try {
            PassResult p1 = make_locally_acyclic(trio, ttd, cache);
            ok = ok && is_locally_acyclic(p1.trio, p1.ttd);
            ok = ok && is_fine(p1.ttd.dec);
            ok = ok && p1.ttd.dec.width() <= std::max(k, ttd.dec.width());
            ok = ok && valid_decomposition(p1.ttd.dec, underlying_multigraph(p1.trio.alpha), &why);
            p1.trio.validate();

            PassResult p2 = shorten_nonbranching(p1.trio, p1.ttd, k, m0, cache);
            for (const auto& chain : nonbranching_paths(p2.ttd.dec))
                ok = ok && chain.size() < m0;
            ok = ok && is_fine(p2.ttd.dec);
            ok = ok && is_locally_acyclic(p2.trio, p2.ttd);
            ok = ok && p2.ttd.dec.width() <= std::max(k, ttd.dec.width());
            ok = ok && valid_decomposition(p2.ttd.dec, underlying_multigraph(p2.trio.alpha), &why);
            p2.trio.validate();
            ok = ok && count_atomic_bags(p2.trio, p2.ttd) <= 2 * gamma.atom_count();

            // Expansion-level containment along the chain alpha <= alpha' <= alpha''.
            auto contained = [&](const C2rpq& lo, const C2rpq& hi) {
                Uc2rpq rhs = as_union(hi);
                ExpansionEnumerator exps(lo, 2);
                size_t used = 0;
                while (used < 3) {
                    auto xi = exps.next();
                    if (!xi) break;
                    ++used;
                    if (!cq_contained(*xi, rhs)) return false;
                }
                return true;
            };
            ok = ok && contained(trio.alpha, p1.trio.alpha);
            ok = ok && contained(p1.trio.alpha, p2.trio.alpha);
        } catch (const std::exception& e) {
            ok = false;
            why = e.what();
        }
        if (!ok) {
            ++out.failures;
            out.detail = why;
        }
    }
    return out;
}

inline std::vector<Outcome> run_all() {
    return {refinement_soundness(), condensation_ordering(), width_preservation(),
            contraction_invariance(), engine_agreement(),     pigeonhole(),
            inverse_words(),         pass_invariants()};
}

} // namespace crpq::properties
