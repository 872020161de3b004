#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "crpq/graphdb.hpp"
#include "crpq/letter.hpp"
#include "crpq/query.hpp"

// Independent brute-force oracles used only by tests. They share plain data
// types with the library but reimplement every algorithm they check.
namespace crpq::oracle {

// Recursive regex matcher with its own parser; same surface grammar as
// parse_regex.
bool regex_matches(const std::string& pattern, const Word& word);

// Treewidth by exhausting all elimination orders (n <= 7).
int treewidth_by_elimination(const Multigraph& g);

// Pathwidth as the vertex separation number over all orders (n <= 7).
int pathwidth_by_orders(const Multigraph& g);

// All homomorphisms src -> dst by plain enumeration of every variable map.
size_t count_homomorphisms_bruteforce(const C2rpq& src, const C2rpq& dst, bool strong_onto);
bool homomorphism_exists_bruteforce(const C2rpq& src, const C2rpq& dst);

// All set partitions of items, canonical block order.
std::vector<std::vector<std::vector<std::string>>> all_partitions(
    const std::vector<std::string>& items);
size_t bell_number(size_t n);

// All walks of db with length <= max_len as (start, word, end).
struct Walk {
    NodeId start;
    Word word;
    NodeId end;
};
std::vector<Walk> enumerate_walks(const GraphDb& db, size_t max_len);

// Union-find over an equality graph, the collapse_equalities oracle.
std::map<std::string, std::string> equality_classes_bruteforce(
    const std::set<std::string>& vars, const std::vector<std::pair<std::string, std::string>>& eqs);

// Hand-enumerated Fig.-1-style expectation tables for the bundled authors
// and papers database.
const std::set<std::pair<NodeId, NodeId>>& gamma5_expected();

// Pigeonhole bound from the shortening argument: 2(t+1)d(n+1) + 2t.
size_t pigeonhole_bound(size_t n, size_t d, size_t t);

struct OracleSummary {
    size_t passed = 0;
    size_t failed = 0;
    std::vector<std::string> failures;

    void check(bool ok, const std::string& what) {
        if (ok) ++passed;
        else {
            ++failed;
            failures.push_back(what);
        }
    }
};

// Runs the oracle-vs-implementation comparisons behind the per-module
// invariants; failures are collected, not thrown.
OracleSummary oracle_suite();

} // namespace crpq::oracle
