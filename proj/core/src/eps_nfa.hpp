#pragma once

#include <memory>
#include <set>
#include <vector>

#include "crpq/nfa.hpp"

namespace crpq {

// NFA under construction with epsilon edges; shared by the regex parser and
// concat_languages, eliminated by eps_nfa_finish.
struct EpsNfa {
    int n = 0;
    std::vector<Nfa::Transition> trans;
    std::vector<std::pair<int, int>> eps;
    int initial = -1;
    std::set<int> finals;

    int fresh() { return n++; }
    std::vector<std::set<int>> closures() const;
};

std::shared_ptr<Nfa> eps_nfa_finish(const EpsNfa& e);

} // namespace crpq
