#pragma once

#include <stdexcept>
#include <string>

#include "crpq/query.hpp"

namespace crpq {

// Query file grammar:
//   query Name(x, y) := x -[regex]-> y , x = z , ... ;
//   union Name(x, y) { disjunct { ... } disjunct { ... } }
// Boolean queries are written Name(). `#` starts a comment. Equality atoms
// are collapsed on load. Variable and query names match [A-Za-z_][A-Za-z0-9_]*
// so fresh refinement middles (`0#1`) can never collide.
struct QueryParseError : std::runtime_error {
    size_t position;
    QueryParseError(const std::string& what, size_t pos)
        : std::runtime_error(what + " at offset " + std::to_string(pos)), position(pos) {}
};

// Parses the first query or union in the text.
Uc2rpq parse_query_text(const std::string& text);

// Emits in the same grammar; re-parsing yields an isomorphic query.
std::string emit_query_text(const Uc2rpq& q);
std::string emit_query_text(const C2rpq& q);

// The regex surface form of one atom language (stored source when available,
// a reconstructed description otherwise).
std::string atom_regex(const Atom& a);

} // namespace crpq
