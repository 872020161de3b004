#include "crpq/graphdb.hpp"

#include <cctype>
#include <sstream>

namespace crpq {

bool GraphDb::expanded() const {
    for (const auto& [src, rest] : edges)
        if (rest.first.inverted) return true;
    return false;
}

namespace {

Letter parse_label(const std::string& tok, bool allow_inverses, int line_no) {
    std::string base = tok;
    bool inverted = false;
    if (base.size() > 2 && base.compare(base.size() - 2, 2, "^-") == 0) {
        inverted = true;
        base = base.substr(0, base.size() - 2);
    }
    for (char c : base)
        if (!std::isalnum((unsigned char)c) && c != '_')
            throw DbParseError("bad label '" + tok + "'", line_no);
    if (base.empty()) throw DbParseError("empty label", line_no);
    if (inverted && !allow_inverses)
        throw DbParseError("inverse label '" + tok + "' not allowed in user input", line_no);
    return {base, inverted};
}

} // namespace

GraphDb load_db(const std::string& text, bool allow_inverses) {
    GraphDb db;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);
        if (toks.empty()) continue;
        if (toks.size() == 2 && toks[0] == "node") {
            db.add_node(toks[1]);
        } else if (toks.size() == 3) {
            db.add_edge(toks[0], parse_label(toks[1], allow_inverses, line_no), toks[2]);
        } else {
            throw DbParseError("expected 'src label dst' or 'node id'", line_no);
        }
    }
    return db;
}

std::string serialize_db(const GraphDb& db) {
    std::ostringstream os;
    std::set<NodeId> touched;
    for (const auto& [src, rest] : db.edges) {
        touched.insert(src);
        touched.insert(rest.second);
    }
    for (const NodeId& n : db.nodes)
        if (!touched.count(n)) os << "node " << n << "\n";
    for (const auto& [src, rest] : db.edges)
        os << src << " " << rest.first.str() << " " << rest.second << "\n";
    return os.str();
}

GraphDb expand_inverses(const GraphDb& db) {
    if (db.expanded())
        throw std::invalid_argument("expand_inverses: database already expanded");
    GraphDb out = db;
    for (const auto& [src, rest] : db.edges)
        out.add_edge(rest.second, rest.first.inverse(), src);
    return out;
}

} // namespace crpq
