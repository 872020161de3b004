#include "crpq/queryio.hpp"

#include <cctype>
#include <optional>
#include <sstream>

#include "crpq/nfa.hpp"

namespace crpq {

namespace {

// ---- regex reconstruction (state elimination) ---------------------------

// Intermediate regexes: nullopt = empty language.
using Re = std::optional<std::string>;

bool is_eps(const Re& r) { return r && *r == "<eps>"; }

std::string paren(const std::string& s) {
    // Parenthesize unless it is a bare letter or already a group.
    bool bare = !s.empty();
    for (char c : s)
        if (!(std::isalnum((unsigned char)c) || c == '_')) bare = false;
    if (bare) return s;
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
        // Only if the parens actually match across the whole string.
        int depth = 0;
        bool whole = true;
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '(') ++depth;
            if (s[i] == ')') {
                --depth;
                if (depth == 0 && i + 1 != s.size()) whole = false;
            }
        }
        if (whole) return s;
    }
    return "(" + s + ")";
}

Re runion(const Re& a, const Re& b) {
    if (!a) return b;
    if (!b) return a;
    if (*a == *b) return a;
    return "(" + *a + "|" + *b + ")";
}

Re rconcat(const Re& a, const Re& b) {
    if (!a || !b) return std::nullopt;
    if (is_eps(a)) return b;
    if (is_eps(b)) return a;
    return paren(*a) + "." + paren(*b);
}

Re rstar(const Re& a) {
    if (!a || is_eps(a)) return std::string("<eps>");
    return paren(*a) + "*";
}

std::string nfa_to_regex(const Nfa& nfa) {
    int n = nfa.num_states();
    int S = n, T = n + 1;
    std::vector<std::vector<Re>> R(n + 2, std::vector<Re>(n + 2));
    for (const auto& t : nfa.transitions()) {
        Re piece = t.letter.str();
        R[t.src][t.dst] = runion(R[t.src][t.dst], piece);
    }
    for (Nfa::State q : nfa.initial()) R[S][q] = runion(R[S][q], std::string("<eps>"));
    for (Nfa::State q : nfa.final()) R[q][T] = runion(R[q][T], std::string("<eps>"));

    std::vector<int> alive;
    for (int q = 0; q < n; ++q) alive.push_back(q);
    for (int q : alive) {
        Re loop = rstar(R[q][q]);
        std::vector<int> others{S, T};
        for (int o = 0; o < n; ++o)
            if (o != q && o > q) others.push_back(o); // states < q already eliminated
        for (int a : others) {
            if (!R[a][q]) continue;
            for (int b : others) {
                if (!R[q][b]) continue;
                R[a][b] = runion(R[a][b], rconcat(rconcat(R[a][q], loop), R[q][b]));
            }
        }
    }
    if (!R[S][T]) return "<none>";
    return *R[S][T];
}

// ---- tokenizer -----------------------------------------------------------

struct Token {
    enum Kind { Ident, Punct, Regex, End } kind;
    std::string text;
    size_t pos;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip();
        if (pos_ >= text_.size()) return {Token::End, "", pos_};
        size_t start = pos_;
        char c = text_[pos_];
        if (std::isalpha((unsigned char)c) || c == '_') {
            while (pos_ < text_.size() &&
                   (std::isalnum((unsigned char)text_[pos_]) || text_[pos_] == '_'))
                ++pos_;
            return {Token::Ident, text_.substr(start, pos_ - start), start};
        }
        if (c == '-' && text_.compare(pos_, 2, "-[") == 0) {
            // -[ regex ]->
            pos_ += 2;
            size_t rstart = pos_;
            int depth = 0;
            while (pos_ < text_.size()) {
                if (text_[pos_] == '[') ++depth;
                if (text_[pos_] == ']') {
                    if (depth == 0) break;
                    --depth;
                }
                ++pos_;
            }
            if (pos_ >= text_.size()) throw QueryParseError("unterminated '-['", start);
            std::string regex = text_.substr(rstart, pos_ - rstart);
            ++pos_; // ]
            if (text_.compare(pos_, 2, "->") != 0)
                throw QueryParseError("expected '->' after ']'", pos_);
            pos_ += 2;
            return {Token::Regex, regex, start};
        }
        static const std::string puncts = "(),;{}=:";
        if (text_.compare(pos_, 2, ":=") == 0) {
            pos_ += 2;
            return {Token::Punct, ":=", start};
        }
        if (puncts.find(c) != std::string::npos) {
            ++pos_;
            return {Token::Punct, std::string(1, c), start};
        }
        throw QueryParseError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    Token peek() {
        size_t save = pos_;
        Token t = next();
        pos_ = save;
        return t;
    }

private:
    void skip() {
        for (;;) {
            while (pos_ < text_.size() && std::isspace((unsigned char)text_[pos_])) ++pos_;
            if (pos_ < text_.size() && text_[pos_] == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
                continue;
            }
            break;
        }
    }

    const std::string& text_;
    size_t pos_ = 0;
};

std::vector<Var> parse_varlist(Lexer& lex) {
    std::vector<Var> out;
    Token t = lex.next();
    if (!(t.kind == Token::Punct && t.text == "("))
        throw QueryParseError("expected '('", t.pos);
    if (lex.peek().kind == Token::Punct && lex.peek().text == ")") {
        lex.next();
        return out;
    }
    for (;;) {
        t = lex.next();
        if (t.kind != Token::Ident) throw QueryParseError("expected variable name", t.pos);
        out.push_back(t.text);
        t = lex.next();
        if (t.kind == Token::Punct && t.text == ")") break;
        if (!(t.kind == Token::Punct && t.text == ","))
            throw QueryParseError("expected ',' or ')'", t.pos);
    }
    return out;
}

// Atoms up to (but not consuming) the given closing punct.
void parse_body(Lexer& lex, C2rpq& q, const std::string& closer) {
    Token p = lex.peek();
    if (p.kind == Token::Punct && p.text == closer) return;
    for (;;) {
        Token t = lex.next();
        if (t.kind != Token::Ident) throw QueryParseError("expected variable name", t.pos);
        Var src = t.text;
        Token op = lex.next();
        if (op.kind == Token::Regex) {
            Token dst = lex.next();
            if (dst.kind != Token::Ident) throw QueryParseError("expected variable name", dst.pos);
            NfaPtr lang;
            try {
                lang = op.text == "<none>"
                           ? NfaPtr(std::make_shared<Nfa>(1, std::vector<Nfa::Transition>{},
                                                          std::set<int>{0}, std::set<int>{}))
                           : parse_regex(op.text);
            } catch (const RegexSyntaxError& e) {
                throw QueryParseError(std::string("bad regex: ") + e.what(), op.pos);
            }
            q.atoms.push_back({src, lang, dst.text});
        } else if (op.kind == Token::Punct && op.text == "=") {
            Token dst = lex.next();
            if (dst.kind != Token::Ident) throw QueryParseError("expected variable name", dst.pos);
            q.equalities.push_back({src, dst.text});
        } else {
            throw QueryParseError("expected '-[regex]->' or '='", op.pos);
        }
        Token sep = lex.peek();
        if (sep.kind == Token::Punct && sep.text == ",") {
            lex.next();
            continue;
        }
        break;
    }
}

C2rpq parse_disjunct_body(Lexer& lex, const std::string& name, std::vector<Var> output,
                          const std::string& closer) {
    C2rpq q;
    q.name = name;
    q.output = std::move(output);
    parse_body(lex, q, closer);
    q.sync_vars();
    CollapseResult col = collapse_equalities(q);
    col.query.name = q.name;
    return col.query;
}

} // namespace

Uc2rpq parse_query_text(const std::string& text) {
    Lexer lex(text);
    Token t = lex.next();
    if (t.kind != Token::Ident || (t.text != "query" && t.text != "union"))
        throw QueryParseError("expected 'query' or 'union'", t.pos);
    bool is_union = t.text == "union";
    Token name = lex.next();
    if (name.kind != Token::Ident) throw QueryParseError("expected query name", name.pos);
    std::vector<Var> output = parse_varlist(lex);

    Uc2rpq out;
    out.name = name.text;
    if (!is_union) {
        Token assign = lex.next();
        if (!(assign.kind == Token::Punct && assign.text == ":="))
            throw QueryParseError("expected ':='", assign.pos);
        out.disjuncts.push_back(parse_disjunct_body(lex, name.text, output, ";"));
        Token semi = lex.next();
        if (!(semi.kind == Token::Punct && semi.text == ";"))
            throw QueryParseError("expected ';'", semi.pos);
    } else {
        Token open = lex.next();
        if (!(open.kind == Token::Punct && open.text == "{"))
            throw QueryParseError("expected '{'", open.pos);
        int i = 0;
        for (;;) {
            Token d = lex.next();
            if (d.kind == Token::Punct && d.text == "}") break;
            if (!(d.kind == Token::Ident && d.text == "disjunct"))
                throw QueryParseError("expected 'disjunct' or '}'", d.pos);
            Token ob = lex.next();
            if (!(ob.kind == Token::Punct && ob.text == "{"))
                throw QueryParseError("expected '{'", ob.pos);
            out.disjuncts.push_back(
                parse_disjunct_body(lex, name.text + "_" + std::to_string(i++), output, "}"));
            Token cb = lex.next();
            if (!(cb.kind == Token::Punct && cb.text == "}"))
                throw QueryParseError("expected '}'", cb.pos);
        }
        if (out.disjuncts.empty()) throw QueryParseError("union with no disjuncts", 0);
    }
    out.validate();
    return out;
}

std::string atom_regex(const Atom& a) {
    if (a.lang->source()) return *a.lang->source();
    if (a.lang->literal()) return a.lang->literal()->str();
    return nfa_to_regex(*a.lang);
}

namespace {

void emit_body(std::ostringstream& os, const C2rpq& q,
               const std::vector<std::pair<Var, Var>>& extra_equalities) {
    bool first = true;
    for (const Atom& a : q.atoms) {
        os << (first ? "" : " , ") << a.src << " -[" << atom_regex(a) << "]-> " << a.dst;
        first = false;
    }
    for (const auto& [x, y] : q.equalities) {
        os << (first ? "" : " , ") << x << " = " << y;
        first = false;
    }
    for (const auto& [x, y] : extra_equalities) {
        os << (first ? "" : " , ") << x << " = " << y;
        first = false;
    }
}

// Rename a disjunct so its output tuple is exactly o0..oN-1 (equalities added
// for repeated output variables) and every other variable is grammar-safe.
struct EmitDisjunct {
    C2rpq query;
    std::vector<std::pair<Var, Var>> extra_equalities;
};

EmitDisjunct prepare_disjunct(const C2rpq& d) {
    EmitDisjunct out;
    std::map<Var, Var> ren;
    for (size_t i = 0; i < d.output.size(); ++i) {
        Var target = "o" + std::to_string(i);
        auto it = ren.find(d.output[i]);
        if (it == ren.end()) ren[d.output[i]] = target;
        else out.extra_equalities.push_back({it->second, target});
    }
    int fresh = 0;
    for (const Var& v : d.vars) {
        if (ren.count(v)) continue;
        Var nv = v;
        bool bad = nv.empty() || !(std::isalpha((unsigned char)nv[0]) || nv[0] == '_');
        for (char c : nv)
            if (!(std::isalnum((unsigned char)c) || c == '_')) bad = true;
        if (!bad && nv.size() > 1 && nv[0] == 'o') {
            // Avoid collision with the output names.
            bool digits = true;
            for (size_t i = 1; i < nv.size(); ++i)
                if (!std::isdigit((unsigned char)nv[i])) digits = false;
            if (digits) bad = true;
        }
        if (bad) nv = "v" + std::to_string(fresh++);
        while ([&] {
            for (auto& [a, b] : ren)
                if (b == nv) return true;
            return false;
        }())
            nv = "v" + std::to_string(fresh++);
        ren[v] = nv;
    }
    out.query.name = d.name;
    for (const Var& v : d.output) out.query.output.push_back(ren.at(v));
    for (const Atom& a : d.atoms) out.query.atoms.push_back({ren.at(a.src), a.lang, ren.at(a.dst)});
    for (auto& [x, y] : d.equalities) out.query.equalities.push_back({ren.at(x), ren.at(y)});
    out.query.sync_vars();
    return out;
}

} // namespace

std::string emit_query_text(const C2rpq& q) {
    return emit_query_text(Uc2rpq{q.name, {q}});
}

std::string emit_query_text(const Uc2rpq& q) {
    std::ostringstream os;
    std::vector<EmitDisjunct> ds;
    for (const C2rpq& d : q.disjuncts) ds.push_back(prepare_disjunct(d));

    auto header_vars = [&](std::ostringstream& o) {
        size_t arity = q.arity();
        for (size_t i = 0; i < arity; ++i) o << (i ? ", " : "") << "o" << i;
    };

    if (ds.size() == 1) {
        os << "query " << q.name << "(";
        header_vars(os);
        os << ") := ";
        emit_body(os, ds[0].query, ds[0].extra_equalities);
        os << " ;\n";
        return os.str();
    }
    os << "union " << q.name << "(";
    header_vars(os);
    os << ") {\n";
    for (const auto& d : ds) {
        os << "  disjunct { ";
        emit_body(os, d.query, d.extra_equalities);
        os << " }\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace crpq
