#include "commands.hpp"

#include <algorithm>

#include "crpq/decomposition.hpp"
#include "crpq/evaluation.hpp"
#include "crpq/queryio.hpp"
#include "crpq/refine.hpp"

namespace crpq::cli {

WidthKind parse_width_kind(const std::string& cls) {
    if (cls == "tw") return WidthKind::TreeWidth;
    if (cls == "pw") return WidthKind::PathWidth;
    if (cls == "ctw") return WidthKind::ContractedTreeWidth;
    if (cls == "cpw") return WidthKind::ContractedPathWidth;
    if (cls == "octw") return WidthKind::OneWayContractedTreeWidth;
    if (cls == "ocpw") return WidthKind::OneWayContractedPathWidth;
    throw std::invalid_argument("unknown width class '" + cls + "' (tw|pw|ctw|cpw|octw|ocpw)");
}

nlohmann::json verdict_json(const Verdict& v) {
    nlohmann::json j;
    j["kind"] = v.kind_str();
    j["exact"] = v.exact;
    if (!v.notes.empty()) j["notes"] = v.notes;
    if (v.bound) j["bound"] = *v.bound;
    if (v.witness) j["witness"] = emit_query_text(*v.witness);
    return j;
}

namespace {

Report parse_failure(const std::string& command, const std::exception& e) {
    Report r;
    r.set_command(command);
    r.payload["error"] = e.what();
    r.exit_code = kExitParse;
    return r;
}

// Exact width or nullopt when the vertex cap fired.
std::optional<int> width_or_cap(const C2rpq& q, const WidthClass& cls) {
    try {
        return cls.width_of(q);
    } catch (const WidthCapExceeded&) {
        return std::nullopt;
    }
}

nlohmann::json width_entry(const C2rpq& q, WidthKind kind, int dummy_k) {
    WidthClass cls{kind, dummy_k};
    if (cls.one_way() && q.uses_inverses()) return "n/a: query uses inverses";
    auto w = width_or_cap(q, cls);
    if (!w) return "unknown: vertex cap exceeded";
    return *w;
}

} // namespace

Report cmd_width(const std::string& query_text) {
    Report r;
    r.set_command("width");
    try {
        Uc2rpq q = parse_query_text(query_text);
        r.add_input_digest("query", query_text);
        r.payload["query"] = q.name;
        for (const C2rpq& d : q.disjuncts) {
            nlohmann::json e;
            e["disjunct"] = d.name;
            e["atoms"] = d.atoms.size();
            e["tree_width"] = width_entry(d, WidthKind::TreeWidth, 0);
            e["path_width"] = width_entry(d, WidthKind::PathWidth, 0);
            e["contracted_tree_width"] = width_entry(d, WidthKind::ContractedTreeWidth, 0);
            e["contracted_path_width"] = width_entry(d, WidthKind::ContractedPathWidth, 0);
            e["one_way_contracted_tree_width"] =
                width_entry(d, WidthKind::OneWayContractedTreeWidth, 0);
            e["one_way_contracted_path_width"] =
                width_entry(d, WidthKind::OneWayContractedPathWidth, 0);
            r.payload["disjuncts"].push_back(e);
        }
    } catch (const std::invalid_argument& e) {
        return parse_failure("width", e);
    } catch (const std::runtime_error& e) {
        return parse_failure("width", e);
    }
    return r;
}

namespace {

nlohmann::json trace_json(const Refinement& ref) {
    nlohmann::json out = nlohmann::json::array();
    for (size_t j = 0; j < ref.traces.size(); ++j) {
        const AtomTrace& t = ref.traces[j];
        nlohmann::json a;
        a["atom"] = j;
        if (t.equality_collapse) {
            a["equality_collapse"] = true;
        } else {
            a["states"] = t.trace;
            nlohmann::json segs = nlohmann::json::array();
            for (const auto& s : t.segments) {
                if (s.kind == AtomTrace::Segment::SingleLetter)
                    segs.push_back("letter:" + s.letter.str());
                else
                    segs.push_back("sublanguage");
            }
            a["segments"] = segs;
        }
        out.push_back(a);
    }
    return out;
}

nlohmann::json partition_json(const std::map<Var, Var>& quotient) {
    std::map<Var, std::vector<Var>> blocks;
    for (const auto& [v, rep] : quotient) blocks[rep].push_back(v);
    nlohmann::json out = nlohmann::json::array();
    for (auto& [rep, vars] : blocks) {
        std::sort(vars.begin(), vars.end());
        out.push_back(vars);
    }
    return out;
}

} // namespace

Report cmd_approx(const std::string& query_text, const ApproxOpts& opt, std::string* emitted,
                  std::string* sidecar) {
    Report r;
    r.set_command("approx");
    try {
        Uc2rpq q = parse_query_text(query_text);
        r.add_input_digest("query", query_text);
        WidthKind kind = parse_width_kind(opt.cls);
        if (opt.one_way) {
            if (kind == WidthKind::ContractedTreeWidth || kind == WidthKind::TreeWidth)
                kind = kind == WidthKind::TreeWidth && opt.k >= 2
                           ? WidthKind::TreeWidth
                           : WidthKind::OneWayContractedTreeWidth;
            if (kind == WidthKind::ContractedPathWidth || kind == WidthKind::PathWidth)
                kind = WidthKind::OneWayContractedPathWidth;
        }
        WidthClass cls{kind, opt.k};
        r.payload["flags"] = {{"class", cls.str()},
                              {"k", opt.k},
                              {"m", opt.m},
                              {"one_way", opt.one_way},
                              {"minimize", opt.minimize},
                              {"max_generated", opt.max_generated}};

        SublangCache cache;
        MuaOptions mo;
        mo.m = opt.m;
        mo.max_generated = opt.max_generated;
        MuaResult res = mua_hom_bounded(q, cls, mo, cache);
        size_t max_atoms = 0;
        for (const C2rpq& d : q.disjuncts) max_atoms = std::max(max_atoms, d.atoms.size());
        WidthBound wb = width_bound(max_atoms, cls);
        r.payload["bounds"] = {{"m0", wb.m0.str()}, {"ell", wb.ell.str()}};
        bool exhaustive = res.exhaustive && BigUint(uint64_t(opt.m)) >= wb.ell;
        r.payload["exhaustive"] = exhaustive;
        if (!res.exhaustive) r.note_cap("max_generated");
        r.payload["generated_images"] = res.generated;
        r.payload["refinements_seen"] = res.refinements_seen;
        if (res.merged_parallel_atoms)
            r.payload["notes"] = "some images merged parallel atoms with sampled-equal languages";

        Uc2rpq out_union = res.approximation;
        if (opt.minimize) out_union = minimize_union(out_union);
        r.payload["disjuncts_emitted"] = out_union.disjuncts.size();
        std::string text = emit_query_text(out_union);
        r.payload["query_text"] = text;
        if (emitted) *emitted = text;

        nlohmann::json prov = nlohmann::json::array();
        if (!opt.minimize) {
            for (size_t i = 0; i < res.certificates.size(); ++i) {
                nlohmann::json c;
                c["disjunct"] = i;
                c["base_disjunct"] = res.certificates[i].base_disjunct;
                c["refinement"] = trace_json(res.certificates[i].refinement);
                c["partition"] = partition_json(res.certificates[i].quotient);
                prov.push_back(c);
            }
        }
        if (sidecar) *sidecar = prov.dump(2) + "\n";
    } catch (const std::invalid_argument& e) {
        return parse_failure("approx", e);
    } catch (const QueryParseError& e) {
        return parse_failure("approx", e);
    }
    return r;
}

Report cmd_decide(const std::string& query_text, const DecideOpts& opt) {
    Report r;
    r.set_command("decide");
    try {
        Uc2rpq q = parse_query_text(query_text);
        r.add_input_digest("query", query_text);
        WidthKind kind = parse_width_kind(opt.cls);
        if (kind != WidthKind::TreeWidth && kind != WidthKind::PathWidth)
            throw std::invalid_argument("decide targets --class tw or pw");

        DecideOptions dopt;
        dopt.m = opt.m;
        dopt.word_bound = opt.word_bound;
        dopt.mua.max_generated = opt.max_generated;
        SublangCache cache;
        DecideResult res = decide_semantic_width(q, kind, opt.k, opt.one_way, dopt, cache);

        r.payload["flags"] = {{"class", opt.cls},
                              {"k", opt.k},
                              {"m", opt.m},
                              {"word_bound", opt.word_bound},
                              {"one_way", opt.one_way},
                              {"max_generated", opt.max_generated}};
        r.payload["effective_class"] = res.effective_class.str();
        r.payload["bounds"] = {{"m0", res.bound.m0.str()}, {"ell", res.bound.ell.str()}};
        r.payload["m_covers_ell"] = res.m_covers_ell;
        r.payload["approximation_disjuncts"] = res.approximation.approximation.disjuncts.size();
        if (!res.approximation.exhaustive) r.note_cap("max_generated");
        r.payload["verdict"] = verdict_json(res.verdict);
    } catch (const std::invalid_argument& e) {
        return parse_failure("decide", e);
    } catch (const QueryParseError& e) {
        return parse_failure("decide", e);
    }
    return r;
}

Report cmd_eval(const std::string& query_text, const std::string& db_text,
                const std::string& mode, int k_cap) {
    Report r;
    r.set_command("eval");
    try {
        Uc2rpq q = parse_query_text(query_text);
        GraphDb db = load_db(db_text);
        r.add_input_digest("query", query_text);
        r.add_input_digest("db", db_text);
        r.payload["flags"] = {{"mode", mode}, {"k_cap", k_cap}};

        ResultSet result;
        if (mode == "naive") {
            result = evaluate_naive(q, db);
        } else if (mode == "tw" || mode == "pw") {
            for (const C2rpq& d : q.disjuncts) {
                Multigraph g = underlying_multigraph(d);
                auto [w, dec] = mode == "tw" ? exact_treewidth(g) : exact_pathwidth(g);
                if (w > k_cap) {
                    r.payload["error"] = d.name + ": width " + std::to_string(w) +
                                         " exceeds --k-cap " + std::to_string(k_cap);
                    r.exit_code = kExitCap;
                    return r;
                }
                TaggedTreeDecomposition ttd = tag_atoms(d, dec);
                ResultSet part = mode == "tw" ? evaluate_treewidth(d, db, ttd)
                                              : evaluate_pathwidth(d, db, ttd);
                result.tuples.insert(part.tuples.begin(), part.tuples.end());
            }
        } else {
            throw std::invalid_argument("unknown --mode '" + mode + "' (naive|tw|pw)");
        }

        if (q.arity() == 0) {
            r.payload["satisfied"] = result.satisfied();
        } else {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& t : result.tuples) rows.push_back(t);
            r.payload["rows"] = rows;
            r.payload["row_count"] = result.tuples.size();
        }
    } catch (const WidthCapExceeded& e) {
        r.payload["error"] = e.what();
        r.exit_code = kExitCap;
    } catch (const std::invalid_argument& e) {
        return parse_failure("eval", e);
    } catch (const std::runtime_error& e) {
        return parse_failure("eval", e);
    }
    return r;
}

Report cmd_contain(const std::string& a_text, const std::string& b_text, int word_bound) {
    Report r;
    r.set_command("contain");
    try {
        Uc2rpq a = parse_query_text(a_text);
        Uc2rpq b = parse_query_text(b_text);
        r.add_input_digest("left", a_text);
        r.add_input_digest("right", b_text);
        r.payload["flags"] = {{"word_bound", word_bound}};
        Verdict v = contained_bounded(a, b, word_bound);
        r.payload["verdict"] = verdict_json(v);
    } catch (const std::invalid_argument& e) {
        return parse_failure("contain", e);
    } catch (const std::runtime_error& e) {
        return parse_failure("contain", e);
    }
    return r;
}

Report cmd_expand(const std::string& query_text, int bound, size_t limit) {
    Report r;
    r.set_command("expand");
    try {
        Uc2rpq q = parse_query_text(query_text);
        r.add_input_digest("query", query_text);
        r.payload["flags"] = {{"bound", bound}, {"limit", limit}};
        nlohmann::json rows = nlohmann::json::array();
        size_t count = 0;
        bool capped = false;
        for (const C2rpq& d : q.disjuncts) {
            ExpansionEnumerator en(d, bound);
            while (auto e = en.next()) {
                if (count >= limit) {
                    capped = true;
                    break;
                }
                e->name = d.name + "_x" + std::to_string(count++);
                rows.push_back(emit_query_text(*e));
            }
            if (capped) break;
        }
        r.payload["expansions"] = rows;
        r.payload["count"] = count;
        if (capped) {
            r.note_cap("limit");
            r.payload["truncated"] = true;
        }
    } catch (const std::invalid_argument& e) {
        return parse_failure("expand", e);
    } catch (const std::runtime_error& e) {
        return parse_failure("expand", e);
    }
    return r;
}

Report cmd_refine(const std::string& query_text, int m, size_t limit) {
    Report r;
    r.set_command("refine");
    try {
        Uc2rpq q = parse_query_text(query_text);
        r.add_input_digest("query", query_text);
        r.payload["flags"] = {{"m", m}, {"limit", limit}};
        SublangCache cache;
        nlohmann::json rows = nlohmann::json::array();
        size_t count = 0;
        bool capped = false;
        for (const C2rpq& d : q.disjuncts) {
            RefinementEnumerator en(d, m, cache);
            while (auto ref = en.next()) {
                if (count >= limit) {
                    capped = true;
                    break;
                }
                ref->result.name = d.name + "_r" + std::to_string(count++);
                rows.push_back(emit_query_text(ref->result));
            }
            if (capped) break;
        }
        r.payload["refinements"] = rows;
        r.payload["count"] = count;
        if (capped) {
            r.note_cap("limit");
            r.payload["truncated"] = true;
        }
    } catch (const std::invalid_argument& e) {
        return parse_failure("refine", e);
    } catch (const std::runtime_error& e) {
        return parse_failure("refine", e);
    }
    return r;
}

} // namespace crpq::cli
