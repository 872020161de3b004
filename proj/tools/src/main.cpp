#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::ostringstream os;
        os << std::cin.rdbuf();
        return os.str();
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int finish(const crpq::cli::Report& r, bool json) {
    std::cout << (json ? r.to_json() : r.to_text());
    return r.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analyze, rewrite and evaluate unions of conjunctive regular path queries "
                 "with two-way navigation over edge-labelled graph databases"};
    app.require_subcommand(1);
    bool json = false;
    app.add_flag("--json", json, "Render reports as JSON");

    std::string query_file, db_file, other_file, out_file, sidecar_file;
    std::string mode = "naive";
    crpq::cli::ApproxOpts aopt;
    crpq::cli::DecideOpts dopt;
    int word_bound = 8, bound = 2, k_cap = 3, m = 3;
    size_t limit = 100;

    auto* width = app.add_subcommand("width", "Exact widths per disjunct (tree, path, "
                                              "contracted, one-way contracted)");
    width->add_option("query", query_file, "Query file ('-' for stdin)")->required();

    auto* approx = app.add_subcommand(
        "approx", "Maximal under-approximation within a width class, bounded refinements");
    approx->add_option("query", query_file)->required();
    approx->add_option("--class", aopt.cls, "Width class: tw|pw|ctw|cpw|octw|ocpw")
        ->default_val("tw");
    approx->add_option("--k", aopt.k, "Width bound k")->default_val(1);
    approx->add_option("--m", aopt.m, "Refinement length cap m (default 3; exhaustive only when m >= ell)")
        ->default_val(3);
    approx->add_flag("--one-way", aopt.one_way, "Restrict to inverse-free approximations");
    approx->add_flag("--minimize", aopt.minimize, "Drop disjuncts absorbed by others");
    approx->add_option("--max-generated", aopt.max_generated,
                       "Cap on generated candidate images (default 200000)");
    approx->add_option("--out", out_file, "Write the emitted union to this file");
    approx->add_option("--sidecar", sidecar_file, "Write the provenance sidecar to this file");

    auto* decide = app.add_subcommand("decide", "Decide bounded semantic width");
    decide->add_option("query", query_file)->required();
    decide->add_option("--class", dopt.cls, "Target class: tw|pw")->default_val("tw");
    decide->add_option("--k", dopt.k, "Width bound k")->default_val(1);
    decide->add_option("--m", dopt.m, "Refinement length cap m")->default_val(3);
    decide->add_option("--word-bound", dopt.word_bound,
                       "Per-atom expansion word length bound (default 8)")
        ->default_val(8);
    decide->add_flag("--one-way", dopt.one_way, "One-way semantic width");
    decide->add_option("--max-generated", dopt.max_generated,
                       "Cap on generated candidate images (default 200000)");

    auto* eval = app.add_subcommand("eval", "Evaluate a query on a database");
    eval->add_option("query", query_file)->required();
    eval->add_option("db", db_file, "Edge-list database file")->required();
    eval->add_option("--mode", mode, "Engine: naive|tw|pw")->default_val("naive");
    eval->add_option("--k-cap", k_cap, "Refuse width-aware evaluation above this width")
        ->default_val(3);

    auto* contain = app.add_subcommand("contain", "Bounded containment left in right");
    contain->add_option("left", query_file)->required();
    contain->add_option("right", other_file)->required();
    contain->add_option("--word-bound", word_bound)->default_val(8);

    auto* expand = app.add_subcommand("expand", "Enumerate expansions (CQs)");
    expand->add_option("query", query_file)->required();
    expand->add_option("--bound", bound, "Per-atom word length bound")->default_val(2);
    expand->add_option("--limit", limit, "Maximum printed expansions")->default_val(size_t(100));

    auto* refine = app.add_subcommand("refine", "Enumerate m-refinements");
    refine->add_option("query", query_file)->required();
    refine->add_option("--m", m, "Refinement length bound")->default_val(3);
    refine->add_option("--limit", limit, "Maximum printed refinements")->default_val(size_t(100));

    CLI11_PARSE(app, argc, argv);

    try {
        using namespace crpq::cli;
        if (width->parsed()) return finish(cmd_width(slurp(query_file)), json);
        if (approx->parsed()) {
            std::string emitted, sidecar;
            Report r = cmd_approx(slurp(query_file), aopt, &emitted, &sidecar);
            if (!out_file.empty() && r.exit_code == 0) {
                std::ofstream(out_file) << emitted;
                r.payload["out_file"] = out_file;
            }
            if (!sidecar_file.empty() && r.exit_code == 0) {
                std::ofstream(sidecar_file) << sidecar;
                r.payload["sidecar_file"] = sidecar_file;
            }
            return finish(r, json);
        }
        if (decide->parsed()) return finish(cmd_decide(slurp(query_file), dopt), json);
        if (eval->parsed())
            return finish(cmd_eval(slurp(query_file), slurp(db_file), mode, k_cap), json);
        if (contain->parsed())
            return finish(cmd_contain(slurp(query_file), slurp(other_file), word_bound), json);
        if (expand->parsed()) return finish(cmd_expand(slurp(query_file), bound, limit), json);
        if (refine->parsed()) return finish(cmd_refine(slurp(query_file), m, limit), json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return crpq::cli::kExitParse;
    }
    return 0;
}
