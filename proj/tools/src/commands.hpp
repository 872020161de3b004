#pragma once

#include <optional>
#include <string>

#include "crpq/approximation.hpp"
#include "crpq/semantics.hpp"
#include "report.hpp"

namespace crpq::cli {

// Exit codes: 0 result produced, 2 parse/usage error, 3 cap exceeded.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitCap = 3;

struct ApproxOpts {
    std::string cls = "tw";
    int k = 1;
    int m = 3;
    bool one_way = false;
    bool minimize = false;
    size_t max_generated = 200000;
};

struct DecideOpts {
    std::string cls = "tw";
    int k = 1;
    int m = 3;
    int word_bound = 8;
    bool one_way = false;
    size_t max_generated = 200000;
};

Report cmd_width(const std::string& query_text);
Report cmd_approx(const std::string& query_text, const ApproxOpts& opt,
                  std::string* emitted = nullptr, std::string* sidecar = nullptr);
Report cmd_decide(const std::string& query_text, const DecideOpts& opt);
Report cmd_eval(const std::string& query_text, const std::string& db_text,
                const std::string& mode, int k_cap);
Report cmd_contain(const std::string& a_text, const std::string& b_text, int word_bound);
Report cmd_expand(const std::string& query_text, int bound, size_t limit);
Report cmd_refine(const std::string& query_text, int m, size_t limit);

WidthKind parse_width_kind(const std::string& cls);
nlohmann::json verdict_json(const Verdict& v);

} // namespace crpq::cli
