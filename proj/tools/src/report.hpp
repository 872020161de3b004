#pragma once

#include <string>

#include <json.hpp>

namespace crpq::cli {

// Machine- and human-readable command report carrying identical facts.
struct Report {
    nlohmann::json payload = nlohmann::json::object();
    int exit_code = 0;

    void set_command(const std::string& cmd) { payload["command"] = cmd; }
    void add_input_digest(const std::string& name, const std::string& content);
    void note_cap(const std::string& what);

    std::string to_json() const { return payload.dump(2) + "\n"; }
    std::string to_text() const;
};

std::string fnv1a_hex(const std::string& content);

} // namespace crpq::cli
