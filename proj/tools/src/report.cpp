#include "report.hpp"

#include <iomanip>
#include <sstream>

namespace crpq::cli {

std::string fnv1a_hex(const std::string& content) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : content) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

void Report::add_input_digest(const std::string& name, const std::string& content) {
    payload["inputs"][name] = fnv1a_hex(content);
}

void Report::note_cap(const std::string& what) {
    payload["caps_hit"].push_back(what);
}

namespace {

void render(std::ostringstream& os, const std::string& key, const nlohmann::json& v, int indent) {
    std::string pad(indent * 2, ' ');
    if (v.is_object()) {
        os << pad << key << ":\n";
        for (auto it = v.begin(); it != v.end(); ++it) render(os, it.key(), it.value(), indent + 1);
    } else if (v.is_array()) {
        os << pad << key << ":";
        bool scalars = true;
        for (const auto& e : v)
            if (e.is_object() || e.is_array()) scalars = false;
        if (scalars) {
            for (const auto& e : v) os << " " << (e.is_string() ? e.get<std::string>() : e.dump());
            os << "\n";
        } else {
            os << "\n";
            int i = 0;
            for (const auto& e : v) render(os, "[" + std::to_string(i++) + "]", e, indent + 1);
        }
    } else {
        os << pad << key << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    }
}

} // namespace

std::string Report::to_text() const {
    std::ostringstream os;
    for (auto it = payload.begin(); it != payload.end(); ++it)
        render(os, it.key(), it.value(), 0);
    return os.str();
}

} // namespace crpq::cli
