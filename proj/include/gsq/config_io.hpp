#pragma once

#include "gsq/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsq {

/// Raised on any grammar violation; the message names the offending
/// section/key.
class ConfigParseError : public std::runtime_error {
public:
    explicit ConfigParseError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Section {
    std::string name;
    // insertion-ordered keys
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* find(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return &v;
        return nullptr;
    }
};

inline double parse_real(const Section& s, const std::string& key) {
    const std::string* raw = s.find(key);
    if (!raw) throw ConfigParseError("[" + s.name + "] missing key '" + key + "'");
    char* end = nullptr;
    const double v = std::strtod(raw->c_str(), &end);
    if (end == raw->c_str() || *end != '\0')
        throw ConfigParseError("[" + s.name + "] key '" + key + "': not a number: '" + *raw + "'");
    return v;
}

inline int parse_int(const Section& s, const std::string& key) {
    const std::string* raw = s.find(key);
    if (!raw) throw ConfigParseError("[" + s.name + "] missing key '" + key + "'");
    char* end = nullptr;
    const long v = std::strtol(raw->c_str(), &end, 10);
    if (end == raw->c_str() || *end != '\0')
        throw ConfigParseError("[" + s.name + "] key '" + key + "': not an integer: '" + *raw + "'");
    return static_cast<int>(v);
}

inline void reject_unknown_keys(const Section& s, const std::vector<std::string>& allowed) {
    for (const auto& [k, v] : s.entries) {
        bool known = false;
        for (const auto& a : allowed)
            if (k == a) { known = true; break; }
        if (!known)
            throw ConfigParseError("[" + s.name + "] unknown key '" + k + "'");
    }
}

/// Distribution keys, by kind:
///   exponential        -> rate
///   deterministic      -> value
///   erlang             -> shape, rate
///   hyperexponential2  -> rate, rate2, p
inline ServiceDistribution parse_distribution(const Section& s,
                                              std::vector<std::string>& allowed) {
    const std::string* kind = s.find("kind");
    if (!kind) throw ConfigParseError("[" + s.name + "] missing key 'kind'");
    allowed.push_back("kind");
    if (*kind == "exponential") {
        allowed.push_back("rate");
        return ServiceDistribution::exponential(parse_real(s, "rate"));
    }
    if (*kind == "deterministic") {
        allowed.push_back("value");
        return ServiceDistribution::deterministic(parse_real(s, "value"));
    }
    if (*kind == "erlang") {
        allowed.push_back("shape");
        allowed.push_back("rate");
        return ServiceDistribution::erlang(parse_int(s, "shape"), parse_real(s, "rate"));
    }
    if (*kind == "hyperexponential2") {
        allowed.push_back("rate");
        allowed.push_back("rate2");
        allowed.push_back("p");
        return ServiceDistribution::hyperexp2(parse_real(s, "rate"), parse_real(s, "rate2"),
                                              parse_real(s, "p"));
    }
    throw ConfigParseError("[" + s.name + "] key 'kind': unknown distribution '" + *kind + "'");
}

inline std::string render_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void render_distribution(std::ostringstream& out, const ServiceDistribution& d) {
    out << "kind = " << to_string(d.kind()) << "\n";
    switch (d.kind()) {
        case DistKind::Exponential:
            out << "rate = " << render_real(d.rate1()) << "\n";
            break;
        case DistKind::Deterministic:
            out << "value = " << render_real(d.value()) << "\n";
            break;
        case DistKind::Erlang:
            out << "shape = " << d.shape() << "\n";
            out << "rate = " << render_real(d.rate1()) << "\n";
            break;
        case DistKind::HyperExp2:
            out << "rate = " << render_real(d.rate1()) << "\n";
            out << "rate2 = " << render_real(d.rate2()) << "\n";
            out << "p = " << render_real(d.mix_p()) << "\n";
            break;
    }
}

}  // namespace detail

/// Parses the plain-text key-value configuration grammar:
/// sections [arrival], [buffer] (optional), [group.0] ... [group.N];
/// '#' or ';' start a comment line. Unknown sections or keys are errors.
inline SystemConfig parse_config(const std::string& text) {
    using detail::Section;
    std::vector<Section> sections;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigParseError("line " + std::to_string(line_no) +
                                       ": malformed section header '" + t + "'");
            const std::string name = detail::trim(t.substr(1, t.size() - 2));
            for (const auto& s : sections)
                if (s.name == name)
                    throw ConfigParseError("duplicate section [" + name + "]");
            sections.push_back(Section{name, {}});
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError("line " + std::to_string(line_no) +
                                   ": expected 'key = value', got '" + t + "'");
        if (sections.empty())
            throw ConfigParseError("line " + std::to_string(line_no) +
                                   ": key outside any section");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigParseError("line " + std::to_string(line_no) +
                                   ": empty key or value");
        for (const auto& [k, v] : sections.back().entries)
            if (k == key)
                throw ConfigParseError("[" + sections.back().name + "] duplicate key '" +
                                       key + "'");
        sections.back().entries.emplace_back(key, value);
    }

    SystemConfig config;
    const Section* arrival = nullptr;
    const Section* buffer = nullptr;
    std::map<int, const Section*> groups;

    for (const auto& s : sections) {
        if (s.name == "arrival") {
            arrival = &s;
        } else if (s.name == "buffer") {
            buffer = &s;
        } else if (s.name.rfind("group.", 0) == 0) {
            const std::string idx = s.name.substr(6);
            char* end = nullptr;
            const long j = std::strtol(idx.c_str(), &end, 10);
            if (end == idx.c_str() || *end != '\0' || j < 0)
                throw ConfigParseError("malformed group section [" + s.name + "]");
            groups[static_cast<int>(j)] = &s;
        } else {
            throw ConfigParseError("unknown section [" + s.name + "]");
        }
    }

    if (!arrival) throw ConfigParseError("missing section [arrival]");
    {
        std::vector<std::string> allowed;
        config.arrival = detail::parse_distribution(*arrival, allowed);
        detail::reject_unknown_keys(*arrival, allowed);
    }

    if (buffer) {
        std::vector<std::string> allowed = {"theta", "residual"};
        detail::reject_unknown_keys(*buffer, allowed);
        if (buffer->find("theta")) {
            config.buffer = BufferPolicy::impatient(detail::parse_real(*buffer, "theta"));
        } else {
            config.buffer = BufferPolicy::loss();
        }
        if (const std::string* res = buffer->find("residual")) {
            if (*res == "restart") config.residual = ResidualPolicy::Restart;
            else if (*res == "resume") config.residual = ResidualPolicy::Resume;
            else
                throw ConfigParseError("[buffer] key 'residual': expected restart or resume, got '" +
                                       *res + "'");
        }
    } else {
        config.buffer = BufferPolicy::loss();
    }

    if (groups.empty() || groups.begin()->first != 0)
        throw ConfigParseError("missing section [group.0]");
    int expect = 0;
    for (const auto& [j, s] : groups) {
        if (j != expect)
            throw ConfigParseError("group sections must be contiguous: missing [group." +
                                   std::to_string(expect) + "]");
        ++expect;
        GroupSpec g;
        std::vector<std::string> allowed = {"m"};
        g.size = detail::parse_int(*s, "m");
        g.service = detail::parse_distribution(*s, allowed);
        if (j == 0) {
            allowed.push_back("p_work");
            g.power_work = detail::parse_real(*s, "p_work");
            g.power_sleep = 0.0;
            g.thresholds = ThresholdPair{0, 1};
        } else {
            allowed.insert(allowed.end(), {"L", "K", "p_work", "p_sleep"});
            g.thresholds.sleep_below = detail::parse_int(*s, "L");
            g.thresholds.wake_at = detail::parse_int(*s, "K");
            g.power_work = detail::parse_real(*s, "p_work");
            g.power_sleep = detail::parse_real(*s, "p_sleep");
        }
        detail::reject_unknown_keys(*s, allowed);
        config.groups.push_back(g);
    }

    return config;
}

inline SystemConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParseError("config not found: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

/// Canonical rendering; parse(render(c)) == c for every valid config.
inline std::string render_config(const SystemConfig& config) {
    std::ostringstream out;
    out << "[arrival]\n";
    detail::render_distribution(out, config.arrival);
    if (config.buffer.kind == BufferKind::InfiniteWithImpatience ||
        config.residual == ResidualPolicy::Resume) {
        out << "\n[buffer]\n";
        if (config.buffer.kind == BufferKind::InfiniteWithImpatience)
            out << "theta = " << detail::render_real(config.buffer.theta) << "\n";
        out << "residual = "
            << (config.residual == ResidualPolicy::Restart ? "restart" : "resume") << "\n";
    }
    for (std::size_t j = 0; j < config.groups.size(); ++j) {
        const auto& g = config.groups[j];
        out << "\n[group." << j << "]\n";
        out << "m = " << g.size << "\n";
        detail::render_distribution(out, g.service);
        if (j > 0) {
            out << "L = " << g.thresholds.sleep_below << "\n";
            out << "K = " << g.thresholds.wake_at << "\n";
        }
        out << "p_work = " << detail::render_real(g.power_work) << "\n";
        if (j > 0) out << "p_sleep = " << detail::render_real(g.power_sleep) << "\n";
    }
    return out.str();
}

}  // namespace gsq
