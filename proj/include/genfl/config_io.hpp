#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "genfl/errors.hpp"
#include "genfl/experiment_config.hpp"

namespace genfl {

struct ConfigParseError : std::runtime_error {
    int line;
    ConfigParseError(int line_no, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("expected a real number, got '" + s + "'");
    return v;
}

inline std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
    return v;
}

inline std::size_t parse_size(const std::string& s) {
    return static_cast<std::size_t>(parse_u64(s));
}

inline bool parse_bool(const std::string& s) {
    if (s == "0" || s == "false") return false;
    if (s == "1" || s == "true") return true;
    throw std::invalid_argument("expected 0 or 1, got '" + s + "'");
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace detail

// One entry per config-file key; drives parsing, echoing and sweeps.
struct ConfigKey {
    std::string_view name;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

inline const std::vector<ConfigKey>& config_keys() {
    using detail::format_double;
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_size;
    using detail::parse_u64;
    static const std::vector<ConfigKey> keys = {
        {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = parse_u64(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
        {"num_classes", [](ExperimentConfig& c, const std::string& v) { c.num_classes = parse_size(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.num_classes); }},
        {"feature_dim", [](ExperimentConfig& c, const std::string& v) { c.feature_dim = parse_size(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.feature_dim); }},
        {"samples_per_class",
         [](ExperimentConfig& c, const std::string& v) { c.samples_per_class = parse_size(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.samples_per_class); }},
        {"cluster_spread",
         [](ExperimentConfig& c, const std::string& v) { c.cluster_spread = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.cluster_spread); }},
        {"num_clients", [](ExperimentConfig& c, const std::string& v) { c.num_clients = parse_size(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.num_clients); }},
        {"clients_per_round",
         [](ExperimentConfig& c, const std::string& v) { c.clients_per_round = parse_size(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.clients_per_round); }},
        {"rounds", [](ExperimentConfig& c, const std::string& v) { c.rounds = parse_size(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.rounds); }},
        {"alpha", [](ExperimentConfig& c, const std::string& v) { c.alpha = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.alpha); }},
        {"mode",
         [](ExperimentConfig& c, const std::string& v) {
             const auto m = parse_mode(v);
             if (!m) throw std::invalid_argument("expected GenFL, FL-only or AIGC-only, got '" + v + "'");
             c.mode = *m;
         },
         [](const ExperimentConfig& c) { return std::string(mode_name(c.mode)); }},
        {"kappa1", [](ExperimentConfig& c, const std::string& v) { c.kappa1 = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.kappa1); }},
        {"kappa2", [](ExperimentConfig& c, const std::string& v) { c.kappa2 = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.kappa2); }},
        {"hidden_width", [](ExperimentConfig& c, const std::string& v) { c.hidden_width = parse_size(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.hidden_width); }},
        {"epochs", [](ExperimentConfig& c, const std::string& v) { c.train_spec.epochs = parse_size(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.train_spec.epochs); }},
        {"batch_size",
         [](ExperimentConfig& c, const std::string& v) { c.train_spec.batch_size = parse_size(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.train_spec.batch_size); }},
        {"learning_rate",
         [](ExperimentConfig& c, const std::string& v) { c.train_spec.learning_rate = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.train_spec.learning_rate); }},
        {"rate_per_round",
         [](ExperimentConfig& c, const std::string& v) { c.generator.rate_per_round = parse_size(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.generator.rate_per_round); }},
        {"cap_per_class",
         [](ExperimentConfig& c, const std::string& v) { c.generator.cap_per_class = parse_size(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.generator.cap_per_class); }},
        {"label_noise",
         [](ExperimentConfig& c, const std::string& v) { c.generator.label_noise = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.generator.label_noise); }},
        {"center_shift",
         [](ExperimentConfig& c, const std::string& v) { c.generator.center_shift = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.generator.center_shift); }},
        {"spread_factor",
         [](ExperimentConfig& c, const std::string& v) { c.generator.spread_factor = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.generator.spread_factor); }},
        {"client_flops_per_sec",
         [](ExperimentConfig& c, const std::string& v) { c.cost.client_flops_per_sec = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.cost.client_flops_per_sec); }},
        {"server_flops_per_sec",
         [](ExperimentConfig& c, const std::string& v) { c.cost.server_flops_per_sec = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.cost.server_flops_per_sec); }},
        {"uplink_bps",
         [](ExperimentConfig& c, const std::string& v) { c.cost.uplink_bps = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.cost.uplink_bps); }},
        {"downlink_bps",
         [](ExperimentConfig& c, const std::string& v) { c.cost.downlink_bps = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.cost.downlink_bps); }},
        {"client_power_watts",
         [](ExperimentConfig& c, const std::string& v) { c.cost.client_power_watts = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.cost.client_power_watts); }},
        {"server_power_watts",
         [](ExperimentConfig& c, const std::string& v) { c.cost.server_power_watts = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.cost.server_power_watts); }},
        {"gen_cost_per_sample",
         [](ExperimentConfig& c, const std::string& v) { c.cost.gen_cost_per_sample = parse_double(v); },
         [](const ExperimentConfig& c) { return format_double(c.cost.gen_cost_per_sample); }},
        {"bytes_per_param",
         [](ExperimentConfig& c, const std::string& v) { c.cost.bytes_per_param = parse_u64(v); },
         [](const ExperimentConfig& c) { return std::to_string(c.cost.bytes_per_param); }},
        {"parallel_clients",
         [](ExperimentConfig& c, const std::string& v) { c.parallel_clients = parse_bool(v); },
         [](const ExperimentConfig& c) { return std::string(c.parallel_clients ? "1" : "0"); }},
        {"output_dir", [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
         [](const ExperimentConfig& c) { return c.output_dir; }},
    };
    return keys;
}

inline const ConfigKey* find_config_key(std::string_view name) {
    for (const auto& k : config_keys())
        if (k.name == name) return &k;
    return nullptr;
}

namespace detail {

// Kappa resolution: unset kappas default by mode, and setting exactly one of
// them pins the other to 1 - value so the pair stays convex.
inline void resolve_kappas(ExperimentConfig& cfg, bool k1_set, bool k2_set) {
    if (k1_set && k2_set) return;
    if (k1_set) {
        cfg.kappa2 = 1.0 - cfg.kappa1;
    } else if (k2_set) {
        cfg.kappa1 = 1.0 - cfg.kappa2;
    } else {
        switch (cfg.mode) {
            case Mode::GenFL: cfg.kappa1 = 0.7; cfg.kappa2 = 0.3; break;
            case Mode::FLOnly: cfg.kappa1 = 1.0; cfg.kappa2 = 0.0; break;
            case Mode::AigcOnly: cfg.kappa1 = 0.0; cfg.kappa2 = 1.0; break;
        }
    }
}

}  // namespace detail

// Parses the flat key=value format. Blank lines and lines starting with '#'
// are skipped; unknown keys are parse errors; missing keys take defaults.
// The returned config is validated.
inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    bool k1_set = false, k2_set = false;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigParseError(line_no, "expected key=value");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        const ConfigKey* entry = find_config_key(key);
        if (!entry)
            throw ConfigParseError(line_no, "unknown key '" + key + "'");
        try {
            entry->set(cfg, value);
        } catch (const std::invalid_argument& e) {
            throw ConfigParseError(line_no, key + ": " + e.what());
        }
        if (key == "kappa1") k1_set = true;
        if (key == "kappa2") k2_set = true;
    }

    detail::resolve_kappas(cfg, k1_set, k2_set);
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// Canonical echo: every key in registry order, defaults included. The echo
// is itself a loadable config and reproduces the run byte-identically.
inline std::string echo_config(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& k : config_keys()) {
        out += k.name;
        out += '=';
        out += k.get(cfg);
        out += '\n';
    }
    return out;
}

// FNV-1a over the canonical echo, as a 16-digit hex run identifier.
inline std::string config_hash(const ExperimentConfig& cfg) {
    const std::string echo = echo_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : echo) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    static const char* hex = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = hex[h & 0xf];
        h >>= 4;
    }
    return s;
}

}  // namespace genfl
