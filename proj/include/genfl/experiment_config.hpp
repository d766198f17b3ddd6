#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "genfl/costmodel.hpp"
#include "genfl/generator.hpp"
#include "genfl/model.hpp"

namespace genfl {

enum class Mode { GenFL, FLOnly, AigcOnly };

inline std::string_view mode_name(Mode m) {
    switch (m) {
        case Mode::GenFL: return "GenFL";
        case Mode::FLOnly: return "FL-only";
        case Mode::AigcOnly: return "AIGC-only";
    }
    return "GenFL";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
    if (s == "GenFL") return Mode::GenFL;
    if (s == "FL-only") return Mode::FLOnly;
    if (s == "AIGC-only") return Mode::AigcOnly;
    return std::nullopt;
}

struct ConfigValidationError : std::runtime_error {
    std::vector<std::string> keys;
    explicit ConfigValidationError(const std::string& msg, std::vector<std::string> bad_keys)
        : std::runtime_error(msg), keys(std::move(bad_keys)) {}
};

// All protocol, data, generator and cost-model knobs for one run. Field
// names match the flat key=value config file keys one to one.
struct ExperimentConfig {
    std::uint64_t seed = 42;

    std::size_t num_classes = 10;
    std::size_t feature_dim = 16;
    std::size_t samples_per_class = 200;
    double cluster_spread = 1.0;

    std::size_t num_clients = 20;
    std::size_t clients_per_round = 5;
    std::size_t rounds = 50;
    double alpha = 0.1;

    Mode mode = Mode::GenFL;
    double kappa1 = 0.7;
    double kappa2 = 0.3;

    std::size_t hidden_width = 64;
    TrainSpec train_spec{5, 32, 0.05};

    GeneratorConfig generator{};
    CostConfig cost{};

    bool parallel_clients = false;
    std::string output_dir = "genfl_out";

    // 20% of each class is held out for testing, never partitioned to clients.
    std::size_t test_samples_per_class() const { return samples_per_class / 5; }
    std::size_t train_samples_per_class() const {
        return samples_per_class - test_samples_per_class();
    }

    std::vector<LayerShape> layer_shapes() const {
        return {{feature_dim, hidden_width}, {hidden_width, num_classes}};
    }

    ClassGeometry geometry() const { return {num_classes, feature_dim, cluster_spread}; }

    // Every violation is reported as "key: message".
    std::vector<std::string> validation_errors() const {
        std::vector<std::string> errs;
        auto bad = [&errs](const char* key, const std::string& msg) {
            errs.push_back(std::string(key) + ": " + msg);
        };

        if (num_classes < 2) bad("num_classes", "must be >= 2");
        if (feature_dim == 0) bad("feature_dim", "must be >= 1");
        if (samples_per_class < 5) bad("samples_per_class", "must be >= 5 (20% test split)");
        if (!(cluster_spread > 0.0)) bad("cluster_spread", "must be > 0");
        if (num_clients == 0) bad("num_clients", "must be >= 1");
        if (clients_per_round == 0) bad("clients_per_round", "must be >= 1");
        if (clients_per_round > num_clients) bad("clients_per_round", "must be <= num_clients");
        if (num_clients > train_samples_per_class() * num_classes)
            bad("num_clients", "exceeds the number of training samples");
        if (!(alpha > 0.0)) bad("alpha", "must be > 0");

        if (kappa1 < 0.0) bad("kappa1", "must be >= 0");
        if (kappa2 < 0.0) bad("kappa2", "must be >= 0");
        if (std::abs(kappa1 + kappa2 - 1.0) > 1e-9)
            bad("kappa2", "kappa1 + kappa2 must equal 1");
        if (mode == Mode::FLOnly && kappa2 != 0.0)
            bad("kappa2", "must be 0 in FL-only mode");
        if (mode == Mode::AigcOnly && kappa1 != 0.0)
            bad("kappa1", "must be 0 in AIGC-only mode");

        if (hidden_width == 0) bad("hidden_width", "must be >= 1");
        if (train_spec.epochs == 0) bad("epochs", "must be >= 1");
        if (train_spec.batch_size == 0) bad("batch_size", "must be >= 1");
        if (!(train_spec.learning_rate > 0.0)) bad("learning_rate", "must be > 0");

        if (generator.rate_per_round == 0) bad("rate_per_round", "must be >= 1");
        if (generator.cap_per_class == 0) bad("cap_per_class", "must be >= 1");
        if (generator.label_noise < 0.0 || generator.label_noise > 1.0)
            bad("label_noise", "must be in [0,1]");
        if (generator.center_shift < 0.0) bad("center_shift", "must be >= 0");
        if (!(generator.spread_factor > 0.0)) bad("spread_factor", "must be > 0");

        if (!(cost.client_flops_per_sec > 0.0)) bad("client_flops_per_sec", "must be > 0");
        if (!(cost.server_flops_per_sec > 0.0)) bad("server_flops_per_sec", "must be > 0");
        if (!(cost.uplink_bps > 0.0)) bad("uplink_bps", "must be > 0");
        if (!(cost.downlink_bps > 0.0)) bad("downlink_bps", "must be > 0");
        if (!(cost.client_power_watts > 0.0)) bad("client_power_watts", "must be > 0");
        if (!(cost.server_power_watts > 0.0)) bad("server_power_watts", "must be > 0");
        if (!(cost.gen_cost_per_sample > 0.0)) bad("gen_cost_per_sample", "must be > 0");
        if (cost.bytes_per_param == 0) bad("bytes_per_param", "must be >= 1");

        if (output_dir.empty()) bad("output_dir", "must not be empty");
        return errs;
    }

    void validate() const {
        auto errs = validation_errors();
        if (errs.empty()) return;
        std::string msg = "invalid configuration: ";
        std::vector<std::string> keys;
        for (std::size_t i = 0; i < errs.size(); ++i) {
            if (i) msg += "; ";
            msg += errs[i];
            keys.push_back(errs[i].substr(0, errs[i].find(':')));
        }
        throw ConfigValidationError(msg, std::move(keys));
    }
};

}  // namespace genfl
