#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "genfl/model.hpp"

namespace genfl {

// Simulated platform parameters. All rates and powers are strictly positive;
// the defaults used by the harness are arbitrary and documented as such.
struct CostConfig {
    double client_flops_per_sec = 1e8;
    double server_flops_per_sec = 1e9;
    double uplink_bps = 1e7;
    double downlink_bps = 5e7;
    double client_power_watts = 2.0;
    double server_power_watts = 50.0;
    double gen_cost_per_sample = 1e7;  // server compute units per generated sample
    std::uint64_t bytes_per_param = 8;

    void validate() const {
        const bool ok = client_flops_per_sec > 0 && server_flops_per_sec > 0 &&
                        uplink_bps > 0 && downlink_bps > 0 && client_power_watts > 0 &&
                        server_power_watts > 0 && gen_cost_per_sample > 0 &&
                        bytes_per_param > 0;
        if (!ok) throw std::invalid_argument("CostConfig: all fields must be strictly positive");
    }
};

struct RoundMetrics {
    std::size_t round = 0;
    double test_accuracy = 0.0;
    double test_loss = 0.0;
    double mean_client_emd = 0.0;
    double round_time_sec = 0.0;
    double round_energy_joules = 0.0;
    std::size_t pool_size = 0;
    std::string mode;
};

struct RoundCost {
    double time_sec = 0.0;
    double energy_joules = 0.0;
};

// Synchronous-round cost: each selected client downloads the model, trains,
// and uploads; the client path is the slowest client. The server path
// (generation plus augmented training) overlaps client training, so round
// time is max(client path, server path). Training compute is counted as
// 2 * param_count flops per trained sample per epoch.
inline RoundCost round_cost(std::span<const std::size_t> selected_sizes,
                            std::size_t model_param_count,
                            std::size_t gen_samples_this_round,
                            std::size_t augmented_samples,
                            const TrainSpec& spec,
                            const CostConfig& cost) {
    cost.validate();
    const double transfer_bits =
        static_cast<double>(model_param_count) * static_cast<double>(cost.bytes_per_param) * 8.0;
    const double down = transfer_bits / cost.downlink_bps;
    const double up = transfer_bits / cost.uplink_bps;

    double client_path = 0.0;
    double client_energy = 0.0;
    for (std::size_t n : selected_sizes) {
        const double compute = 2.0 * static_cast<double>(model_param_count) *
                               static_cast<double>(n) * static_cast<double>(spec.epochs) /
                               cost.client_flops_per_sec;
        const double t = down + compute + up;
        client_path = std::max(client_path, t);
        client_energy += cost.client_power_watts * t;
    }

    const double gen_time = static_cast<double>(gen_samples_this_round) *
                            cost.gen_cost_per_sample / cost.server_flops_per_sec;
    const double aug_time = 2.0 * static_cast<double>(model_param_count) *
                            static_cast<double>(augmented_samples) *
                            static_cast<double>(spec.epochs) / cost.server_flops_per_sec;
    const double server_path = gen_time + aug_time;

    RoundCost rc;
    rc.time_sec = std::max(client_path, server_path);
    rc.energy_joules = client_energy + cost.server_power_watts * server_path;
    return rc;
}

}  // namespace genfl
