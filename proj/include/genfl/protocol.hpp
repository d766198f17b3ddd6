#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "genfl/costmodel.hpp"
#include "genfl/dataset.hpp"
#include "genfl/experiment_config.hpp"
#include "genfl/generator.hpp"
#include "genfl/model.hpp"
#include "genfl/rng.hpp"

namespace genfl {

// Purpose tags for derived RNG streams. Every consumer of randomness in a
// round draws from its own stream, so skipping a path (FL-only, AIGC-only)
// or training clients concurrently never shifts anyone else's draws.
namespace stream_tag {
inline constexpr std::uint64_t dataset = 0xD1;
inline constexpr std::uint64_t partition = 0xD2;
inline constexpr std::uint64_t init = 0xD3;
inline constexpr std::uint64_t sample = 0xD4;
inline constexpr std::uint64_t client = 0xD5;
inline constexpr std::uint64_t generator = 0xD6;
inline constexpr std::uint64_t augmented = 0xD7;
}  // namespace stream_tag

struct ClientState {
    std::size_t id = 0;
    LabeledDataset local_data;
    LabelHistogram shared_histogram;  // fixed at construction; local data is static
    std::uint64_t rng_seed_base = 0;
};

struct ServerState {
    ModelParams global_model;
    GenPool gen_pool;
    std::size_t round_index = 0;
    std::vector<LabelHistogram> client_histograms;
};

// Weighted combination policy. kappa1 and kappa2 are proportions and must
// sum to 1; the baseline modes pin one of them to zero.
struct AggregationPolicy {
    double kappa1 = 0.7;
    double kappa2 = 0.3;
    Mode mode = Mode::GenFL;

    void validate() const {
        if (kappa1 < 0.0 || kappa2 < 0.0)
            throw std::invalid_argument("AggregationPolicy: kappa values must be >= 0");
        if (std::abs(kappa1 + kappa2 - 1.0) > 1e-9)
            throw std::invalid_argument("AggregationPolicy: kappa1 + kappa2 must equal 1");
        if (mode == Mode::FLOnly && kappa2 != 0.0)
            throw std::invalid_argument("AggregationPolicy: FL-only requires kappa2 = 0");
        if (mode == Mode::AigcOnly && kappa1 != 0.0)
            throw std::invalid_argument("AggregationPolicy: AIGC-only requires kappa1 = 0");
    }
};

// Only label histograms cross the client boundary here; no sample features
// leave the client.
inline std::vector<LabelHistogram> share_labels(std::span<const ClientState> clients) {
    std::vector<LabelHistogram> out(clients.size());
    for (const auto& c : clients) {
        if (c.id >= clients.size())
            throw std::invalid_argument("share_labels: client id out of range");
        out[c.id] = c.shared_histogram;
    }
    return out;
}

// Uniform sample without replacement, returned in ascending id order.
// Successive rounds use independent derived streams.
inline std::vector<std::size_t> sample_clients(std::size_t num_clients,
                                               std::size_t clients_per_round,
                                               std::size_t round_index,
                                               std::uint64_t seed) {
    if (clients_per_round > num_clients)
        throw std::invalid_argument("sample_clients: clients_per_round > num_clients");
    RngStream rng(derive_seed(seed, stream_tag::sample, round_index));
    std::vector<std::size_t> ids(num_clients);
    std::iota(ids.begin(), ids.end(), 0);
    for (std::size_t i = 0; i < clients_per_round; ++i) {
        const std::size_t j = i + rng.uniform_index(num_clients - i);
        std::swap(ids[i], ids[j]);
    }
    ids.resize(clients_per_round);
    std::sort(ids.begin(), ids.end());
    return ids;
}

// rho_n = |D_n| / sum |D_m| over the selected cohort.
inline std::vector<double> compute_rho(std::span<const std::size_t> cohort_sizes) {
    if (cohort_sizes.empty())
        throw std::invalid_argument("compute_rho: empty cohort");
    double total = 0.0;
    for (std::size_t n : cohort_sizes) {
        if (n == 0) throw std::invalid_argument("compute_rho: empty local dataset");
        total += static_cast<double>(n);
    }
    std::vector<double> rho(cohort_sizes.size());
    for (std::size_t i = 0; i < cohort_sizes.size(); ++i)
        rho[i] = static_cast<double>(cohort_sizes[i]) / total;
    return rho;
}

// Trains the augmented model from the current global model on the generated
// pool. An empty pool signals "no augmented model".
inline std::optional<ModelParams> train_augmented(const ModelParams& global_model,
                                                  const GenPool& pool,
                                                  const TrainSpec& spec,
                                                  RngStream& rng) {
    if (pool.size() == 0) return std::nullopt;
    return train(global_model, pool.dataset, spec, rng);
}

// The round-(t+1) weighted policy:
//   omega = kappa1 * sum_n rho_n * omega_n + kappa2 * omega_a.
// With kappa2 = 0 the augmented term is skipped entirely, so the result is
// bit-identical to plain FedAvg; with kappa1 = 0 the local term is skipped
// and empty cohorts are permitted.
inline ModelParams aggregate(std::span<const ModelParams> locals,
                             std::span<const double> rho,
                             const std::optional<ModelParams>& omega_a,
                             const AggregationPolicy& policy) {
    policy.validate();
    const bool fl_term = policy.kappa1 > 0.0;
    const bool aug_term = policy.kappa2 > 0.0;

    if (fl_term) {
        if (locals.empty())
            throw std::invalid_argument("aggregate: kappa1 > 0 requires local models");
        if (locals.size() != rho.size())
            throw std::invalid_argument("aggregate: locals and rho length mismatch");
        const double sum = std::accumulate(rho.begin(), rho.end(), 0.0);
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("aggregate: rho must sum to 1");
    }
    if (aug_term && !omega_a.has_value())
        throw std::invalid_argument("aggregate: kappa2 > 0 requires an augmented model");

    const ModelParams& ref = fl_term ? locals.front() : *omega_a;
    for (const auto& l : locals) {
        if (l.layer_shapes != ref.layer_shapes)
            throw std::invalid_argument("aggregate: model shape mismatch");
    }
    if (omega_a && omega_a->layer_shapes != ref.layer_shapes)
        throw std::invalid_argument("aggregate: augmented model shape mismatch");

    ModelParams out;
    out.layer_shapes = ref.layer_shapes;
    out.values.assign(ref.values.size(), 0.0);
    if (fl_term) {
        for (std::size_t n = 0; n < locals.size(); ++n) {
            const double w = policy.kappa1 * rho[n];
            const auto& v = locals[n].values;
            for (std::size_t i = 0; i < v.size(); ++i) out.values[i] += w * v[i];
        }
    }
    if (aug_term) {
        const auto& v = omega_a->values;
        for (std::size_t i = 0; i < v.size(); ++i) out.values[i] += policy.kappa2 * v[i];
    }
    check_finite(out.values, "aggregate");
    return out;
}

// Everything run_round needs besides the evolving server state. Owns the
// held-out test set and the population histogram by value.
struct SimulationContext {
    std::uint64_t seed = 0;
    std::size_t clients_per_round = 0;
    TrainSpec train_spec;
    GeneratorConfig gen_config;
    AggregationPolicy policy;
    CostConfig cost;
    ClassGeometry geometry;
    Standardizer standardizer;  // fitted on the training split
    LabeledDataset test_set;
    LabelHistogram population_histogram;
    bool parallel_clients = false;
};

struct RoundResult {
    ServerState server;
    RoundMetrics metrics;
};

namespace detail {

inline std::vector<ModelParams> train_cohort(const ModelParams& global_model,
                                             std::span<const ClientState> clients,
                                             std::span<const std::size_t> selected,
                                             std::size_t round,
                                             const SimulationContext& ctx) {
    std::vector<ModelParams> locals(selected.size());
    auto train_one = [&](std::size_t i) {
        const ClientState& cs = clients[selected[i]];
        RngStream rng(derive_seed(cs.rng_seed_base, stream_tag::client, round, cs.id));
        locals[i] = train(global_model, cs.local_data, ctx.train_spec, rng);
    };
    if (ctx.parallel_clients) {
        std::vector<std::future<void>> tasks;
        tasks.reserve(selected.size());
        for (std::size_t i = 0; i < selected.size(); ++i)
            tasks.push_back(std::async(std::launch::async, train_one, i));
        for (auto& t : tasks) t.get();  // collected in client-id order regardless
    } else {
        for (std::size_t i = 0; i < selected.size(); ++i) train_one(i);
    }
    return locals;
}

}  // namespace detail

// One GenFL round: sample the cohort; select, generate and accrue into the
// pool (when the augmented path is active, kappa2 > 0); train the selected
// clients from the broadcast global model (when the FL path is active,
// kappa1 > 0); train the augmented model; aggregate; evaluate.
//
// A failed round throws and leaves the caller's prior ServerState untouched.
inline RoundResult run_round(const ServerState& server,
                             std::span<const ClientState> clients,
                             const SimulationContext& ctx) {
    ctx.policy.validate();
    const std::size_t round = server.round_index + 1;
    const bool fl_path = ctx.policy.kappa1 > 0.0;
    const bool aigc_path = ctx.policy.kappa2 > 0.0;

    const std::vector<std::size_t> selected =
        sample_clients(clients.size(), ctx.clients_per_round, round, ctx.seed);

    GenPool pool = server.gen_pool;
    std::size_t gen_count = 0;
    if (aigc_path) {
        const auto labels = select_labels(server.client_histograms, pool, ctx.gen_config);
        if (!labels.empty()) {
            RngStream rng(derive_seed(ctx.seed, stream_tag::generator, round));
            LabeledDataset fresh = generate(labels, ctx.gen_config, ctx.geometry, rng);
            ctx.standardizer.apply_in_place(fresh);  // same units as client data
            pool = accrue(pool, fresh, ctx.gen_config.cap_per_class);
            gen_count = labels.size();
        }
    }

    std::vector<ModelParams> locals;
    std::vector<double> rho;
    std::vector<std::size_t> cohort_sizes;
    if (fl_path) {
        locals = detail::train_cohort(server.global_model, clients, selected, round, ctx);
        for (std::size_t id : selected) cohort_sizes.push_back(clients[id].local_data.size());
        rho = compute_rho(cohort_sizes);
    }

    std::optional<ModelParams> omega_a;
    if (aigc_path) {
        RngStream rng(derive_seed(ctx.seed, stream_tag::augmented, round));
        omega_a = train_augmented(server.global_model, pool, ctx.train_spec, rng);
    }

    ModelParams new_model;
    std::size_t augmented_samples = 0;
    if (aigc_path && !omega_a.has_value()) {
        // Empty-pool fallback: redistribute kappa2 to kappa1 for this round,
        // or keep the model unchanged when there is no FL path either.
        if (fl_path) {
            AggregationPolicy fallback{1.0, 0.0, ctx.policy.mode};
            new_model = aggregate(locals, rho, std::nullopt, fallback);
        } else {
            new_model = server.global_model;
        }
    } else {
        augmented_samples = omega_a ? pool.size() : 0;
        new_model = aggregate(locals, rho, omega_a, ctx.policy);
    }

    const EvalResult eval = evaluate(new_model, ctx.test_set);

    double emd_sum = 0.0;
    for (std::size_t id : selected)
        emd_sum += emd_heterogeneity(clients[id].shared_histogram, ctx.population_histogram);
    const double mean_emd = emd_sum / static_cast<double>(selected.size());

    const RoundCost rc = round_cost(cohort_sizes, new_model.values.size(), gen_count,
                                    augmented_samples, ctx.train_spec, ctx.cost);

    RoundResult out;
    out.metrics = RoundMetrics{round,
                               eval.accuracy,
                               eval.mean_loss,
                               mean_emd,
                               rc.time_sec,
                               rc.energy_joules,
                               pool.size(),
                               std::string(mode_name(ctx.policy.mode))};
    out.server = ServerState{std::move(new_model), std::move(pool), round,
                             server.client_histograms};
    return out;
}

// A fully built simulation: clients with partitioned data, the initialized
// server, and the immutable round context.
struct Experiment {
    std::vector<ClientState> clients;
    ServerState server;
    SimulationContext ctx;
};

inline Experiment build_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    const LabeledDataset full = make_synthetic_dataset(
        cfg.num_classes, cfg.feature_dim, cfg.samples_per_class, cfg.cluster_spread,
        derive_seed(cfg.seed, stream_tag::dataset));

    // Stratified 80/20 split: the tail of each class block is held out.
    std::vector<std::size_t> train_idx, test_idx;
    const std::size_t test_per_class = cfg.test_samples_per_class();
    for (std::size_t c = 0; c < cfg.num_classes; ++c) {
        const std::size_t base = c * cfg.samples_per_class;
        for (std::size_t s = 0; s < cfg.samples_per_class; ++s) {
            if (s < cfg.samples_per_class - test_per_class)
                train_idx.push_back(base + s);
            else
                test_idx.push_back(base + s);
        }
    }
    LabeledDataset train_set = subset(full, train_idx);
    const Standardizer stdz = Standardizer::fit(train_set);
    stdz.apply_in_place(train_set);

    const PartitionPlan plan = dirichlet_partition(
        train_set, cfg.num_clients, cfg.alpha, derive_seed(cfg.seed, stream_tag::partition));

    Experiment exp;
    exp.clients.reserve(cfg.num_clients);
    for (std::size_t k = 0; k < cfg.num_clients; ++k) {
        ClientState cs;
        cs.id = k;
        cs.local_data = subset(train_set, plan.assignments[k]);
        cs.shared_histogram = label_histogram(cs.local_data);
        cs.rng_seed_base = cfg.seed;
        exp.clients.push_back(std::move(cs));
    }

    exp.server.global_model =
        init_model(cfg.layer_shapes(), derive_seed(cfg.seed, stream_tag::init));
    exp.server.gen_pool = GenPool::empty(cfg.num_classes, cfg.feature_dim);
    exp.server.round_index = 0;
    exp.server.client_histograms = share_labels(exp.clients);

    exp.ctx.seed = cfg.seed;
    exp.ctx.clients_per_round = cfg.clients_per_round;
    exp.ctx.train_spec = cfg.train_spec;
    exp.ctx.gen_config = cfg.generator;
    exp.ctx.policy = AggregationPolicy{cfg.kappa1, cfg.kappa2, cfg.mode};
    exp.ctx.cost = cfg.cost;
    exp.ctx.geometry = cfg.geometry();
    exp.ctx.standardizer = stdz;
    exp.ctx.test_set = stdz.apply(subset(full, test_idx));
    exp.ctx.population_histogram = label_histogram(train_set);
    exp.ctx.parallel_clients = cfg.parallel_clients;
    return exp;
}

// Runs cfg.rounds rounds and returns the full metric trace. Row 0 records
// the initial model before any training, so convergence curves share a
// common starting point; the trace has rounds + 1 records.
inline std::vector<RoundMetrics> run_experiment(const ExperimentConfig& cfg) {
    Experiment exp = build_experiment(cfg);

    std::vector<RoundMetrics> trace;
    trace.reserve(cfg.rounds + 1);

    const EvalResult initial = evaluate(exp.server.global_model, exp.ctx.test_set);
    double emd_sum = 0.0;
    for (const auto& c : exp.clients)
        emd_sum += emd_heterogeneity(c.shared_histogram, exp.ctx.population_histogram);
    trace.push_back(RoundMetrics{0, initial.accuracy, initial.mean_loss,
                                 emd_sum / static_cast<double>(exp.clients.size()), 0.0, 0.0,
                                 0, std::string(mode_name(cfg.mode))});

    for (std::size_t r = 0; r < cfg.rounds; ++r) {
        RoundResult res = run_round(exp.server, exp.clients, exp.ctx);
        exp.server = std::move(res.server);
        trace.push_back(std::move(res.metrics));
    }
    return trace;
}

}  // namespace genfl
