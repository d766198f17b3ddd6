#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "genfl/dataset.hpp"
#include "genfl/rng.hpp"

namespace genfl {

// Stand-in for a server-side generative model. The quality gap from real
// data is controlled by three knobs: label_noise (probability a sample
// carries a wrong label), center_shift (displacement of the generator's
// per-class center from the true one, in feature units) and spread_factor
// (cluster spread multiplier).
struct GeneratorConfig {
    std::size_t rate_per_round = 10;
    std::size_t cap_per_class = 300;
    double label_noise = 0.0;
    double center_shift = 0.0;
    double spread_factor = 1.0;

    void validate() const {
        if (rate_per_round == 0)
            throw std::invalid_argument("GeneratorConfig: rate_per_round must be >= 1");
        if (cap_per_class == 0)
            throw std::invalid_argument("GeneratorConfig: cap_per_class must be >= 1");
        if (label_noise < 0.0 || label_noise > 1.0)
            throw std::invalid_argument("GeneratorConfig: label_noise must be in [0,1]");
        if (center_shift < 0.0)
            throw std::invalid_argument("GeneratorConfig: center_shift must be >= 0");
        if (!(spread_factor > 0.0))
            throw std::invalid_argument("GeneratorConfig: spread_factor must be > 0");
    }
};

// Accumulated generated samples, capped per class.
struct GenPool {
    LabeledDataset dataset;
    LabelHistogram per_class_counts;

    static GenPool empty(std::size_t num_classes, std::size_t feature_dim) {
        GenPool p;
        p.dataset.feature_dim = feature_dim;
        p.dataset.num_classes = num_classes;
        p.per_class_counts.counts.assign(num_classes, 0);
        return p;
    }

    std::size_t size() const { return dataset.size(); }
};

// Deficit-proportional label selection: repeatedly picks the class with the
// lowest aggregate client count + pool count (counting picks already made
// this round), ties broken by the lower class index. Classes at cap are
// skipped; the result is shorter than rate_per_round only if every class is
// at cap.
inline std::vector<std::uint32_t> select_labels(
    std::span<const LabelHistogram> client_histograms,
    const GenPool& pool,
    const GeneratorConfig& config) {
    if (client_histograms.empty())
        throw std::invalid_argument("select_labels: at least one histogram required");
    const std::size_t num_classes = pool.per_class_counts.counts.size();

    std::vector<std::uint64_t> aggregate(num_classes, 0);
    for (const auto& h : client_histograms) {
        if (h.counts.size() != num_classes)
            throw std::invalid_argument("select_labels: histogram class count mismatch");
        for (std::size_t c = 0; c < num_classes; ++c) aggregate[c] += h.counts[c];
    }

    std::vector<std::uint64_t> selected(num_classes, 0);
    std::vector<std::uint32_t> labels;
    labels.reserve(config.rate_per_round);
    for (std::size_t pick = 0; pick < config.rate_per_round; ++pick) {
        bool found = false;
        std::size_t best = 0;
        std::uint64_t best_score = 0;
        for (std::size_t c = 0; c < num_classes; ++c) {
            if (pool.per_class_counts.counts[c] + selected[c] >= config.cap_per_class) continue;
            const std::uint64_t score = aggregate[c] + pool.per_class_counts.counts[c] + selected[c];
            if (!found || score < best_score) {
                found = true;
                best = c;
                best_score = score;
            }
        }
        if (!found) break;  // every class at cap
        ++selected[best];
        labels.push_back(static_cast<std::uint32_t>(best));
    }
    return labels;
}

namespace detail {

// Deterministic per-class offset of norm center_shift: along the center
// line, direction alternating with class parity.
inline std::vector<double> generator_offset(const ClassGeometry& geom,
                                            std::size_t cls,
                                            double center_shift) {
    const double unit = 1.0 / std::sqrt(static_cast<double>(geom.feature_dim));
    const double sign = (cls % 2 == 0) ? 1.0 : -1.0;
    return std::vector<double>(geom.feature_dim, sign * center_shift * unit);
}

}  // namespace detail

// Emits one sample per requested label from a Gaussian at the shifted class
// center. With probability label_noise the emitted label is replaced by a
// uniformly random other class.
inline LabeledDataset generate(std::span<const std::uint32_t> labels,
                               const GeneratorConfig& config,
                               const ClassGeometry& geometry,
                               RngStream& rng) {
    if (labels.empty())
        throw std::invalid_argument("generate: labels must be non-empty");
    config.validate();

    LabeledDataset out;
    out.feature_dim = geometry.feature_dim;
    out.num_classes = geometry.num_classes;
    out.features.reserve(labels.size() * geometry.feature_dim);

    const double sigma = geometry.cluster_spread * config.spread_factor;
    std::vector<double> x(geometry.feature_dim);
    for (std::uint32_t c : labels) {
        if (c >= geometry.num_classes)
            throw std::invalid_argument("generate: label out of range");
        const std::vector<double> mu = geometry.center(c);
        const std::vector<double> shift = detail::generator_offset(geometry, c, config.center_shift);
        for (std::size_t j = 0; j < geometry.feature_dim; ++j)
            x[j] = mu[j] + shift[j] + sigma * rng.normal();

        std::uint32_t emitted = c;
        if (config.label_noise > 0.0 && rng.uniform() < config.label_noise &&
            geometry.num_classes > 1) {
            auto k = static_cast<std::uint32_t>(rng.uniform_index(geometry.num_classes - 1));
            emitted = k >= c ? k + 1 : k;
        }
        out.append(x, emitted, Provenance::generated);
    }
    return out;
}

// Appends fresh samples per class until that class reaches the cap; excess
// is discarded, earliest-generated samples are retained.
inline GenPool accrue(const GenPool& pool,
                      const LabeledDataset& fresh,
                      std::size_t cap_per_class) {
    if (fresh.feature_dim != pool.dataset.feature_dim ||
        fresh.num_classes != pool.dataset.num_classes)
        throw std::invalid_argument("accrue: shape mismatch between pool and fresh data");
    for (Provenance p : fresh.provenance) {
        if (p != Provenance::generated)
            throw std::invalid_argument("accrue: fresh samples must all be generated");
    }

    GenPool out = pool;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        const std::uint32_t c = fresh.labels[i];
        if (out.per_class_counts.counts[c] >= cap_per_class) continue;
        out.dataset.append(fresh.feature(i), c, Provenance::generated);
        ++out.per_class_counts.counts[c];
    }
    return out;
}

}  // namespace genfl
