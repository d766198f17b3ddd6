#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "genfl/errors.hpp"
#include "genfl/rng.hpp"

namespace genfl {

enum class Provenance : std::uint8_t { real = 0, generated = 1 };

// Feature/label sample collection with per-sample provenance. Features are
// stored row-major in one flat buffer of size() * feature_dim doubles.
struct LabeledDataset {
    std::size_t feature_dim = 0;
    std::size_t num_classes = 0;
    std::vector<double> features;
    std::vector<std::uint32_t> labels;
    std::vector<Provenance> provenance;

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }

    std::span<const double> feature(std::size_t i) const {
        return {features.data() + i * feature_dim, feature_dim};
    }

    void append(std::span<const double> x, std::uint32_t label, Provenance p) {
        if (x.size() != feature_dim)
            throw std::invalid_argument("dataset append: feature dimension mismatch");
        if (label >= num_classes)
            throw std::invalid_argument("dataset append: label out of range");
        features.insert(features.end(), x.begin(), x.end());
        labels.push_back(label);
        provenance.push_back(p);
    }
};

struct LabelHistogram {
    std::vector<std::uint64_t> counts;

    std::uint64_t total() const {
        return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    }
};

// Per-client sample index lists into a parent dataset. Lists are disjoint.
struct PartitionPlan {
    std::vector<std::vector<std::size_t>> assignments;
};

// Deterministic class centers: consecutive centers sit kCenterSpacing apart
// along the unit-hypercube main diagonal, so the spacing is uniform in any
// feature dimension.
inline constexpr double kCenterSpacing = 6.0;

struct ClassGeometry {
    std::size_t num_classes = 0;
    std::size_t feature_dim = 0;
    double cluster_spread = 1.0;

    std::vector<double> center(std::size_t cls) const {
        const double step = kCenterSpacing / std::sqrt(static_cast<double>(feature_dim));
        return std::vector<double>(feature_dim, step * static_cast<double>(cls));
    }
};

inline LabeledDataset make_synthetic_dataset(std::size_t num_classes,
                                             std::size_t feature_dim,
                                             std::size_t samples_per_class,
                                             double cluster_spread,
                                             std::uint64_t seed) {
    if (num_classes == 0 || feature_dim == 0 || samples_per_class == 0)
        throw std::invalid_argument("make_synthetic_dataset: counts must be positive");
    if (!(cluster_spread > 0.0))
        throw std::invalid_argument("make_synthetic_dataset: cluster_spread must be > 0");

    ClassGeometry geom{num_classes, feature_dim, cluster_spread};
    LabeledDataset ds;
    ds.feature_dim = feature_dim;
    ds.num_classes = num_classes;
    ds.features.reserve(num_classes * samples_per_class * feature_dim);

    RngStream rng(derive_seed(seed));
    std::vector<double> x(feature_dim);
    for (std::size_t c = 0; c < num_classes; ++c) {
        const std::vector<double> mu = geom.center(c);
        for (std::size_t s = 0; s < samples_per_class; ++s) {
            for (std::size_t j = 0; j < feature_dim; ++j)
                x[j] = mu[j] + cluster_spread * rng.normal();
            ds.append(x, static_cast<std::uint32_t>(c), Provenance::real);
        }
    }
    return ds;
}

inline LabelHistogram label_histogram(const LabeledDataset& ds) {
    LabelHistogram h;
    h.counts.assign(ds.num_classes, 0);
    for (std::uint32_t y : ds.labels) ++h.counts[y];
    return h;
}

// L1 distance between the normalized label marginals; range [0, 2].
inline double emd_heterogeneity(const LabelHistogram& client,
                                const LabelHistogram& population) {
    if (client.counts.size() != population.counts.size())
        throw std::invalid_argument("emd_heterogeneity: class count mismatch");
    const double ct = static_cast<double>(client.total());
    const double pt = static_cast<double>(population.total());
    if (ct == 0.0 || pt == 0.0)
        throw std::invalid_argument("emd_heterogeneity: zero-total histogram");
    double d = 0.0;
    for (std::size_t c = 0; c < client.counts.size(); ++c)
        d += std::abs(static_cast<double>(client.counts[c]) / ct -
                      static_cast<double>(population.counts[c]) / pt);
    return d;
}

namespace detail {

// Splits n items by the given proportions using largest-remainder rounding;
// the returned counts sum to n exactly.
inline std::vector<std::size_t> largest_remainder_counts(
    std::span<const double> proportions, std::size_t n) {
    const std::size_t k = proportions.size();
    std::vector<std::size_t> counts(k, 0);
    std::vector<double> frac(k, 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double exact = proportions[i] * static_cast<double>(n);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        frac[i] = exact - std::floor(exact);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t r = 0; r < n - assigned; ++r) ++counts[order[r % k]];
    return counts;
}

}  // namespace detail

// Class-wise Dirichlet split: for each class, proportions across clients are
// drawn from Dirichlet(alpha * 1) and the class's indices are divided by
// largest-remainder rounding. If any client ends up empty the whole partition
// is re-drawn with seed+1 (up to 100 attempts).
inline PartitionPlan dirichlet_partition(const LabeledDataset& ds,
                                         std::size_t num_clients,
                                         double alpha,
                                         std::uint64_t seed) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("dirichlet_partition: alpha must be > 0");
    if (num_clients == 0)
        throw std::invalid_argument("dirichlet_partition: num_clients must be >= 1");
    if (num_clients > ds.size())
        throw std::invalid_argument("dirichlet_partition: more clients than samples");

    std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

    for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
        RngStream rng(derive_seed(seed + attempt));
        PartitionPlan plan;
        plan.assignments.assign(num_clients, {});

        std::vector<double> props(num_clients);
        for (std::size_t c = 0; c < ds.num_classes; ++c) {
            double sum = 0.0;
            for (std::size_t k = 0; k < num_clients; ++k) {
                props[k] = rng.gamma(alpha);
                sum += props[k];
            }
            if (by_class[c].empty()) continue;
            if (sum == 0.0) {
                std::fill(props.begin(), props.end(), 1.0 / static_cast<double>(num_clients));
            } else {
                for (double& p : props) p /= sum;
            }
            const auto counts = detail::largest_remainder_counts(props, by_class[c].size());
            std::size_t next = 0;
            for (std::size_t k = 0; k < num_clients; ++k) {
                for (std::size_t j = 0; j < counts[k]; ++j)
                    plan.assignments[k].push_back(by_class[c][next++]);
            }
        }

        const bool any_empty = std::any_of(
            plan.assignments.begin(), plan.assignments.end(),
            [](const std::vector<std::size_t>& a) { return a.empty(); });
        if (!any_empty) return plan;
    }
    throw std::runtime_error(
        "dirichlet_partition: could not produce a partition without empty clients "
        "in 100 attempts");
}

// Per-coordinate affine normalization, fitted on a reference set (the
// training split) and applied to everything that feeds the model — training
// data, held-out data and generated samples alike.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> inv_std;

    static Standardizer fit(const LabeledDataset& ds) {
        if (ds.empty())
            throw std::invalid_argument("Standardizer: cannot fit on an empty dataset");
        Standardizer s;
        s.mean.assign(ds.feature_dim, 0.0);
        s.inv_std.assign(ds.feature_dim, 0.0);
        const double n = static_cast<double>(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const auto x = ds.feature(i);
            for (std::size_t j = 0; j < ds.feature_dim; ++j) s.mean[j] += x[j];
        }
        for (double& m : s.mean) m /= n;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const auto x = ds.feature(i);
            for (std::size_t j = 0; j < ds.feature_dim; ++j) {
                const double d = x[j] - s.mean[j];
                s.inv_std[j] += d * d;
            }
        }
        for (double& v : s.inv_std) v = 1.0 / std::max(std::sqrt(v / n), 1e-12);
        return s;
    }

    void apply_in_place(LabeledDataset& ds) const {
        if (ds.feature_dim != mean.size())
            throw std::invalid_argument("Standardizer: feature dimension mismatch");
        for (std::size_t i = 0; i < ds.size(); ++i) {
            double* x = ds.features.data() + i * ds.feature_dim;
            for (std::size_t j = 0; j < ds.feature_dim; ++j)
                x[j] = (x[j] - mean[j]) * inv_std[j];
        }
    }

    LabeledDataset apply(LabeledDataset ds) const {
        apply_in_place(ds);
        return ds;
    }
};

inline LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> indices) {
    LabeledDataset out;
    out.feature_dim = ds.feature_dim;
    out.num_classes = ds.num_classes;
    out.features.reserve(indices.size() * ds.feature_dim);
    for (std::size_t i : indices) out.append(ds.feature(i), ds.labels[i], ds.provenance[i]);
    return out;
}

inline LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
    if (a.feature_dim != b.feature_dim || a.num_classes != b.num_classes)
        throw std::invalid_argument("concat: dataset shape mismatch");
    LabeledDataset out = a;
    out.features.insert(out.features.end(), b.features.begin(), b.features.end());
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    out.provenance.insert(out.provenance.end(), b.provenance.begin(), b.provenance.end());
    return out;
}

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

}  // namespace detail

// Columnar debug format: a '#' header line carrying dim and class count, then
// one sample per line as label,provenance,f0,f1,...
inline std::string dataset_to_text(const LabeledDataset& ds) {
    std::string out = "# genfl-dataset dim=" + std::to_string(ds.feature_dim) +
                      " classes=" + std::to_string(ds.num_classes) + "\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out += std::to_string(ds.labels[i]);
        out += ds.provenance[i] == Provenance::real ? ",real" : ",generated";
        for (double v : ds.feature(i)) {
            out += ',';
            detail::append_double(out, v);
        }
        out += '\n';
    }
    return out;
}

inline LabeledDataset dataset_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# genfl-dataset", 0) != 0)
        throw std::runtime_error("dataset_from_text: missing header line");

    LabeledDataset ds;
    {
        std::istringstream hdr(line);
        std::string tok;
        while (hdr >> tok) {
            if (tok.rfind("dim=", 0) == 0) ds.feature_dim = std::stoul(tok.substr(4));
            if (tok.rfind("classes=", 0) == 0) ds.num_classes = std::stoul(tok.substr(8));
        }
    }
    if (ds.feature_dim == 0 || ds.num_classes == 0)
        throw std::runtime_error("dataset_from_text: bad header line");

    std::vector<double> x(ds.feature_dim);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        if (!std::getline(row, field, ','))
            throw std::runtime_error("dataset_from_text: bad row at line " + std::to_string(line_no));
        const auto label = static_cast<std::uint32_t>(std::stoul(field));
        if (!std::getline(row, field, ','))
            throw std::runtime_error("dataset_from_text: bad row at line " + std::to_string(line_no));
        Provenance p;
        if (field == "real") p = Provenance::real;
        else if (field == "generated") p = Provenance::generated;
        else throw std::runtime_error("dataset_from_text: bad provenance at line " + std::to_string(line_no));
        for (std::size_t j = 0; j < ds.feature_dim; ++j) {
            if (!std::getline(row, field, ','))
                throw std::runtime_error("dataset_from_text: short row at line " + std::to_string(line_no));
            x[j] = std::stod(field);
        }
        ds.append(x, label, p);
    }
    return ds;
}

inline void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_dataset: cannot open " + path.string());
    const std::string text = dataset_to_text(ds);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("save_dataset: write failed for " + path.string());
}

inline LabeledDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_dataset: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return dataset_from_text(buf.str());
}

}  // namespace genfl
