#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "genfl/genfl.hpp"

using Catch::Approx;
using namespace genfl;

namespace {

LabelHistogram hist(std::vector<std::uint64_t> counts) {
    return LabelHistogram{std::move(counts)};
}

double mean_client_emd(const LabeledDataset& ds, const PartitionPlan& plan) {
    const LabelHistogram pop = label_histogram(ds);
    double sum = 0.0;
    for (const auto& idx : plan.assignments)
        sum += emd_heterogeneity(label_histogram(subset(ds, idx)), pop);
    return sum / static_cast<double>(plan.assignments.size());
}

}  // namespace

TEST_CASE("synthetic dataset is balanced, deterministic and real-provenance", "[dataset]") {
    const LabeledDataset a = make_synthetic_dataset(5, 3, 40, 1.0, 77);
    const LabeledDataset b = make_synthetic_dataset(5, 3, 40, 1.0, 77);
    const LabeledDataset c = make_synthetic_dataset(5, 3, 40, 1.0, 78);

    REQUIRE(a.size() == 200);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    CHECK(a.features != c.features);

    const LabelHistogram h = label_histogram(a);
    for (auto n : h.counts) CHECK(n == 40);
    CHECK(std::all_of(a.provenance.begin(), a.provenance.end(),
                      [](Provenance p) { return p == Provenance::real; }));
}

TEST_CASE("class centers sit uniformly spaced along the diagonal", "[dataset]") {
    const ClassGeometry geom{4, 9, 1.0};
    for (std::size_t c = 0; c + 1 < 4; ++c) {
        const auto lo = geom.center(c);
        const auto hi = geom.center(c + 1);
        double d2 = 0.0;
        for (std::size_t j = 0; j < lo.size(); ++j) d2 += (hi[j] - lo[j]) * (hi[j] - lo[j]);
        CHECK(std::sqrt(d2) == Approx(kCenterSpacing).margin(1e-12));
    }
}

TEST_CASE("label_histogram counts labels", "[dataset]") {
    LabeledDataset ds;
    ds.feature_dim = 1;
    ds.num_classes = 3;
    const std::vector<double> x{0.0};
    ds.append(x, 2, Provenance::real);
    ds.append(x, 0, Provenance::real);
    ds.append(x, 2, Provenance::generated);
    const LabelHistogram h = label_histogram(ds);
    CHECK(h.counts == std::vector<std::uint64_t>{1, 0, 2});
    CHECK(h.total() == 3);
}

TEST_CASE("emd axioms: identity, symmetry, bounds", "[dataset]") {
    const LabelHistogram u = hist({10, 10, 10, 10});
    const LabelHistogram v = hist({1, 0, 0, 39});
    CHECK(emd_heterogeneity(u, u) == 0.0);
    CHECK(emd_heterogeneity(v, v) == 0.0);
    CHECK(emd_heterogeneity(u, v) == Approx(emd_heterogeneity(v, u)));
    RngStream rng(4);
    for (int t = 0; t < 50; ++t) {
        LabelHistogram a = hist({0, 0, 0, 0}), b = hist({0, 0, 0, 0});
        for (auto& n : a.counts) n = rng.uniform_index(20);
        for (auto& n : b.counts) n = rng.uniform_index(20);
        if (a.total() == 0) a.counts[0] = 1;
        if (b.total() == 0) b.counts[0] = 1;
        const double d = emd_heterogeneity(a, b);
        CHECK(d >= 0.0);
        CHECK(d <= 2.0);
    }
}

TEST_CASE("emd satisfies the triangle inequality", "[dataset]") {
    RngStream rng(9);
    for (int t = 0; t < 100; ++t) {
        LabelHistogram a = hist({0, 0, 0, 0, 0});
        LabelHistogram b = a, c = a;
        for (auto& n : a.counts) n = 1 + rng.uniform_index(30);
        for (auto& n : b.counts) n = 1 + rng.uniform_index(30);
        for (auto& n : c.counts) n = 1 + rng.uniform_index(30);
        CHECK(emd_heterogeneity(a, c) <=
              emd_heterogeneity(a, b) + emd_heterogeneity(b, c) + 1e-12);
    }
}

TEST_CASE("one-hot client against uniform population has emd 1.8", "[dataset]") {
    const LabelHistogram client = hist({25, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    const LabelHistogram pop = hist({10, 10, 10, 10, 10, 10, 10, 10, 10, 10});
    CHECK(emd_heterogeneity(client, pop) == Approx(1.8).margin(1e-12));
}

TEST_CASE("emd rejects mismatched or empty histograms", "[dataset]") {
    CHECK_THROWS_AS(emd_heterogeneity(hist({1, 2}), hist({1, 2, 3})), std::invalid_argument);
    CHECK_THROWS_AS(emd_heterogeneity(hist({0, 0}), hist({1, 1})), std::invalid_argument);
}

TEST_CASE("largest remainder rounding is exact and stable", "[dataset]") {
    const std::vector<double> props{0.5, 0.25, 0.25};
    const auto counts = genfl::detail::largest_remainder_counts(props, 10);
    CHECK(counts == std::vector<std::size_t>{5, 3, 2});

    RngStream rng(17);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> p(1 + rng.uniform_index(8));
        double sum = 0.0;
        for (auto& v : p) {
            v = rng.uniform();
            sum += v;
        }
        for (auto& v : p) v /= sum;
        const std::size_t n = rng.uniform_index(500);
        const auto c = genfl::detail::largest_remainder_counts(p, n);
        CHECK(std::accumulate(c.begin(), c.end(), std::size_t{0}) == n);
    }
}

TEST_CASE("dirichlet partition covers every sample exactly once", "[dataset]") {
    const LabeledDataset ds = make_synthetic_dataset(10, 4, 30, 1.0, 5);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const PartitionPlan plan = dirichlet_partition(ds, 8, 0.1, seed);
        REQUIRE(plan.assignments.size() == 8);

        std::vector<std::size_t> seen;
        for (const auto& a : plan.assignments) {
            CHECK_FALSE(a.empty());
            seen.insert(seen.end(), a.begin(), a.end());
        }
        std::sort(seen.begin(), seen.end());
        REQUIRE(seen.size() == ds.size());
        for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i);
    }
}

TEST_CASE("dirichlet partition is deterministic in the seed", "[dataset]") {
    const LabeledDataset ds = make_synthetic_dataset(6, 3, 25, 1.0, 2);
    const PartitionPlan a = dirichlet_partition(ds, 5, 0.3, 40);
    const PartitionPlan b = dirichlet_partition(ds, 5, 0.3, 40);
    CHECK(a.assignments == b.assignments);
    const PartitionPlan c = dirichlet_partition(ds, 5, 0.3, 41);
    CHECK(a.assignments != c.assignments);
}

TEST_CASE("smaller alpha produces higher label skew", "[dataset]") {
    const LabeledDataset ds = make_synthetic_dataset(10, 4, 40, 1.0, 3);
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const double skewed = mean_client_emd(ds, dirichlet_partition(ds, 10, 0.1, 1000 + seed));
        const double mild = mean_client_emd(ds, dirichlet_partition(ds, 10, 1.0, 2000 + seed));
        if (skewed > mild) ++wins;
    }
    INFO("alpha=0.1 skew exceeded alpha=1.0 in " << wins << "/20 seeds");
    CHECK(wins >= 16);
}

TEST_CASE("huge alpha approaches an even split", "[dataset]") {
    const LabeledDataset ds = make_synthetic_dataset(5, 3, 100, 1.0, 8);
    const PartitionPlan plan = dirichlet_partition(ds, 10, 1e6, 9);
    const double expect = static_cast<double>(ds.size()) / 10.0;
    for (const auto& a : plan.assignments) {
        CHECK(static_cast<double>(a.size()) >= 0.8 * expect);
        CHECK(static_cast<double>(a.size()) <= 1.2 * expect);
    }
}

TEST_CASE("dirichlet partition rejects bad arguments", "[dataset]") {
    const LabeledDataset ds = make_synthetic_dataset(3, 2, 5, 1.0, 1);
    CHECK_THROWS_AS(dirichlet_partition(ds, 4, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(dirichlet_partition(ds, 4, -0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(dirichlet_partition(ds, 0, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(dirichlet_partition(ds, ds.size() + 1, 0.5, 1), std::invalid_argument);
}

TEST_CASE("subset and concat preserve samples", "[dataset]") {
    const LabeledDataset ds = make_synthetic_dataset(3, 2, 10, 1.0, 6);
    const std::vector<std::size_t> idx{3, 7, 15};
    const LabeledDataset sub = subset(ds, idx);
    REQUIRE(sub.size() == 3);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        CHECK(sub.labels[i] == ds.labels[idx[i]]);
        const auto a = sub.feature(i), b = ds.feature(idx[i]);
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }

    const LabeledDataset both = concat(sub, sub);
    CHECK(both.size() == 6);
    CHECK(both.labels[3] == sub.labels[0]);

    LabeledDataset other;
    other.feature_dim = 5;
    other.num_classes = 3;
    CHECK_THROWS_AS(concat(ds, other), std::invalid_argument);
}

TEST_CASE("append validates dimension and label range", "[dataset]") {
    LabeledDataset ds;
    ds.feature_dim = 2;
    ds.num_classes = 2;
    const std::vector<double> good{1.0, 2.0};
    const std::vector<double> bad{1.0};
    CHECK_THROWS_AS(ds.append(bad, 0, Provenance::real), std::invalid_argument);
    CHECK_THROWS_AS(ds.append(good, 2, Provenance::real), std::invalid_argument);
    ds.append(good, 1, Provenance::generated);
    CHECK(ds.size() == 1);
}

TEST_CASE("dataset text round-trips exactly", "[dataset]") {
    LabeledDataset ds = make_synthetic_dataset(4, 3, 12, 0.7, 13);
    ds.append(std::vector<double>{0.1, -2.5, 1e-17}, 2, Provenance::generated);

    const std::string text = dataset_to_text(ds);
    const LabeledDataset back = dataset_from_text(text);
    CHECK(back.feature_dim == ds.feature_dim);
    CHECK(back.num_classes == ds.num_classes);
    CHECK(back.labels == ds.labels);
    CHECK(back.provenance == ds.provenance);
    CHECK(back.features == ds.features);

    CHECK_THROWS(dataset_from_text("no header\n1,real,0.5\n"));
}

TEST_CASE("dataset files survive a save/load cycle", "[dataset]") {
    const LabeledDataset ds = make_synthetic_dataset(3, 4, 8, 1.0, 21);
    const auto path = std::filesystem::temp_directory_path() / "genfl_ds_test.txt";
    save_dataset(ds, path);
    const LabeledDataset back = load_dataset(path);
    CHECK(back.features == ds.features);
    CHECK(back.labels == ds.labels);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_dataset(path), IoError);
}

TEST_CASE("standardizer zero-means and unit-scales the reference set", "[dataset]") {
    const LabeledDataset ds = make_synthetic_dataset(6, 5, 50, 1.3, 20);
    const Standardizer s = Standardizer::fit(ds);
    const LabeledDataset out = s.apply(ds);

    for (std::size_t j = 0; j < out.feature_dim; ++j) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) mean += out.feature(i)[j];
        mean /= static_cast<double>(out.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double d = out.feature(i)[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(out.size());
        CHECK(mean == Approx(0.0).margin(1e-9));
        CHECK(var == Approx(1.0).margin(1e-9));
    }

    LabeledDataset empty;
    empty.feature_dim = 5;
    empty.num_classes = 2;
    CHECK_THROWS_AS(Standardizer::fit(empty), std::invalid_argument);
    LabeledDataset wrong;
    wrong.feature_dim = 3;
    wrong.num_classes = 2;
    CHECK_THROWS_AS(s.apply(wrong), std::invalid_argument);
}

TEST_CASE("central training on the standardized synthetic task reaches high accuracy",
          "[dataset]") {
    const LabeledDataset raw_train = make_synthetic_dataset(10, 16, 100, 1.0, 500);
    const LabeledDataset raw_test = make_synthetic_dataset(10, 16, 40, 1.0, 501);
    const Standardizer s = Standardizer::fit(raw_train);
    const LabeledDataset train_set = s.apply(raw_train);
    const LabeledDataset test_set = s.apply(raw_test);

    ModelParams m = init_model({{16, 64}, {64, 10}}, 3);
    RngStream rng(4);
    m = train(m, train_set, {60, 32, 0.1}, rng);
    const EvalResult ev = evaluate(m, test_set);
    INFO("central accuracy " << ev.accuracy);
    CHECK(ev.accuracy >= 0.95);
}
