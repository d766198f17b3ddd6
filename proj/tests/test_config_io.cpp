#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "genfl/genfl.hpp"

using Catch::Approx;
using namespace genfl;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.seed = 5;
    cfg.num_classes = 4;
    cfg.feature_dim = 8;
    cfg.samples_per_class = 40;
    cfg.num_clients = 6;
    cfg.clients_per_round = 3;
    cfg.rounds = 3;
    cfg.alpha = 0.5;
    cfg.train_spec = {1, 16, 0.05};
    cfg.generator.rate_per_round = 8;
    cfg.generator.cap_per_class = 20;
    return cfg;
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + needle.size()))
        ++n;
    return n;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("genfl_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static std::size_t& counter() {
        static std::size_t c = 0;
        return c;
    }
};

std::vector<RoundMetrics> sample_rows() {
    std::vector<RoundMetrics> rows(3);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        rows[r].round = r;
        rows[r].mode = "GenFL";
        rows[r].test_accuracy = 0.1 * static_cast<double>(r) + 1.0 / 3.0;
        rows[r].test_loss = 2.302585092994046 / (static_cast<double>(r) + 1.0);
        rows[r].mean_client_emd = 0.7;
        rows[r].round_time_sec = 0.264 * static_cast<double>(r);
        rows[r].round_energy_joules = 1e-3 * static_cast<double>(r);
        rows[r].pool_size = 8 * r;
    }
    return rows;
}

}  // namespace

TEST_CASE("an empty config file yields the defaults", "[config_io]") {
    const ExperimentConfig cfg = parse_config_text("");
    const ExperimentConfig def;
    CHECK(echo_config(cfg) == echo_config(def));
    CHECK(cfg.seed == 42);
    CHECK(cfg.mode == Mode::GenFL);
    CHECK(cfg.kappa1 == 0.7);
    CHECK(cfg.kappa2 == 0.3);
}

TEST_CASE("comments, blanks, and whitespace are tolerated", "[config_io]") {
    const ExperimentConfig cfg = parse_config_text(
        "# a comment\n"
        "\n"
        "  seed = 99  \r\n"
        "alpha=0.25\n"
        "\t# trailing comment line\n");
    CHECK(cfg.seed == 99);
    CHECK(cfg.alpha == 0.25);
}

TEST_CASE("unknown keys and bad values report the offending line", "[config_io]") {
    try {
        parse_config_text("seed=1\n\nbogus_key=3\n");
        FAIL("expected ConfigParseError");
    } catch (const ConfigParseError& e) {
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }

    try {
        parse_config_text("alpha=abc\n");
        FAIL("expected ConfigParseError");
    } catch (const ConfigParseError& e) {
        CHECK(e.line == 1);
        CHECK(std::string(e.what()).find("alpha") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_config_text("seed\n"), ConfigParseError);
    CHECK_THROWS_AS(parse_config_text("mode=Other\n"), ConfigParseError);
    CHECK_THROWS_AS(parse_config_text("parallel_clients=2\n"), ConfigParseError);
}

TEST_CASE("invalid values surface as validation errors naming the key", "[config_io]") {
    try {
        parse_config_text("alpha=-1\n");
        FAIL("expected ConfigValidationError");
    } catch (const ConfigValidationError& e) {
        CHECK(std::string(e.what()).find("alpha") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("num_clients=0\n"), ConfigValidationError);
    CHECK_THROWS_AS(parse_config_text("clients_per_round=10\nnum_clients=5\n"),
                    ConfigValidationError);
}

TEST_CASE("a single kappa implies its complement", "[config_io]") {
    const ExperimentConfig k1 = parse_config_text("kappa1=0.9\n");
    CHECK(k1.kappa1 == 0.9);
    CHECK(k1.kappa2 == Approx(0.1).margin(1e-15));

    const ExperimentConfig k2 = parse_config_text("kappa2=0.25\n");
    CHECK(k2.kappa1 == Approx(0.75).margin(1e-15));
    CHECK(k2.kappa2 == 0.25);

    CHECK_THROWS_AS(parse_config_text("kappa1=0.5\nkappa2=0.2\n"), ConfigValidationError);
}

TEST_CASE("mode selects the default kappas when none are given", "[config_io]") {
    const ExperimentConfig fl = parse_config_text("mode=FL-only\n");
    CHECK(fl.kappa1 == 1.0);
    CHECK(fl.kappa2 == 0.0);

    const ExperimentConfig aigc = parse_config_text("mode=AIGC-only\n");
    CHECK(aigc.kappa1 == 0.0);
    CHECK(aigc.kappa2 == 1.0);

    const ExperimentConfig genfl = parse_config_text("mode=GenFL\n");
    CHECK(genfl.kappa1 == 0.7);
    CHECK(genfl.kappa2 == 0.3);

    CHECK_THROWS_AS(parse_config_text("mode=FL-only\nkappa2=0.3\n"),
                    ConfigValidationError);
}

TEST_CASE("a large cohort config loads cleanly", "[config_io]") {
    const ExperimentConfig cfg = parse_config_text(
        "num_clients=100\n"
        "clients_per_round=10\n"
        "rounds=100\n"
        "alpha=0.1\n"
        "epochs=5\n"
        "batch_size=64\n"
        "learning_rate=0.0001\n"
        "rate_per_round=10\n"
        "cap_per_class=300\n"
        "samples_per_class=400\n");
    CHECK(cfg.num_clients == 100);
    CHECK(cfg.clients_per_round == 10);
    CHECK(cfg.rounds == 100);
    CHECK(cfg.train_spec.epochs == 5);
    CHECK(cfg.train_spec.batch_size == 64);
    CHECK(cfg.train_spec.learning_rate == 0.0001);
    CHECK(cfg.generator.rate_per_round == 10);
    CHECK(cfg.generator.cap_per_class == 300);
    CHECK(cfg.validation_errors().empty());
}

TEST_CASE("the config echo reparses to identical bytes", "[config_io]") {
    ExperimentConfig cfg = tiny_config();
    cfg.alpha = 1.0 / 3.0;
    cfg.train_spec.learning_rate = 0.1 + 1e-17;
    cfg.generator.label_noise = 0.1;
    cfg.generator.center_shift = 0.5;
    cfg.output_dir = "some/dir";
    cfg.parallel_clients = true;

    const std::string echo1 = echo_config(cfg);
    const ExperimentConfig back = parse_config_text(echo1);
    const std::string echo2 = echo_config(back);
    CHECK(echo1 == echo2);
    CHECK(back.alpha == cfg.alpha);
    CHECK(back.train_spec.learning_rate == cfg.train_spec.learning_rate);
    CHECK(back.output_dir == cfg.output_dir);
    CHECK(back.parallel_clients == cfg.parallel_clients);

    for (const auto& key : config_keys()) {
        INFO("key " << key.name);
        CHECK(echo1.find(std::string(key.name) + "=") != std::string::npos);
    }
}

TEST_CASE("config hashes are stable and discriminating", "[config_io]") {
    const ExperimentConfig a = tiny_config();
    const std::string h = config_hash(a);
    CHECK(h.size() == 16);
    CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(config_hash(a) == h);

    ExperimentConfig b = a;
    b.seed += 1;
    CHECK(config_hash(b) != h);
}

TEST_CASE("load_config rejects missing files", "[config_io]") {
    CHECK_THROWS_AS(load_config("/nonexistent/genfl.cfg"), IoError);
}

TEST_CASE("metrics rows round-trip through CSV exactly", "[config_io]") {
    const auto rows = sample_rows();
    const std::string csv = metrics_to_csv(rows);
    CHECK(csv.rfind(std::string(kMetricsCsvHeader) + std::string("\n"), 0) == 0);
    CHECK(metrics_to_csv(rows) == csv);

    const auto back = metrics_from_csv(csv);
    REQUIRE(back.size() == rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        CHECK(back[r].round == rows[r].round);
        CHECK(back[r].mode == rows[r].mode);
        CHECK(back[r].test_accuracy == rows[r].test_accuracy);
        CHECK(back[r].test_loss == rows[r].test_loss);
        CHECK(back[r].mean_client_emd == rows[r].mean_client_emd);
        CHECK(back[r].round_time_sec == rows[r].round_time_sec);
        CHECK(back[r].round_energy_joules == rows[r].round_energy_joules);
        CHECK(back[r].pool_size == rows[r].pool_size);
    }
}

TEST_CASE("malformed metrics CSV is rejected", "[config_io]") {
    CHECK_THROWS_AS(metrics_from_csv(""), std::runtime_error);
    CHECK_THROWS_AS(metrics_from_csv("round,mode\n"), std::runtime_error);
    const std::string header(kMetricsCsvHeader);
    CHECK_THROWS_AS(metrics_from_csv(header + "\n1,GenFL,0.5\n"), std::runtime_error);
    CHECK_THROWS_AS(metrics_from_csv(header + "\n1,Nope,0.5,1,0.7,1,1,0\n"),
                    std::runtime_error);
    CHECK_THROWS_AS(metrics_from_csv(header + "\nx,GenFL,0.5,1,0.7,1,1,0\n"),
                    std::runtime_error);
}

TEST_CASE("atomic writes create parents and leave no temp files", "[config_io]") {
    TempDir tmp;
    const fs::path target = tmp.path / "nested" / "out.txt";
    write_file_atomic(target, "hello\n");
    CHECK(read_file(target) == "hello\n");
    write_file_atomic(target, "world\n");
    CHECK(read_file(target) == "world\n");

    std::size_t entries = 0;
    for (const auto& e : fs::directory_iterator(target.parent_path())) {
        (void)e;
        ++entries;
    }
    CHECK(entries == 1);

    CHECK_THROWS_AS(read_file(tmp.path / "missing.txt"), IoError);
}

TEST_CASE("plots are deterministic with one polyline per series", "[config_io]") {
    std::vector<PlotSeries> series(1);
    series[0].label = "GenFL";
    series[0].x = {0, 1, 2, 3};
    series[0].y = {0.1, 0.4, 0.6, 0.9};
    const std::string one = render_line_plot(series);
    CHECK(count_occurrences(one, "<polyline") == 1);
    CHECK(one.find("GenFL") != std::string::npos);
    CHECK(one.find("round") != std::string::npos);
    CHECK(one.find("test accuracy") != std::string::npos);
    CHECK(render_line_plot(series) == one);

    series.push_back({"FL-only", {0, 1, 2, 3}, {0.1, 0.2, 0.3, 0.4}});
    series.push_back({"AIGC-only", {0, 1, 2, 3}, {0.1, 0.15, 0.2, 0.25}});
    const std::string three = render_line_plot(series);
    CHECK(count_occurrences(three, "<polyline") == 3);
    CHECK(three.find("FL-only") != std::string::npos);
    CHECK(three.find("AIGC-only") != std::string::npos);

    CHECK_THROWS_AS(render_line_plot({}), std::invalid_argument);
    CHECK_THROWS_AS(render_line_plot({{"bad", {0, 1}, {0.5}}}), std::invalid_argument);
}

TEST_CASE("accuracy_series extracts rounds and labels from rows", "[config_io]") {
    const auto rows = sample_rows();
    const PlotSeries s = accuracy_series(rows);
    CHECK(s.label == "GenFL");
    REQUIRE(s.x.size() == rows.size());
    CHECK(s.x.front() == 0.0);
    CHECK(s.x.back() == 2.0);
    CHECK(s.y[1] == rows[1].test_accuracy);
    CHECK(accuracy_series(rows, "custom").label == "custom");
}

TEST_CASE("row validation requires a contiguous round column", "[config_io]") {
    auto rows = sample_rows();
    CHECK_NOTHROW(validate_metrics_rows(rows));
    rows[2].round = 5;
    CHECK_THROWS_AS(validate_metrics_rows(rows), std::runtime_error);
}

TEST_CASE("run_table produces a validated trace with the config hash", "[config_io]") {
    const ExperimentConfig cfg = tiny_config();
    const MetricsTable table = run_table(cfg);
    CHECK(table.seed == cfg.seed);
    CHECK(table.config_hash == config_hash(cfg));
    REQUIRE(table.rows.size() == cfg.rounds + 1);
    CHECK_NOTHROW(validate_metrics_rows(table.rows));
}

TEST_CASE("run_to_dir writes the metrics CSV and the config echo", "[config_io]") {
    TempDir tmp;
    ExperimentConfig cfg = tiny_config();
    cfg.output_dir = (tmp.path / "run1").string();
    const MetricsTable table = run_to_dir(cfg);

    const std::string csv = read_file(tmp.path / "run1" / "metrics.csv");
    const auto rows = metrics_from_csv(csv);
    REQUIRE(rows.size() == table.rows.size());
    CHECK(rows.back().test_accuracy == table.rows.back().test_accuracy);
    CHECK(read_file(tmp.path / "run1" / "config.txt") == echo_config(cfg));

    const MetricsTable again = run_to_dir(cfg);
    CHECK(read_file(tmp.path / "run1" / "metrics.csv") == csv);
    CHECK(again.rows.size() == table.rows.size());
}

TEST_CASE("axis application adjusts kappas and rejects reserved keys", "[config_io]") {
    const ExperimentConfig base = tiny_config();

    const ExperimentConfig k = apply_axis_value(base, "kappa1", "0.9");
    CHECK(k.kappa1 == 0.9);
    CHECK(k.kappa2 == Approx(0.1).margin(1e-15));

    const ExperimentConfig fl = apply_axis_value(base, "mode", "FL-only");
    CHECK(fl.mode == Mode::FLOnly);
    CHECK(fl.kappa1 == 1.0);
    CHECK(fl.kappa2 == 0.0);

    const ExperimentConfig same = apply_axis_value(base, "mode", "GenFL");
    CHECK(same.kappa1 == base.kappa1);

    const ExperimentConfig a = apply_axis_value(base, "alpha", "1.0");
    CHECK(a.alpha == 1.0);

    CHECK_THROWS_AS(apply_axis_value(base, "seed", "1"), std::invalid_argument);
    CHECK_THROWS_AS(apply_axis_value(base, "output_dir", "x"), std::invalid_argument);
    CHECK_THROWS_AS(apply_axis_value(base, "not_a_key", "1"), std::invalid_argument);
}

TEST_CASE("sweep members get derived seeds and value-tagged directories", "[config_io]") {
    ExperimentConfig base = tiny_config();
    base.output_dir = "sweep_base";
    const auto members = sweep_configs(base, "alpha", {"0.1", "1.0"});
    REQUIRE(members.size() == 2);
    CHECK(members[0].alpha == 0.1);
    CHECK(members[1].alpha == 1.0);
    CHECK(members[0].seed == sweep_child_seed(base.seed, "alpha", "0.1"));
    CHECK(members[1].seed == sweep_child_seed(base.seed, "alpha", "1.0"));
    CHECK(members[0].seed != members[1].seed);
    CHECK(members[0].output_dir == (fs::path("sweep_base") / "alpha=0.1").string());

    CHECK_THROWS_AS(sweep_configs(base, "alpha", {}), std::invalid_argument);
    CHECK_THROWS_AS(sweep_configs(base, "alpha", {"-1"}), ConfigValidationError);
}

TEST_CASE("sweeps run end to end and emit a combined CSV", "[config_io]") {
    TempDir tmp;
    ExperimentConfig base = tiny_config();
    base.output_dir = (tmp.path / "sw").string();
    const SweepResult result = run_sweep(base, "mode", {"FL-only", "GenFL"});
    REQUIRE(result.tables.size() == 2);
    CHECK(result.axis == "mode");

    const std::string csv = read_file(tmp.path / "sw" / "sweep.csv");
    CHECK(csv.rfind("axis_key,axis_value," + std::string(kMetricsCsvHeader) + "\n", 0) ==
          0);
    CHECK(count_occurrences(csv, "\nmode,FL-only,") +
              count_occurrences(csv, "\nmode,GenFL,") ==
          2 * (base.rounds + 1));
    CHECK(fs::exists(tmp.path / "sw" / "mode=FL-only" / "metrics.csv"));
    CHECK(fs::exists(tmp.path / "sw" / "mode=GenFL" / "metrics.csv"));

    const std::string svg =
        plot_csv_files({tmp.path / "sw" / "mode=FL-only" / "metrics.csv",
                        tmp.path / "sw" / "mode=GenFL" / "metrics.csv"});
    CHECK(count_occurrences(svg, "<polyline") == 2);
    CHECK(svg.find("FL-only") != std::string::npos);
}

TEST_CASE("plot labels repeat with a disambiguating suffix", "[config_io]") {
    TempDir tmp;
    ExperimentConfig cfg = tiny_config();
    cfg.output_dir = (tmp.path / "a").string();
    run_to_dir(cfg);
    cfg.output_dir = (tmp.path / "b").string();
    run_to_dir(cfg);

    const std::string svg = plot_csv_files(
        {tmp.path / "a" / "metrics.csv", tmp.path / "b" / "metrics.csv"});
    CHECK(count_occurrences(svg, "<polyline") == 2);
    CHECK(svg.find("GenFL (2)") != std::string::npos);

    TempDir out;
    plot_to_file({tmp.path / "a" / "metrics.csv"}, out.path / "p.svg");
    CHECK(read_file(out.path / "p.svg") == plot_csv_files({tmp.path / "a" / "metrics.csv"}));
}
