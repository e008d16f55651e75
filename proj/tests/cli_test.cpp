#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsqkd/cli.hpp"
#include "fsqkd/config.hpp"
#include "fsqkd/errors.hpp"

using namespace fsqkd;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "fsqkd_cli_test";
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
    const auto path = temp_dir() / name;
    std::ofstream out(path, std::ios::trunc);
    out << content;
    return path;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kSmallScenario = R"({
  "link": { "range_m": 300.0 },
  "turbulence": { "cn2": 1e-15 },
  "duration_s": 2e-4,
  "master_seed": 11
})";

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("config: canonical round trip and digest stability") {
    const auto spec = config::parse(kSmallScenario);
    const auto canonical = config::canonical_json(spec);
    const auto reparsed = config::parse(canonical);
    CHECK(config::canonical_json(reparsed) == canonical);
    CHECK(config::digest(reparsed) == config::digest(spec));

    // Key order and whitespace do not matter; content does.
    const auto shuffled = config::parse(R"({
      "master_seed": 11,   "duration_s": 2e-4,
      "turbulence": {"cn2": 1e-15}, "link": {"range_m": 300.0}
    })");
    CHECK(config::digest(shuffled) == config::digest(spec));

    const auto changed = config::parse(R"({
      "link": { "range_m": 301.0 },
      "turbulence": { "cn2": 1e-15 },
      "duration_s": 2e-4,
      "master_seed": 11
    })");
    CHECK(config::digest(changed) != config::digest(spec));

    // With a tracking section the tuned gains resolve into the canonical
    // form, which then round-trips as explicit numbers.
    const auto tracked = config::parse(R"({"tracking": {"fsm_bandwidth_hz": 800.0}})");
    const auto tracked_canonical = config::canonical_json(tracked);
    CHECK(config::canonical_json(config::parse(tracked_canonical)) == tracked_canonical);
}

TEST_CASE("config: fail-closed schema") {
    CHECK_THROWS_WITH_AS(config::parse(R"({"lnik": {}})"), doctest::Contains("lnik"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(config::parse(R"({"link": {"range_km": 1}})"),
                         doctest::Contains("range_km"), ConfigError);
    CHECK_THROWS_WITH_AS(config::parse(R"({"turbulence": {"cn2": -1e-15}})"),
                         doctest::Contains("cn2"), ConfigError);
    CHECK_THROWS_WITH_AS(config::parse("{nonsense"), doctest::Contains("JSON"), ConfigError);
    CHECK_THROWS_AS(config::parse(R"({"source": {"state_angles_rad": [0.1]}})"), ConfigError);
    CHECK_THROWS_AS(config::parse(R"({"sweep": {"values": [1.0]}})"), ConfigError);
    CHECK_THROWS_WITH_AS(config::parse(R"({"link": {"tx_beam": {"collimated": false}}})"),
                         doctest::Contains("collimated"), ConfigError);

    // Tracking without explicit gains resolves them via the tuning recipe.
    const auto spec = config::parse(R"({"tracking": {"loop_rate_hz": 10000.0}})");
    REQUIRE(spec.scenario.tracking.has_value());
    CHECK(spec.scenario.tracking->pid.kp > 0.0);
    CHECK(spec.scenario.tracking->pid.ki > 0.0);
}

TEST_CASE("cmd_plan: strategy report with boundaries") {
    const auto cfg = write_file("plan.json", R"({
      "link": { "range_m": 300.0 },
      "plan": { "cn2_list": [1e-15, 1e-14] }
    })");
    std::ostringstream out, err;
    cli::Options opt;
    opt.config_path = cfg.string();
    CHECK(cli::cmd_plan(opt, out, err) == cli::kExitOk);
    const auto rows = parse_csv(out.str());
    REQUIRE(rows.size() == 3); // header + two regimes
    CHECK(rows[0][2] == "strategy");
    CHECK(rows[1][2] == "receiver-compensation");
    const double boundary_avg = std::stod(rows[1][4]);
    const double boundary_strong = std::stod(rows[2][4]);
    CHECK(boundary_avg == doctest::Approx(2450.0).epsilon(0.10));
    CHECK(boundary_strong == doctest::Approx(1650.0).epsilon(0.10));
}

TEST_CASE("cmd_plan: invalid config exits 2 naming the field") {
    const auto cfg = write_file("bad_plan.json", R"({"turbulence": {"cn2": -1.0}})");
    std::ostringstream out, err;
    cli::Options opt;
    opt.config_path = cfg.string();
    CHECK(cli::cmd_plan(opt, out, err) == cli::kExitConfigError);
    CHECK(err.str().find("cn2") != std::string::npos);

    cli::Options missing;
    missing.config_path = (temp_dir() / "does_not_exist.json").string();
    std::ostringstream out2, err2;
    CHECK(cli::cmd_plan(missing, out2, err2) == cli::kExitConfigError);
}

TEST_CASE("cmd_interrupt: columns per cn2, zeros in vacuum, frozen value") {
    const auto cfg = write_file("interrupt.json", R"({
      "interrupt": {
        "distances_m": [500, 1000, 1650, 2500, 5000],
        "cn2_list": [0.0, 1e-14],
        "capture_radius_m": 0.04
      }
    })");
    std::ostringstream out, err;
    cli::Options opt;
    opt.config_path = cfg.string();
    CHECK(cli::cmd_interrupt(opt, out, err) == cli::kExitOk);
    const auto rows = parse_csv(out.str());
    REQUIRE(rows.size() == 6);
    CHECK(rows[0][0] == "distance_m");

    double prev = -1.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::stod(rows[i][1]) == 0.0); // vacuum column
        const double f = std::stod(rows[i][2]);
        CHECK(f >= prev);
        prev = f;
    }
    CHECK(std::stod(rows[3][2]) == doctest::Approx(0.018405301876435638).epsilon(1e-9));
}

TEST_CASE("cmd_track: zero gains echo the wander; repeat runs are byte-identical") {
    const auto cfg = write_file("track.json", R"({
      "link": { "range_m": 1650.0 },
      "turbulence": { "cn2": 1e-14 },
      "duration_s": 0.5,
      "master_seed": 5,
      "tracking": { "pid": { "kp": 0.0, "ki": 0.0, "kd": 0.0 } }
    })");
    std::ostringstream out1, err;
    cli::Options opt;
    opt.config_path = cfg.string();
    CHECK(cli::cmd_track(opt, out1, err) == cli::kExitOk);
    const auto rows = parse_csv(out1.str());
    REQUIRE(rows.size() > 100);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][1] == rows[i][3]); // wander_x == residual_x, textually
        CHECK(rows[i][2] == rows[i][4]);
    }

    std::ostringstream out2;
    CHECK(cli::cmd_track(opt, out2, err) == cli::kExitOk);
    CHECK(out1.str() == out2.str());
}

TEST_CASE("cmd_run: csv row, manifest, and seed override") {
    const auto cfg = write_file("run.json", kSmallScenario);
    const auto out_csv = temp_dir() / "run_out.csv";
    std::ostringstream out, err;
    cli::Options opt;
    opt.config_path = cfg.string();
    opt.out_path = out_csv.string();
    CHECK(cli::cmd_run(opt, out, err) == cli::kExitOk);

    const auto rows = parse_csv(slurp(out_csv));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "qber");
    CHECK(rows[0][5] == "abort");
    CHECK(rows[1][5] == "false");
    CHECK(std::stod(rows[1][2]) >= 1e6); // default link comfortably clears 1 Mbps

    const auto manifest_text = slurp(out_csv.string() + ".manifest.json");
    const auto manifest = nlohmann::json::parse(manifest_text);
    CHECK(manifest.contains("scenario_digest"));
    CHECK(manifest["config"]["master_seed"] == 11);
    CHECK(!manifest["assumption_flags"].empty());

    // --seed flows into the resolved config and changes the digest.
    cli::Options reseeded = opt;
    reseeded.seed = 12;
    std::ostringstream out2;
    CHECK(cli::cmd_run(reseeded, out2, err) == cli::kExitOk);
    const auto manifest2 = nlohmann::json::parse(slurp(out_csv.string() + ".manifest.json"));
    CHECK(manifest2["config"]["master_seed"] == 12);
    CHECK(manifest2["scenario_digest"] != manifest["scenario_digest"]);
}

TEST_CASE("cmd_sweep: background sweep columns and analytic mode") {
    const auto cfg = write_file("sweep.json", R"({
      "duration_s": 2e-4,
      "master_seed": 21,
      "sweep": {
        "parameter": "background.sky_radiance",
        "values": [1e-5, 1e-3, 1e-1, 1.0]
      }
    })");
    std::ostringstream out, err;
    cli::Options opt;
    opt.config_path = cfg.string();
    CHECK(cli::cmd_sweep(opt, out, err) == cli::kExitOk);
    const auto rows = parse_csv(out.str());
    REQUIRE(rows.size() == 5);
    CHECK(rows[0][0] == "value");
    double prev_qber = -1.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double q = std::stod(rows[i][1]);
        CHECK(q >= prev_qber);
        prev_qber = q;
    }
    // The blinding row aborts with a zero key rate.
    CHECK(rows[4][6] == "true");
    CHECK(std::stod(rows[4][3]) == 0.0);

    const auto acfg = write_file("sweep_analytic.json", R"({
      "turbulence": { "cn2": 1e-14 },
      "sweep": {
        "parameter": "link.range_m",
        "values": [500, 1650, 3000],
        "analytic_only": true
      }
    })");
    std::ostringstream aout;
    cli::Options aopt;
    aopt.config_path = acfg.string();
    CHECK(cli::cmd_sweep(aopt, aout, err) == cli::kExitOk);
    const auto arows = parse_csv(aout.str());
    REQUIRE(arows.size() == 4);
    CHECK(arows[0][6] == "interruption_fraction");
    CHECK(std::stod(arows[2][6]) == doctest::Approx(0.018405301876435638).epsilon(1e-9));
}

#ifdef FSQKD_CLI_BIN
TEST_CASE("fsqkd binary: exit codes end to end") {
    const auto cfg = write_file("bin.json", kSmallScenario);
    const std::string bin = FSQKD_CLI_BIN;

    auto run = [](const std::string& cmd) {
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    CHECK(run(bin + " plan " + cfg.string() + " > /dev/null 2>&1") == 0);
    CHECK(run(bin + " plan " + (temp_dir() / "missing.json").string() + " > /dev/null 2>&1") ==
          2);
    const auto bad = write_file("bin_bad.json", "{broken");
    CHECK(run(bin + " plan " + bad.string() + " > /dev/null 2>&1") == 2);
    const auto out_csv = temp_dir() / "bin_out.csv";
    CHECK(run(bin + " run " + cfg.string() + " --out " + out_csv.string() +
              " --slots 100000 > /dev/null 2>&1") == 0);
    CHECK(fs::exists(out_csv));
    CHECK(fs::exists(out_csv.string() + ".manifest.json"));
}
#endif
