#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cli_harness.hpp"
#include "homsim/homsim.hpp"
#include "homsim/scan_io.hpp"

using namespace homsim;
using Catch::Approx;
using harness::run_cli;

namespace {

std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') out.push_back(line);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

TEST_CASE("cli: fringe table") {
    const auto r = run_cli("fringe --detuning 3.65 --bandwidth 0.253 --tau-min -1 --tau-max 1 "
                           "--tau-step 0.05");
    REQUIRE(r.exit_code == 0);
    const auto lines = data_lines(r.out);
    REQUIRE(lines.size() == 42);  // header + 41 grid points
    CHECK(lines[0] == "tau_ps,p_coincidence,p0,p1,p2");

    // emitted CSV re-enters the same values (shortest round-trip formatting)
    const BiphotonState s(angular_from_thz(3.65), angular_from_thz(0.253));
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split_csv(lines[i]);
        REQUIRE(f.size() == 5);
        const double tau = std::stod(f[0]);
        const double pc = std::stod(f[1]);
        REQUIRE(std::abs(pc - coincidence_probability(s, tau)) <= 1e-12);
    }
}

TEST_CASE("cli: fringe shows a beat note inside the coherence envelope") {
    const auto r = run_cli("fringe --detuning 3.65 --bandwidth 0.253 --tau-min -6 --tau-max 6 "
                           "--tau-step 0.01");
    REQUIRE(r.exit_code == 0);
    const auto lines = data_lines(r.out);
    REQUIRE(lines.size() == 1202);

    std::vector<double> pc;
    for (std::size_t i = 1; i < lines.size(); ++i) pc.push_back(std::stod(split_csv(lines[i])[1]));

    // several beat periods resolved within the envelope, flat wings at 1/2
    int peaks = 0;
    for (std::size_t i = 1; i + 1 < pc.size(); ++i)
        if (pc[i] > 0.55 && pc[i] > pc[i - 1] && pc[i] >= pc[i + 1]) ++peaks;
    CHECK(peaks >= 4);
    CHECK(peaks <= 8);
    CHECK(std::abs(pc.front() - 0.5) < 1e-6);
    CHECK(std::abs(pc.back() - 0.5) < 1e-6);
}

TEST_CASE("cli: degenerate detuning gives a plain dip table") {
    const auto r = run_cli("fringe --detuning 0 --bandwidth 0.253 --phase 3.14159265358979 "
                           "--tau-min -1 --tau-max 1 --tau-step 0.5");
    REQUIRE(r.exit_code == 0);
    const auto lines = data_lines(r.out);
    REQUIRE(lines.size() == 6);
    const auto center = split_csv(lines[3]);  // tau = 0
    CHECK(std::stod(center[1]) == Approx(0.0).margin(1e-6));  // dip bottom
}

TEST_CASE("cli: deterministic output across runs") {
    const std::string dir = harness::tmp_dir();

    // a scan and a counts file shared by the commands below
    std::vector<double> grid;
    for (double tau = -1.5; tau <= 1.5 + 1e-12; tau += 0.02) grid.push_back(tau);
    const BiphotonState s(angular_from_thz(3.65), angular_from_thz(0.253));
    write_scan_csv(dir + "/scan.csv",
                   simulate_fringe(s, ChannelParams(0.0, 0.85), grid, 1000, 5));
    harness::spit(dir + "/counts.txt", "0,5000,5000\n");

    const std::vector<std::string> commands = {
        "fringe --detuning 3.65 --tau-min -1 --tau-max 1 --tau-step 0.05 --simulate --events 200 "
        "--seed 7",
        "fisher --detuning 5.34 --gamma 0.4 --alpha 0.9 --tau-min 0 --tau-max 0.2 --tau-step 0.002",
        "estimate --detuning 5.34 --counts-file " + dir + "/counts.txt --tau-s 0.0468",
        "simulate --detuning 5.34 --gamma 0.4 --alpha 0.9 --tau-true 0.0608 --events 1000 "
        "--repetitions 50 --seed 3",
        "fit --scan " + dir + "/scan.csv",
        "sensor --detuning 17.1 --tau-s 0.01 --t-max 20 --t-step 1 --calibrate 0.48 "
        "--delta-tau 0.00054",
    };
    for (const auto& cmd : commands) {
        const auto a = run_cli(cmd);
        const auto b = run_cli(cmd);
        INFO(cmd);
        REQUIRE(a.exit_code == 0);
        REQUIRE(a.exit_code == b.exit_code);
        REQUIRE(a.out == b.out);
        REQUIRE_FALSE(a.out.empty());
    }
}

TEST_CASE("cli: fisher holes are empty fields") {
    const auto r = run_cli("fisher --detuning 5.34 --gamma 0 --alpha 1 --tau-min 0 --tau-max 0.01 "
                           "--tau-step 0.005");
    REQUIRE(r.exit_code == 0);
    const auto lines = data_lines(r.out);
    REQUIRE(lines.size() >= 2);
    const auto hole = split_csv(lines[1]);  // tau = 0: undefined in the ideal case
    REQUIRE(hole.size() == 3);
    CHECK(hole[0] == "0");
    CHECK(hole[1].empty());
    CHECK(hole[2].empty());
    const auto good = split_csv(lines[2]);
    CHECK_FALSE(good[1].empty());
}

TEST_CASE("cli: estimate from a counts file") {
    const std::string dir = harness::tmp_dir();
    harness::spit(dir + "/balanced.txt", "0,5000,5000\n");
    const auto r = run_cli("estimate --detuning 5.34 --gamma 0 --alpha 1 --counts-file " + dir +
                           "/balanced.txt --tau-s 0.0468");
    REQUIRE(r.exit_code == 0);
    const double quarter = std::numbers::pi / (2.0 * angular_from_thz(5.34));
    CHECK(std::stod(harness::report_value(r.out, "tau_closed_ps")) == Approx(quarter).epsilon(1e-9));
    CHECK(std::stod(harness::report_value(r.out, "tau_numeric_ps")) == Approx(quarter).margin(1e-4));
    CHECK(std::stod(harness::report_value(r.out, "qcr_bound_ps")) > 0.0);
    CHECK(harness::report_value(r.out, "status_closed") == "ok");
}

TEST_CASE("cli: estimate failure classes exit nonzero") {
    const std::string dir = harness::tmp_dir();
    harness::spit(dir + "/bunched.txt", "0,0,100\n");
    const auto r = run_cli("estimate --detuning 5.34 --gamma 0.4 --alpha 0.9 --counts-file " + dir +
                           "/bunched.txt --tau-s 0.0");
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("overflow") != std::string::npos);
}

TEST_CASE("cli: malformed inputs name the offending line") {
    const std::string dir = harness::tmp_dir();

    harness::spit(dir + "/bad_counts.txt", "1,2\n");
    const auto r1 = run_cli("estimate --counts-file " + dir + "/bad_counts.txt --tau-s 0.05");
    CHECK(r1.exit_code != 0);
    CHECK(r1.err.find("bad_counts.txt:1") != std::string::npos);

    harness::spit(dir + "/bad_scan.csv", "tau_ps,coincidences,trials\n0.0,5,10\n0.1,oops,10\n");
    const auto r2 = run_cli("fit --scan " + dir + "/bad_scan.csv");
    CHECK(r2.exit_code != 0);
    CHECK(r2.err.find("bad_scan.csv:3") != std::string::npos);
}

TEST_CASE("cli: twenty seeded estimate round trips") {
    const std::string dir = harness::tmp_dir();
    const BiphotonState s(angular_from_thz(5.34), angular_from_thz(0.253));
    const ChannelParams ch(0.4, 0.9);
    const double tau_true = 0.0608;
    const auto probs = outcome_probabilities(s, ch, tau_true);

    int within = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto counts = sample_counts(probs, 10000, repetition_seed(1000, seed));
        std::ostringstream oss;
        oss << counts.n0 << "," << counts.n1 << "," << counts.n2 << "\n";
        const std::string path = dir + "/roundtrip_counts." + std::to_string(seed);
        harness::spit(path, oss.str());
        const auto r = run_cli("estimate --detuning 5.34 --gamma 0.4 --alpha 0.9 --counts-file " +
                               path + " --tau-s 0.0608");
        REQUIRE(r.exit_code == 0);
        const double tau_hat = std::stod(harness::report_value(r.out, "tau_closed_ps"));
        const double err = std::stod(harness::report_value(r.out, "std_err_closed_ps"));
        if (std::abs(tau_hat - tau_true) <= 3.0 * err) ++within;
    }
    CHECK(within >= 19);
}

TEST_CASE("cli: single-repetition simulate reports the spread as unavailable") {
    const auto r = run_cli("simulate --detuning 5.34 --gamma 0.4 --alpha 0.9 --tau-true 0.0608 "
                           "--events 1000 --repetitions 1 --seed 4");
    REQUIRE(r.exit_code == 0);
    CHECK(harness::report_value(r.out, "empirical_std_ps") == "unavailable");
    CHECK(harness::report_value(r.out, "efficiency_ratio") == "unavailable");
    CHECK(std::isfinite(std::stod(harness::report_value(r.out, "bias_ps"))));
}

TEST_CASE("cli: fit reports detuning and bandwidth in laboratory units") {
    const std::string dir = harness::tmp_dir();
    const BiphotonState truth(angular_from_thz(3.65), angular_from_thz(0.253));
    std::vector<double> grid;
    for (double tau = -2.0; tau <= 2.0 + 1e-12; tau += 0.0125) grid.push_back(tau);
    write_scan_csv(dir + "/fit_scan.csv",
                   simulate_fringe(truth, ChannelParams(0.0, 0.85), grid, 1000, 21));

    const auto r = run_cli("fit --scan " + dir + "/fit_scan.csv");
    REQUIRE(r.exit_code == 0);
    CHECK(std::stod(harness::report_value(r.out, "delta_thz")) == Approx(3.65).epsilon(0.01));
    CHECK(std::stod(harness::report_value(r.out, "sigma_thz")) == Approx(0.253).epsilon(0.10));
    CHECK(std::stod(harness::report_value(r.out, "sigma_nm_at_810")) == Approx(0.55).epsilon(0.10));
    CHECK(std::stod(harness::report_value(r.out, "alpha")) == Approx(0.85).margin(0.05));

    // a constant scan has no fringe to fit
    harness::spit(dir + "/flat_scan.csv", [] {
        std::string text = "tau_ps,coincidences,trials\n";
        for (int i = 0; i < 30; ++i)
            text += std::to_string(0.1 * i) + ",500,1000\n";
        return text;
    }());
    const auto r2 = run_cli("fit --scan " + dir + "/flat_scan.csv");
    CHECK(r2.exit_code != 0);
    CHECK(r2.err.find("rank-deficient") != std::string::npos);
}

TEST_CASE("cli: json mirror") {
    const auto r = run_cli("fringe --detuning 3.65 --tau-min 0 --tau-max 0.2 --tau-step 0.05 --json");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["columns"].size() == 5);
    CHECK(j["rows"].size() == 5);
    CHECK(j["meta"].contains("delta_rad_ps"));

    const auto r2 = run_cli("simulate --detuning 5.34 --gamma 0.4 --alpha 0.9 --tau-true 0.0608 "
                            "--events 500 --repetitions 20 --seed 3 --json");
    REQUIRE(r2.exit_code == 0);
    const auto j2 = nlohmann::json::parse(r2.out);
    CHECK(j2["summary"].contains("efficiency_ratio"));
}

TEST_CASE("cli: config file with flag override") {
    const std::string dir = harness::tmp_dir();
    harness::spit(dir + "/run.ini",
                  "[fringe]\ndetuning=1.75\nbandwidth=0.253\ntau-min=0\ntau-max=0.1\ntau-step=0.1\n"
                  "[simulate]\ndetuning=5.34\n");
    const auto r = run_cli("--config " + dir + "/run.ini fringe");
    REQUIRE(r.exit_code == 0);
    CHECK(std::stod(harness::report_value(r.out, "delta_rad_ps")) ==
          Approx(angular_from_thz(1.75)).epsilon(1e-12));

    // command-line flags win over config values
    const auto r2 = run_cli("--config " + dir + "/run.ini fringe --detuning 5.34");
    REQUIRE(r2.exit_code == 0);
    CHECK(std::stod(harness::report_value(r2.out, "delta_rad_ps")) ==
          Approx(angular_from_thz(5.34)).epsilon(1e-12));
}

TEST_CASE("cli: sensor sweep and summary") {
    const auto r = run_cli("sensor --detuning 17.1 --bandwidth 0.253 --gamma 0.4 --alpha 0.9 "
                           "--tau-s 0.01 --t-max 30 --t-step 1 --calibrate 0.48 --delta-tau 0.00054");
    REQUIRE(r.exit_code == 0);
    const auto lines = data_lines(r.out);
    CHECK(lines[0] == "t_deg,beta_rad,p_coincidence");
    CHECK(lines.size() == 32);  // header + 31 sweep points
    CHECK(std::stod(harness::report_value(r.out, "thermal_coefficient_rad_per_deg")) ==
          Approx(0.48).epsilon(1e-9));
    CHECK(std::stod(harness::report_value(r.out, "temperature_resolution_deg")) ==
          Approx(0.12).epsilon(0.2));
    CHECK(std::stod(harness::report_value(r.out, "calibrated_length_m")) > 0.0);

    // zero-length fiber with no expansion: the whole beta column is zero
    const auto r2 = run_cli("sensor --detuning 3.7 --length-m 0 --dl-dt 0 --t-max 5 --t-step 1");
    REQUIRE(r2.exit_code == 0);
    for (const auto& line : data_lines(r2.out)) {
        if (line.rfind("t_deg", 0) == 0) continue;
        const auto f = split_csv(line);
        REQUIRE(std::stod(f[1]) == 0.0);
    }
}
