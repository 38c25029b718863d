#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "homsim/homsim.hpp"

using namespace homsim;
using Catch::Approx;

namespace {
// reference configuration: 5.34 THz detuning, 0.253 THz RMS bandwidth
const BiphotonState kRefState(angular_from_thz(5.34), angular_from_thz(0.253));
const ChannelParams kRefChannel(0.4, 0.9);
}  // namespace

TEST_CASE("multinomial sampling") {
    SECTION("deterministic outcome") {
        const auto c = sample_counts(OutcomeProbs(0.0, 0.0, 1.0), 1234, 5);
        CHECK(c.n0 == 0);
        CHECK(c.n1 == 0);
        CHECK(c.n2 == 1234);
    }

    SECTION("same seed, same counts") {
        const OutcomeProbs p(0.16, 0.498, 0.342);
        const auto a = sample_counts(p, 100000, 77);
        const auto b = sample_counts(p, 100000, 77);
        CHECK(a.n0 == b.n0);
        CHECK(a.n1 == b.n1);
        CHECK(a.n2 == b.n2);
        const auto c = sample_counts(p, 100000, 78);
        CHECK((a.n0 != c.n0 || a.n1 != c.n1 || a.n2 != c.n2));
    }

    SECTION("counts always sum to the number of events") {
        const OutcomeProbs p(0.16, 0.498, 0.342);
        for (std::uint64_t seed = 0; seed < 50; ++seed)
            CHECK(sample_counts(p, 977, seed).total() == 977);
    }

    SECTION("marginals within four binomial sigmas") {
        const OutcomeProbs p(0.16, 0.498, 0.342);
        const std::uint64_t n = 1000000;
        const auto c = sample_counts(p, n, 2024);
        const double probs[3] = {p.p0, p.p1, p.p2};
        const std::uint64_t counts[3] = {c.n0, c.n1, c.n2};
        for (int i = 0; i < 3; ++i) {
            const double sigma = std::sqrt(probs[i] * (1.0 - probs[i]) / static_cast<double>(n));
            REQUIRE(std::abs(static_cast<double>(counts[i]) / static_cast<double>(n) - probs[i]) <
                    4.0 * sigma);
        }
    }

    SECTION("repetition seeds are distinct") {
        std::set<std::uint64_t> seen;
        for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(repetition_seed(42, i));
        CHECK(seen.size() == 1000);
        CHECK(repetition_seed(42, 0) != repetition_seed(43, 0));
    }
}

TEST_CASE("precision study") {
    const auto wp = max_fisher(kRefState, kRefChannel, 0.0, 0.5);

    SECTION("estimator is efficient at the working point") {
        TrialConfig cfg;
        cfg.n_events = 10000;
        cfg.n_repetitions = 500;
        cfg.seed = 42;
        cfg.tau_true = wp.tau_star;
        const auto rep = run_precision_study(kRefState, kRefChannel, cfg, EstimateMethod::closed_form);

        CHECK(rep.failure_count == 0);
        CHECK(rep.n_used == 500);
        CHECK(rep.cr_bound == Approx(1.0 / std::sqrt(1e4 * wp.fisher_max)).epsilon(1e-12));
        CHECK(rep.qcr_bound <= rep.cr_bound * (1.0 + 1e-12));
        CHECK(rep.efficiency_ratio > 0.9);
        CHECK(rep.efficiency_ratio < 1.3);
        CHECK(std::abs(rep.bias) < 3.0 * rep.empirical_std / std::sqrt(500.0));
        CHECK(rep.empirical_std * 1.3 >= rep.cr_bound);
    }

    SECTION("ideal case saturates the quantum bound") {
        TrialConfig cfg;
        cfg.n_events = 10000;
        cfg.n_repetitions = 400;
        cfg.seed = 7;
        cfg.tau_true = 0.01;
        const auto rep =
            run_precision_study(kRefState, ChannelParams(0.0, 1.0), cfg, EstimateMethod::closed_form);
        CHECK(rep.efficiency_ratio > 0.9);
        CHECK(rep.efficiency_ratio < 1.3);
        // cr bound at this point is within a couple per mille of the qcr bound
        CHECK(rep.cr_bound == Approx(rep.qcr_bound).epsilon(5e-3));
    }

    SECTION("empirical spread scales as the inverse root of N") {
        TrialConfig cfg;
        cfg.n_repetitions = 500;
        cfg.seed = 11;
        cfg.tau_true = wp.tau_star;
        double stds[3];
        std::uint64_t events[3] = {1000, 4000, 16000};
        for (int i = 0; i < 3; ++i) {
            cfg.n_events = events[i];
            stds[i] =
                run_precision_study(kRefState, kRefChannel, cfg, EstimateMethod::closed_form)
                    .empirical_std;
        }
        CHECK(stds[0] / stds[1] == Approx(2.0).epsilon(0.15));
        CHECK(stds[1] / stds[2] == Approx(2.0).epsilon(0.15));
    }

    SECTION("numeric estimator works too") {
        TrialConfig cfg;
        cfg.n_events = 2000;
        cfg.n_repetitions = 60;
        cfg.seed = 3;
        cfg.tau_true = wp.tau_star;
        const auto rep = run_precision_study(kRefState, kRefChannel, cfg, EstimateMethod::numeric);
        CHECK(rep.n_used == 60);
        CHECK(std::abs(rep.bias) < 4.0 * rep.empirical_std / std::sqrt(60.0));
        CHECK(rep.efficiency_ratio > 0.8);
        CHECK(rep.efficiency_ratio < 1.4);
    }

    SECTION("failures are counted, not hidden") {
        // ten events per experiment: the arccos argument regularly overflows
        TrialConfig cfg;
        cfg.n_events = 10;
        cfg.n_repetitions = 200;
        cfg.seed = 1;
        cfg.tau_true = wp.tau_star;
        const auto rep = run_precision_study(kRefState, kRefChannel, cfg, EstimateMethod::closed_form);
        CHECK(rep.failure_count > 0);
        CHECK(rep.failure_count + rep.n_used == 200);
    }

    SECTION("every repetition failing is an error") {
        // with one event per experiment every outcome overflows or is empty
        TrialConfig cfg;
        cfg.n_events = 1;
        cfg.n_repetitions = 10;
        cfg.seed = 5;
        cfg.tau_true = wp.tau_star;
        CHECK_THROWS_AS(run_precision_study(kRefState, kRefChannel, cfg, EstimateMethod::closed_form),
                        std::runtime_error);
    }

    SECTION("single repetition reports no spread") {
        TrialConfig cfg;
        cfg.n_events = 10000;
        cfg.n_repetitions = 1;
        cfg.seed = 9;
        cfg.tau_true = wp.tau_star;
        const auto rep = run_precision_study(kRefState, kRefChannel, cfg, EstimateMethod::closed_form);
        CHECK(std::isnan(rep.empirical_std));
        CHECK(std::isnan(rep.efficiency_ratio));
        CHECK(std::isfinite(rep.bias));
    }

    SECTION("degenerate working point rejected") {
        TrialConfig cfg;
        cfg.tau_true = 0.0;  // Fisher vanishes at tau = 0 in the lossy case
        CHECK_THROWS_AS(run_precision_study(kRefState, kRefChannel, cfg, EstimateMethod::closed_form),
                        std::invalid_argument);
    }

    SECTION("deterministic given the seed") {
        TrialConfig cfg;
        cfg.n_events = 1000;
        cfg.n_repetitions = 50;
        cfg.seed = 17;
        cfg.tau_true = wp.tau_star;
        const auto a = run_precision_study(kRefState, kRefChannel, cfg, EstimateMethod::closed_form);
        const auto b = run_precision_study(kRefState, kRefChannel, cfg, EstimateMethod::closed_form);
        CHECK(a.mean_estimate == b.mean_estimate);
        CHECK(a.empirical_std == b.empirical_std);
        CHECK(a.failure_count == b.failure_count);
    }
}

TEST_CASE("fringe simulation") {
    SECTION("noiseless limit at zero delay") {
        const BiphotonState s(angular_from_thz(3.65), angular_from_thz(0.253));
        const auto scan = simulate_fringe(s, ChannelParams(0.0, 0.85), {0.0}, 100000000ULL, 4);
        const double y = static_cast<double>(scan.samples[0].coincidences) /
                         static_cast<double>(scan.samples[0].trials);
        CHECK(y == Approx(0.925).margin(1e-3));
    }

    SECTION("round trip through the fit recovers the detuning") {
        const BiphotonState truth(angular_from_thz(3.65), angular_from_thz(0.253));
        std::vector<double> grid;
        for (double tau = -2.0; tau <= 2.0 + 1e-12; tau += 0.0125) grid.push_back(tau);
        const auto scan = simulate_fringe(truth, ChannelParams(0.0, 0.85), grid, 1000, 2025);
        const auto fit = fit_fringe(scan);
        CHECK(fit.state.delta == Approx(truth.delta).epsilon(0.005));
    }

    SECTION("degenerate detuning gives a beat-free profile") {
        const BiphotonState dip(0.0, angular_from_thz(0.253), std::numbers::pi);
        std::vector<double> grid;
        for (double tau = -2.0; tau <= 2.0 + 1e-12; tau += 0.02) grid.push_back(tau);
        const auto scan = simulate_fringe(dip, ChannelParams(0.0, 0.8), grid, 20000, 12);
        const auto fit = fit_fringe(scan);
        CHECK(fit.reduced_model);
        CHECK(fit.state.delta == 0.0);
        CHECK(fit.state.sigma == Approx(dip.sigma).epsilon(0.05));
    }

    SECTION("deterministic per seed") {
        const std::vector<double> grid{-0.5, 0.0, 0.5};
        const auto a = simulate_fringe(kRefState, kRefChannel, grid, 1000, 31);
        const auto b = simulate_fringe(kRefState, kRefChannel, grid, 1000, 31);
        const auto c = simulate_fringe(kRefState, kRefChannel, grid, 1000, 32);
        bool same = true, differs = false;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            same = same && a.samples[i].coincidences == b.samples[i].coincidences;
            differs = differs || a.samples[i].coincidences != c.samples[i].coincidences;
        }
        CHECK(same);
        CHECK(differs);
    }

    SECTION("input validation") {
        CHECK_THROWS_AS(simulate_fringe(kRefState, kRefChannel, {}, 100, 1), std::invalid_argument);
        CHECK_THROWS_AS(simulate_fringe(kRefState, kRefChannel, {0.1, 0.1}, 100, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(simulate_fringe(kRefState, kRefChannel, {0.0, 0.1}, 0, 1),
                        std::invalid_argument);
    }
}
