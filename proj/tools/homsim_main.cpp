// homsim: command-line front end for the HOM beat-note toolkit.
//
// Subcommands compute fringe and Fisher-information curves, run seeded
// Monte Carlo precision studies, estimate delays from counts, fit scan data
// and model the fiber temperature sensor. Tables are CSV with '#' metadata
// lines; --json mirrors the same content as JSON. Output is byte-identical
// across runs for a fixed seed.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "homsim/homsim.hpp"
#include "homsim/scan_io.hpp"

namespace {

constexpr const char* kVersion = "homsim 0.1.0";

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

using Cell = std::variant<std::monostate, double, std::uint64_t, std::string>;

std::string cell_text(const Cell& c) {
    if (std::holds_alternative<std::monostate>(c)) return "";
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* i = std::get_if<std::uint64_t>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

nlohmann::ordered_json cell_json(const Cell& c) {
    if (std::holds_alternative<std::monostate>(c)) return nullptr;
    if (const auto* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return nullptr;
        return *d;
    }
    if (const auto* i = std::get_if<std::uint64_t>(&c)) return *i;
    return std::get<std::string>(c);
}

// Tabular output carrier: metadata echo, columns, rows and an optional
// key/value summary block.
struct Output {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, Cell>> summary;

    void add_meta(const std::string& k, const std::string& v) { meta.emplace_back(k, v); }
    void add_meta(const std::string& k, double v) { meta.emplace_back(k, format_double(v)); }
    void add_meta(const std::string& k, std::uint64_t v) { meta.emplace_back(k, std::to_string(v)); }

    void write_csv(std::ostream& os) const {
        for (const auto& [k, v] : meta) os << "# " << k << "=" << v << "\n";
        if (!columns.empty()) {
            for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
            os << "\n";
            for (const auto& row : rows) {
                for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
                os << "\n";
            }
        }
        for (const auto& [k, v] : summary) {
            const std::string text = cell_text(v);
            if (columns.empty())
                os << k << "=" << (text.empty() ? "unavailable" : text) << "\n";
            else
                os << "# " << k << "=" << (text.empty() ? "unavailable" : text) << "\n";
        }
    }

    void write_json(std::ostream& os) const {
        nlohmann::ordered_json j;
        nlohmann::ordered_json jm = nlohmann::ordered_json::object();
        for (const auto& [k, v] : meta) jm[k] = v;
        j["meta"] = jm;
        if (!columns.empty()) {
            j["columns"] = columns;
            nlohmann::ordered_json jr = nlohmann::ordered_json::array();
            for (const auto& row : rows) {
                nlohmann::ordered_json jrow = nlohmann::ordered_json::array();
                for (const auto& c : row) jrow.push_back(cell_json(c));
                jr.push_back(jrow);
            }
            j["rows"] = jr;
        }
        if (!summary.empty()) {
            nlohmann::ordered_json js = nlohmann::ordered_json::object();
            for (const auto& [k, v] : summary) js[k] = cell_json(v);
            j["summary"] = js;
        }
        os << j.dump(2) << "\n";
    }
};

std::string resolve_output_path(const std::string& path) {
    if (path.empty() || path == "-") return path;
    if (path.front() == '/') return path;
    if (const char* dir = std::getenv("HOMSIM_OUTPUT_DIR"); dir && *dir)
        return std::string(dir) + "/" + path;
    return path;
}

void emit(const Output& out, const std::string& path, bool json) {
    const std::string resolved = resolve_output_path(path);
    if (resolved.empty() || resolved == "-") {
        json ? out.write_json(std::cout) : out.write_csv(std::cout);
        return;
    }
    std::ofstream os(resolved);
    if (!os) throw std::runtime_error(resolved + ": cannot open for writing");
    json ? out.write_json(os) : out.write_csv(os);
}

// ---- shared option groups ----------------------------------------------

struct StateOpts {
    double detuning = 3.65;   // THz ordinary unless --angular
    double bandwidth = 0.253; // THz ordinary unless --angular
    double phase = 0.0;       // rad
    bool angular = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--detuning", detuning,
                        "frequency detuning (THz ordinary; rad/ps with --angular)")
            ->capture_default_str();
        cmd->add_option("--bandwidth", bandwidth,
                        "RMS bandwidth (THz ordinary; rad/ps with --angular)")
            ->capture_default_str();
        cmd->add_option("--phase", phase, "relative phase, rad")->capture_default_str();
        cmd->add_flag("--angular", angular, "interpret --detuning/--bandwidth as rad/ps");
    }

    homsim::BiphotonState make() const {
        const double d = angular ? detuning : homsim::angular_from_thz(detuning);
        const double s = angular ? bandwidth : homsim::angular_from_thz(bandwidth);
        return homsim::BiphotonState(d, s, phase);
    }

    void echo(Output& out) const {
        const auto st = make();
        out.add_meta("delta_rad_ps", st.delta);
        out.add_meta("sigma_rad_ps", st.sigma);
        out.add_meta("phi_rad", st.phi);
    }
};

struct ChannelOpts {
    double gamma = 0.0;
    double alpha = 1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--gamma", gamma, "per-photon loss probability")->capture_default_str();
        cmd->add_option("--alpha", alpha, "interference visibility")->capture_default_str();
    }

    homsim::ChannelParams make() const { return homsim::ChannelParams(gamma, alpha); }

    void echo(Output& out) const {
        out.add_meta("gamma", gamma);
        out.add_meta("alpha", alpha);
    }
};

struct OutputOpts {
    std::string path = "-";
    bool json = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--output", path, "output file ('-' for stdout)")->capture_default_str();
        cmd->add_flag("--json", json, "emit JSON instead of CSV");
    }
};

std::vector<double> make_grid(double lo, double hi, double step) {
    if (!(step > 0.0)) throw std::runtime_error("grid: step must be > 0");
    if (!(hi >= lo)) throw std::runtime_error("grid: max must be >= min");
    std::vector<double> g;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    g.reserve(n);
    for (std::size_t i = 0; i < n; ++i) g.push_back(lo + static_cast<double>(i) * step);
    return g;
}

const char* status_name(homsim::EstimateStatus s) {
    switch (s) {
        case homsim::EstimateStatus::ok: return "ok";
        case homsim::EstimateStatus::clamped: return "clamped";
        case homsim::EstimateStatus::failed_overflow: return "overflow";
        case homsim::EstimateStatus::failed_flat: return "flat_likelihood";
        case homsim::EstimateStatus::failed_no_data: return "no_data";
    }
    return "unknown";
}

// ---- subcommands ---------------------------------------------------------

int run_fringe(const StateOpts& so, const ChannelOpts& co, const OutputOpts& oo, double tau_min,
               double tau_max, double tau_step, bool simulate, std::uint64_t events,
               std::uint64_t seed) {
    const auto state = so.make();
    const auto channel = co.make();
    const auto grid = make_grid(tau_min, tau_max, tau_step);

    Output out;
    out.add_meta("tool", kVersion);
    out.add_meta("command", "fringe");
    so.echo(out);
    co.echo(out);
    out.add_meta("tau_min_ps", tau_min);
    out.add_meta("tau_max_ps", tau_max);
    out.add_meta("tau_step_ps", tau_step);
    out.columns = {"tau_ps", "p_coincidence", "p0", "p1", "p2"};

    homsim::FringeScan sim;
    if (simulate) {
        out.add_meta("seed", seed);
        out.add_meta("events_per_point", events);
        out.columns.push_back("sim_coincidences");
        out.columns.push_back("sim_trials");
        sim = homsim::simulate_fringe(state, channel, grid, events, seed);
    }

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double tau = grid[i];
        const auto p = homsim::outcome_probabilities(state, channel, tau);
        std::vector<Cell> row{tau, homsim::coincidence_probability(state, tau), p.p0, p.p1, p.p2};
        if (simulate) {
            row.emplace_back(sim.samples[i].coincidences);
            row.emplace_back(sim.samples[i].trials);
        }
        out.rows.push_back(std::move(row));
    }
    emit(out, oo.path, oo.json);
    return 0;
}

int run_fisher(const StateOpts& so, const ChannelOpts& co, const OutputOpts& oo, double tau_min,
               double tau_max, double tau_step, std::uint64_t events, bool ideal) {
    const auto state = so.make();
    const auto channel = co.make();
    const auto grid = make_grid(tau_min, tau_max, tau_step);

    Output out;
    out.add_meta("tool", kVersion);
    out.add_meta("command", "fisher");
    so.echo(out);
    co.echo(out);
    out.add_meta("events", events);
    out.columns = {"tau_ps", "fisher_ps2", "cr_bound_ps"};
    if (ideal) {
        out.columns.push_back("fisher_ideal_ps2");
        out.columns.push_back("cr_bound_ideal_ps");
    }
    const homsim::ChannelParams ideal_channel(0.0, 1.0);

    auto append_fisher_cells = [events](std::vector<Cell>& row, std::optional<double> f) {
        if (f) {  // undefined points are holes in the table
            row.emplace_back(*f);
            if (*f > 0.0)
                row.emplace_back(homsim::cr_bound(*f, events));
            else
                row.emplace_back(std::monostate{});
        } else {
            row.emplace_back(std::monostate{});
            row.emplace_back(std::monostate{});
        }
    };

    for (double tau : grid) {
        std::vector<Cell> row{tau};
        append_fisher_cells(row, homsim::fisher_information(state, channel, tau));
        if (ideal) append_fisher_cells(row, homsim::fisher_information(state, ideal_channel, tau));
        out.rows.push_back(std::move(row));
    }
    emit(out, oo.path, oo.json);
    return 0;
}

int run_estimate(const StateOpts& so, const ChannelOpts& co, const OutputOpts& oo,
                 const std::string& counts_path, double tau_s, std::optional<double> bracket_lo,
                 std::optional<double> bracket_hi) {
    const auto state = so.make();
    const auto channel = co.make();
    const auto counts = homsim::read_counts_file(counts_path);

    // default bracket: the monotone half-period around the working point
    const double half =
        state.delta > 0.0 ? 0.45 * std::numbers::pi / state.delta : 10.0 / state.sigma;
    const double lo = bracket_lo.value_or(tau_s - half);
    const double hi = bracket_hi.value_or(tau_s + half);

    const auto closed = homsim::mle_closed_form(counts, state, channel, tau_s);
    const auto numeric = homsim::mle_numeric(counts, state, channel, lo, hi);

    Output out;
    out.add_meta("tool", kVersion);
    out.add_meta("command", "estimate");
    so.echo(out);
    co.echo(out);
    out.add_meta("counts_file", counts_path);
    out.add_meta("tau_s_ps", tau_s);
    out.add_meta("bracket_lo_ps", lo);
    out.add_meta("bracket_hi_ps", hi);

    const std::uint64_t n = counts.total();
    out.summary.emplace_back("n0", counts.n0);
    out.summary.emplace_back("n1", counts.n1);
    out.summary.emplace_back("n2", counts.n2);
    out.summary.emplace_back("status_closed", std::string(status_name(closed.status)));
    if (closed.ok()) {
        out.summary.emplace_back("tau_closed_ps", closed.tau_hat);
        out.summary.emplace_back("std_err_closed_ps", closed.std_err);
        const auto f = homsim::fisher_information(state, channel, closed.tau_hat);
        if (f) {
            out.summary.emplace_back("fisher_at_closed_ps2", *f);
            if (*f > 0.0) out.summary.emplace_back("cr_bound_ps", homsim::cr_bound(*f, n));
        }
    }
    out.summary.emplace_back("status_numeric", std::string(status_name(numeric.status)));
    if (numeric.ok()) {
        out.summary.emplace_back("tau_numeric_ps", numeric.tau_hat);
        out.summary.emplace_back("std_err_numeric_ps", numeric.std_err);
    }
    out.summary.emplace_back("qcr_bound_ps", homsim::qcr_bound(state, n));
    emit(out, oo.path, oo.json);

    if (!closed.ok() || !numeric.ok()) {
        std::cerr << "estimation failure: closed=" << status_name(closed.status)
                  << " numeric=" << status_name(numeric.status) << "\n";
        return 1;
    }
    return 0;
}

int run_simulate(const StateOpts& so, const ChannelOpts& co, const OutputOpts& oo,
                 std::uint64_t events, std::uint64_t repetitions, double tau_true,
                 const std::string& estimator, std::uint64_t seed) {
    const auto state = so.make();
    const auto channel = co.make();
    homsim::TrialConfig cfg;
    cfg.n_events = events;
    cfg.n_repetitions = repetitions;
    cfg.seed = seed;
    cfg.tau_true = tau_true;
    const auto method =
        estimator == "numeric" ? homsim::EstimateMethod::numeric : homsim::EstimateMethod::closed_form;

    const auto report = homsim::run_precision_study(state, channel, cfg, method);

    Output out;
    out.add_meta("tool", kVersion);
    out.add_meta("command", "simulate");
    so.echo(out);
    co.echo(out);
    out.add_meta("events", events);
    out.add_meta("repetitions", repetitions);
    out.add_meta("tau_true_ps", tau_true);
    out.add_meta("estimator", estimator);
    out.add_meta("seed", seed);

    out.summary.emplace_back("mean_estimate_ps", report.mean_estimate);
    if (std::isnan(report.empirical_std)) {
        out.summary.emplace_back("empirical_std_ps", std::monostate{});
        out.summary.emplace_back("efficiency_ratio", std::monostate{});
    } else {
        out.summary.emplace_back("empirical_std_ps", report.empirical_std);
        out.summary.emplace_back("efficiency_ratio", report.efficiency_ratio);
    }
    out.summary.emplace_back("bias_ps", report.bias);
    out.summary.emplace_back("cr_bound_ps", report.cr_bound);
    out.summary.emplace_back("qcr_bound_ps", report.qcr_bound);
    out.summary.emplace_back("failure_count", report.failure_count);
    out.summary.emplace_back("n_used", report.n_used);
    emit(out, oo.path, oo.json);
    return 0;
}

int run_fit(const OutputOpts& oo, const std::string& scan_path) {
    const auto scan = homsim::read_scan_csv(scan_path);
    const auto fit = homsim::fit_fringe(scan);

    Output out;
    out.add_meta("tool", kVersion);
    out.add_meta("command", "fit");
    out.add_meta("scan_file", scan_path);

    const auto bw = homsim::bandwidth_conversions(fit.state.sigma);
    out.summary.emplace_back("delta_rad_ps", fit.state.delta);
    out.summary.emplace_back("delta_thz", homsim::thz_from_angular(fit.state.delta));
    out.summary.emplace_back("delta_err_rad_ps", fit.delta_err);
    out.summary.emplace_back("sigma_rad_ps", fit.state.sigma);
    out.summary.emplace_back("sigma_thz", homsim::thz_from_angular(fit.state.sigma));
    out.summary.emplace_back("sigma_err_rad_ps", fit.sigma_err);
    out.summary.emplace_back("sigma_nm_at_810", bw.wavelength_bandwidth_nm);
    out.summary.emplace_back("coherence_time_ps", bw.coherence_time_ps);
    out.summary.emplace_back("alpha", fit.visibility);
    out.summary.emplace_back("alpha_err", fit.alpha_err);
    out.summary.emplace_back("phi_rad", fit.state.phi);
    out.summary.emplace_back("phi_err_rad", fit.phi_err);
    out.summary.emplace_back("tau0_ps", fit.tau0);
    out.summary.emplace_back("tau0_err_ps", fit.tau0_err);
    out.summary.emplace_back("weighted_rss", fit.rss);
    out.summary.emplace_back("iterations", static_cast<std::uint64_t>(fit.iterations));
    out.summary.emplace_back("reduced_model", std::string(fit.reduced_model ? "true" : "false"));
    emit(out, oo.path, oo.json);
    return 0;
}

int run_sensor(const StateOpts& so, const ChannelOpts& co, const OutputOpts& oo, double center_nm,
               std::optional<double> lambda_s, std::optional<double> lambda_i, double n_group_s,
               double n_group_i, double length_m, double dn_dt, double dl_dt, double tau_s,
               double t_min, double t_max, double t_step, std::optional<double> calibrate_coef,
               std::optional<double> delta_tau) {
    const auto state = so.make();
    const auto channel = co.make();

    double ls, li;
    if (lambda_s && lambda_i) {
        ls = *lambda_s;
        li = *lambda_i;
    } else {
        std::tie(ls, li) = homsim::wavelengths_from_detuning(center_nm, state.delta);
    }

    homsim::FiberModel fiber(ls, li, n_group_s, n_group_i, length_m, dn_dt, dl_dt);
    if (calibrate_coef) {
        const double l0 = homsim::calibrate_length(*calibrate_coef, fiber);
        fiber = homsim::FiberModel(ls, li, n_group_s, n_group_i, l0, dn_dt, dl_dt);
    }

    Output out;
    out.add_meta("tool", kVersion);
    out.add_meta("command", "sensor");
    so.echo(out);
    co.echo(out);
    out.add_meta("lambda_s_nm", ls);
    out.add_meta("lambda_i_nm", li);
    out.add_meta("n_group_s", n_group_s);
    out.add_meta("n_group_i", n_group_i);
    out.add_meta("length_m", fiber.length_m);
    out.add_meta("dn_dt", dn_dt);
    out.add_meta("dl_dt", dl_dt);
    out.add_meta("tau_s_ps", tau_s);

    out.columns = {"t_deg", "beta_rad", "p_coincidence"};
    for (double t : make_grid(t_min, t_max, t_step)) {
        const double beta = homsim::phase_shift(fiber, t);
        const auto p = homsim::coincidence_vs_temperature(fiber, state, channel, tau_s, t);
        out.rows.push_back({t, beta, p.p2});
    }

    const double coef = homsim::thermal_coefficient(fiber);
    out.summary.emplace_back("thermal_coefficient_rad_per_deg", coef);
    if (calibrate_coef) out.summary.emplace_back("calibrated_length_m", fiber.length_m);
    if (delta_tau)
        out.summary.emplace_back("temperature_resolution_deg",
                                 homsim::temperature_resolution(coef, state, *delta_tau));
    emit(out, oo.path, oo.json);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HOM interferometry on a biphoton beat note: simulation and estimation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "",
                   "config file with one [section] per subcommand; flags win over file values");

    StateOpts so_fringe, so_fisher, so_estimate, so_simulate, so_sensor;
    ChannelOpts co_fringe, co_fisher, co_estimate, co_simulate, co_sensor;
    OutputOpts oo_fringe, oo_fisher, oo_estimate, oo_simulate, oo_fit, oo_sensor;

    // fringe
    auto* fringe = app.add_subcommand("fringe", "coincidence and outcome probabilities vs delay");
    so_fringe.attach(fringe);
    co_fringe.attach(fringe);
    oo_fringe.attach(fringe);
    double fr_tau_min = -6.0, fr_tau_max = 6.0, fr_tau_step = 0.01;
    bool fr_simulate = false;
    std::uint64_t fr_events = 1000, fr_seed = 1;
    fringe->add_option("--tau-min", fr_tau_min, "grid start, ps")->capture_default_str();
    fringe->add_option("--tau-max", fr_tau_max, "grid end, ps")->capture_default_str();
    fringe->add_option("--tau-step", fr_tau_step, "grid step, ps")->capture_default_str();
    fringe->add_flag("--simulate", fr_simulate, "add sampled counts per grid point");
    fringe->add_option("--events", fr_events, "post-selected pairs per point for --simulate")
        ->capture_default_str();
    fringe->add_option("--seed", fr_seed, "RNG seed for --simulate")->capture_default_str();

    // fisher
    auto* fisher = app.add_subcommand("fisher", "Fisher information and CR bound vs delay");
    so_fisher.attach(fisher);
    co_fisher.attach(fisher);
    oo_fisher.attach(fisher);
    double fi_tau_min = 0.0, fi_tau_max = 1.0, fi_tau_step = 0.001;
    std::uint64_t fi_events = 10000;
    bool fi_ideal = false;
    fisher->add_option("--tau-min", fi_tau_min, "grid start, ps")->capture_default_str();
    fisher->add_option("--tau-max", fi_tau_max, "grid end, ps")->capture_default_str();
    fisher->add_option("--tau-step", fi_tau_step, "grid step, ps")->capture_default_str();
    fisher->add_option("--events", fi_events, "trials N for the CR bound")->capture_default_str();
    fisher->add_flag("--ideal", fi_ideal, "add ideal-case (gamma=0, alpha=1) overlay columns");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "maximum-likelihood delay estimate from counts");
    so_estimate.attach(estimate);
    co_estimate.attach(estimate);
    oo_estimate.attach(estimate);
    std::string es_counts;
    double es_tau_s = 0.0;
    std::optional<double> es_lo, es_hi;
    estimate->add_option("--counts-file", es_counts, "counts file: single line 'n0,n1,n2'")
        ->required();
    estimate->add_option("--tau-s", es_tau_s, "coarse working point, ps")->required();
    estimate->add_option("--bracket-lo", es_lo, "numeric-MLE bracket start, ps");
    estimate->add_option("--bracket-hi", es_hi, "numeric-MLE bracket end, ps");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "seeded Monte Carlo precision study");
    so_simulate.attach(simulate);
    co_simulate.attach(simulate);
    oo_simulate.attach(simulate);
    std::uint64_t si_events = 10000, si_reps = 500, si_seed = 1;
    double si_tau_true = 0.05;
    std::string si_estimator = "closed";
    simulate->add_option("--events", si_events, "photon pairs per experiment")->capture_default_str();
    simulate->add_option("--repetitions", si_reps, "independent experiments")->capture_default_str();
    simulate->add_option("--tau-true", si_tau_true, "true delay, ps")->capture_default_str();
    simulate->add_option("--estimator", si_estimator, "estimator: closed | numeric")
        ->check(CLI::IsMember({"closed", "numeric"}))
        ->capture_default_str();
    simulate->add_option("--seed", si_seed, "master RNG seed")->capture_default_str();

    // fit
    auto* fit = app.add_subcommand("fit", "fit a fringe scan CSV to the interference model");
    oo_fit.attach(fit);
    std::string ft_scan;
    fit->add_option("--scan", ft_scan, "scan CSV: tau_ps,coincidences,trials")->required();

    // sensor
    auto* sensor = app.add_subcommand("sensor", "fiber temperature sensor sweep");
    so_sensor.attach(sensor);
    co_sensor.attach(sensor);
    oo_sensor.attach(sensor);
    double sn_center = 810.0;
    std::optional<double> sn_ls, sn_li;
    double sn_ngs = 1.45, sn_ngi = 1.45, sn_length = 0.1, sn_dn = 1e-5, sn_dl = 4.8e-7;
    double sn_tau_s = 0.0, sn_tmin = 0.0, sn_tmax = 50.0, sn_tstep = 0.5;
    std::optional<double> sn_calibrate, sn_dtau;
    sensor->add_option("--center-nm", sn_center, "pair center wavelength, nm")->capture_default_str();
    sensor->add_option("--lambda-s-nm", sn_ls, "signal wavelength, nm (overrides --center-nm)");
    sensor->add_option("--lambda-i-nm", sn_li, "idler wavelength, nm (overrides --center-nm)");
    sensor->add_option("--n-group-s", sn_ngs, "signal group index")->capture_default_str();
    sensor->add_option("--n-group-i", sn_ngi, "idler group index")->capture_default_str();
    sensor->add_option("--length-m", sn_length, "fiber length, m")->capture_default_str();
    sensor->add_option("--dn-dt", sn_dn, "d(group index)/dT, 1/deg")->capture_default_str();
    sensor->add_option("--dl-dt", sn_dl, "d(length)/dT, m/deg")->capture_default_str();
    sensor->add_option("--tau-s", sn_tau_s, "interferometer working point, ps")->capture_default_str();
    sensor->add_option("--t-min", sn_tmin, "sweep start, deg")->capture_default_str();
    sensor->add_option("--t-max", sn_tmax, "sweep end, deg")->capture_default_str();
    sensor->add_option("--t-step", sn_tstep, "sweep step, deg")->capture_default_str();
    sensor->add_option("--calibrate", sn_calibrate,
                       "measured thermal coefficient, rad/deg: back out the fiber length");
    sensor->add_option("--delta-tau", sn_dtau, "delay precision, ps: print temperature resolution");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fringe->parsed())
            return run_fringe(so_fringe, co_fringe, oo_fringe, fr_tau_min, fr_tau_max, fr_tau_step,
                              fr_simulate, fr_events, fr_seed);
        if (fisher->parsed())
            return run_fisher(so_fisher, co_fisher, oo_fisher, fi_tau_min, fi_tau_max, fi_tau_step,
                              fi_events, fi_ideal);
        if (estimate->parsed())
            return run_estimate(so_estimate, co_estimate, oo_estimate, es_counts, es_tau_s, es_lo,
                                es_hi);
        if (simulate->parsed())
            return run_simulate(so_simulate, co_simulate, oo_simulate, si_events, si_reps,
                                si_tau_true, si_estimator, si_seed);
        if (fit->parsed()) return run_fit(oo_fit, ft_scan);
        if (sensor->parsed())
            return run_sensor(so_sensor, co_sensor, oo_sensor, sn_center, sn_ls, sn_li, sn_ngs,
                              sn_ngi, sn_length, sn_dn, sn_dl, sn_tau_s, sn_tmin, sn_tmax, sn_tstep,
                              sn_calibrate, sn_dtau);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
