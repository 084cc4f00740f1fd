#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "themeflow/balance.hpp"
#include "themeflow/errors.hpp"
#include "themeflow/fitting.hpp"
#include "themeflow/json_io.hpp"
#include "themeflow/model.hpp"
#include "themeflow/ode.hpp"
#include "themeflow/series.hpp"

namespace themeflow::cli {
namespace {

namespace fs = std::filesystem;

struct Range {
    double t0;
    double t1;
    double dt;
};

Range parse_range(const std::string& text) {
    std::istringstream in(text);
    Range r{};
    char c1 = 0;
    char c2 = 0;
    if (!(in >> r.t0 >> c1 >> r.t1 >> c2 >> r.dt) || c1 != ':' || c2 != ':' || !in.eof()) {
        throw InvalidParams("--range must look like t0:t1:dt, got '" + text + "'");
    }
    if (!(r.t0 > 0.0)) {
        throw OutOfWindow("--range must start at t0 > 0: the flow is defined for t > 0 only");
    }
    if (!(r.t1 >= r.t0) || !(r.dt > 0.0)) throw InvalidParams("--range needs t0 <= t1 and dt > 0");
    return r;
}

std::shared_ptr<spdlog::logger> make_logger() {
    auto logger = spdlog::get("themeflow");
    if (!logger) logger = spdlog::stderr_color_mt("themeflow");
    const char* env = std::getenv("THEMEFLOW_LOG");
    logger->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return logger;
}

int cmd_eval(const fs::path& params_path, const std::optional<std::string>& range_text,
             const std::string& method, const fs::path& out_path, std::ostream& out,
             spdlog::logger& log) {
    const TopicParams params = read_json(params_path).get<TopicParams>();
    const FlowCurve curve(params);
    const double lambda = params.duration;
    const Range range = range_text ? parse_range(*range_text) : Range{lambda / 100, 3 * lambda, lambda / 100};
    log.info("evaluating over [{}, {}] step {}", range.t0, range.t1, range.dt);

    PlotTable table = curve_table(curve, range.t0, range.t1, range.dt);
    export_plot_data(table, out_path, markers_of(curve));

    const auto& values = table.columns.front();
    const auto crest = std::max_element(values.begin(), values.end()) - values.begin();
    out << "crest t=" << table.times[static_cast<std::size_t>(crest)]
        << " value=" << values[static_cast<std::size_t>(crest)] << '\n';
    out << "wrote " << out_path.string() << " and " << markers_path_for(out_path).string() << '\n';

    if (method == "rk4") {
        const IntegratorConfig cfg{lambda / 2000.0, Method::rk4};
        const double horizon = std::max(range.t1, lambda * (1.0 + 1e-6));
        const Trajectory traj = integrate_flow(params, cfg, horizon);
        double worst = 0.0;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const double t = traj.times[i];
            const double exact = t <= params.lateness ? params.initial_density : curve(t);
            worst = std::max(worst, std::abs(traj.values[i] - exact) / exact);
        }
        const fs::path rk4_path = out_path.string() + ".rk4.csv";
        write_trajectory_csv(traj, rk4_path);
        out.precision(6);
        out << "rk4 max relative deviation from closed form: " << worst << '\n';
        out << "wrote " << rk4_path.string() << '\n';
    }
    return kOk;
}

int cmd_gen(const fs::path& spec_path, std::optional<std::uint64_t> seed, const fs::path& out_path,
            std::ostream& out, spdlog::logger& log) {
    GeneratorSpec spec = read_json(spec_path).get<GeneratorSpec>();
    if (seed) spec.seed = *seed;
    log.info("generating with seed {}", spec.seed);
    const TimeSeries series = generate(spec);
    write_series(series, out_path);
    out << "wrote " << series.size() << " samples to " << out_path.string() << '\n';
    return kOk;
}

int cmd_fit(const fs::path& in_path, const fs::path& out_path, std::ostream& out,
            std::ostream& err, spdlog::logger& log) {
    const TimeSeries series = read_series(in_path);
    const FitResult result = fit(series);
    log.info("fit used {} objective evaluations", result.iterations);
    if (result.status == FitStatus::degenerate) {
        err << "error: all counts are equal; the series carries no thematic signal and the "
               "six-parameter fit is underdetermined\n";
        return kInputError;
    }

    Json report = result;
    Json phases = Json::array();
    if (result.converged) {
        for (const auto& seg : classify_phases(series, result)) {
            if (seg.empty()) continue;
            phases.push_back({{"phase", to_string(seg.label)},
                              {"t_begin", series.times[seg.begin]},
                              {"t_end", series.times[seg.end - 1]},
                              {"samples", seg.end - seg.begin}});
        }
    } else {
        log.warn("fit did not converge; phases not reported");
    }
    report["phases"] = phases;
    write_json(report, out_path);

    const FlowCurve fitted(result.params);
    const fs::path overlay_path = out_path.string() + ".overlay.csv";
    export_plot_data(overlay_table(series, fitted), overlay_path, markers_of(fitted));

    out.precision(17);
    out << "params " << Json(result.params).dump() << '\n';
    out << "residual_rms " << result.residual_rms << '\n';
    out << "converged " << (result.converged ? "true" : "false") << '\n';
    for (const auto& p : phases) {
        out << "phase " << p["phase"].get<std::string>() << " [" << p["t_begin"].get<double>()
            << ", " << p["t_end"].get<double>() << "]\n";
    }
    out << "wrote " << out_path.string() << " and " << overlay_path.string() << '\n';
    return kOk;
}

int cmd_balance(const fs::path& scenario_path, const fs::path& out_path, std::ostream& out,
                spdlog::logger& log) {
    const BalanceScenario scenario = read_json(scenario_path).get<BalanceScenario>();
    scenario.validate();
    for (const auto& w : scenario.warnings()) log.warn("{}", w);
    const BalanceTrace trace = simulate(scenario);
    write_trace_csv(trace, out_path);

    out.precision(17);
    out << "balance_integral_error " << balance_integral(trace) << '\n';
    std::size_t flagged = 0;
    for (std::size_t k = 0; k < trace.times.size();) {
        if (!trace.contention[k]) {
            ++k;
            continue;
        }
        const std::size_t begin = k;
        while (k < trace.times.size() && trace.contention[k]) ++k;
        flagged += k - begin;
        out << "contention [" << trace.times[begin] << ", " << trace.times[k - 1] << "]\n";
    }
    out << "contention_steps " << flagged << '\n';
    out << "wrote " << out_path.string() << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Thematic publication flow model: evaluate, generate, fit, balance"};
    app.require_subcommand(1);

    std::string params_path;
    std::string in_path;
    std::string out_path;
    std::string method = "closed";
    std::optional<std::string> range;
    std::optional<std::uint64_t> seed;

    auto* eval = app.add_subcommand("eval", "Evaluate the composite curve and write plot data");
    eval->add_option("--params", params_path, "TopicParams JSON")->required();
    eval->add_option("--range", range, "t0:t1:dt (default lambda/100 : 3 lambda : lambda/100)");
    eval->add_option("--method", method, "closed or rk4")->check(CLI::IsMember({"closed", "rk4"}));
    eval->add_option("--out", out_path, "output CSV")->default_val("curve.csv");

    auto* gen = app.add_subcommand("gen", "Generate a synthetic series");
    gen->add_option("--params", params_path, "GeneratorSpec JSON")->required();
    gen->add_option("--seed", seed, "override the spec seed");
    gen->add_option("--out", out_path, "output CSV")->default_val("series.csv");

    auto* fitcmd = app.add_subcommand("fit", "Fit the model to an observed series");
    fitcmd->add_option("--in", in_path, "time,count CSV")->required();
    fitcmd->add_option("--out", out_path, "FitResult JSON")->default_val("fit.json");

    auto* balance = app.add_subcommand("balance", "Run a multi-topic balance scenario");
    auto* scenario_in = balance->add_option("--in", in_path, "BalanceScenario JSON");
    balance->add_option("--params", params_path, "alias of --in")->excludes(scenario_in);
    balance->add_option("--out", out_path, "output CSV")->default_val("trace.csv");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    auto log = make_logger();
    try {
        if (*eval) return cmd_eval(params_path, range, method, out_path, out, *log);
        if (*gen) return cmd_gen(params_path, seed, out_path, out, *log);
        if (*fitcmd) return cmd_fit(in_path, out_path, out, err, *log);
        if (*balance) {
            const std::string& scenario = in_path.empty() ? params_path : in_path;
            if (scenario.empty()) throw InvalidParams("balance needs --in <scenario.json>");
            return cmd_balance(scenario, out_path, out, *log);
        }
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON input: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}

}  // namespace themeflow::cli
