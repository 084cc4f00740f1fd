// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "support.hpp"
#include "themeflow/balance.hpp"
#include "themeflow/fitting.hpp"
#include "themeflow/json_io.hpp"
#include "themeflow/model.hpp"
#include "themeflow/ode.hpp"
#include "themeflow/series.hpp"

using namespace themeflow;
using themeflow::test::ParamGen;
using themeflow::test::rel_err;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string fixture(const std::string& name) { return std::string(THEMEFLOW_FIXTURES) + "/" + name; }

double after(double t) { return std::nextafter(t, std::numeric_limits<double>::infinity()); }

template <class F>
double crossing(F f, double lo, double hi, double level) {
    const bool increasing = f(hi) > f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) < level) == increasing) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Verdict oracle_agreement() {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    ParamGen gen(1001);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const TopicParams p = gen();
        const FlowCurve curve(p);
        const Trajectory traj =
            integrate_flow(p, {p.duration / 2000, Method::rk4}, p.duration + 20.0 / p.background_rate);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double t = traj.times[k];
            const double exact = t <= p.lateness ? p.initial_density : curve(t);
            worst = std::max(worst, rel_err(traj.values[k], exact));
        }
    }
    const double elapsed = seconds_since(start);
    v.require(worst < 1e-6, "max relative error " + fmt(worst));
    v.require(elapsed < 10.0, "runtime " + fmt(elapsed) + " s");
    if (v.pass) v.detail = "max rel err " + fmt(worst) + ", " + fmt(elapsed) + " s";
    return v;
}

Verdict saturation_law() {
    Verdict v;
    ParamGen gen(1002);
    double worst = 0.0;
    for (int set = 0; set < 20; ++set) {
        TopicParams base = gen();
        const double us = (base.background_rate + base.intensity) /
                          (base.background_rate * base.inverse_level);
        for (int i = 0; i < 50; ++i) {
            TopicParams p = base;
            p.initial_density = us * gen.log_uniform(1e-3, 10.0);
            p.lateness = gen.uniform(0.0, 50.0);
            p.duration = p.lateness + 30.0 / (p.background_rate + p.intensity);
            worst = std::max(worst, rel_err(eval_u(p, p.duration), us));
        }
    }
    v.require(worst <= 1e-9, "max relative error " + fmt(worst));
    if (v.pass) v.detail = "max rel err " + fmt(worst) + " over 1000 (n0, tau) draws";
    return v;
}

Verdict felling_continuity() {
    Verdict v;
    ParamGen gen(1003);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const TopicParams p = gen();
        const double u = eval_u(p, p.duration);
        worst = std::max(worst, std::abs(u - eval_v(p, after(p.duration))) / u);
    }
    v.require(worst <= 1e-12, "max |u - v| / u " + fmt(worst));
    if (v.pass) v.detail = "max |u-v|/u " + fmt(worst);
    return v;
}

Verdict inflection() {
    Verdict v;
    ParamGen gen(1004);
    double worst = 0.0;
    int located = 0;
    for (int i = 0; i < 500; ++i) {
        const TopicParams p = gen();
        const double us = saturation_level(p);
        const double t_inf = inflection_time(p);
        if (t_inf > 0.0 && t_inf <= p.duration) {
            worst = std::max(worst, rel_err(eval_u(p, t_inf), us / 2));
        }
        const double h = (p.duration - p.lateness) / 1000.0;
        if (!(t_inf > p.lateness + 2 * h && t_inf < p.duration - 2 * h)) continue;
        // First sign change of the second difference, from convex to concave.
        double change = std::nan("");
        for (int k = 1; k < 1000; ++k) {
            const double t = p.lateness + k * h;
            const double d2 = eval_u(p, t + h) - 2 * eval_u(p, t) + eval_u(p, t - h);
            if (d2 < 0.0) {
                change = t;
                break;
            }
        }
        v.require(std::abs(change - t_inf) <= h,
                  "second difference changes sign at " + fmt(change) + ", t_inf " + fmt(t_inf));
        ++located;
    }
    v.require(worst <= 1e-10, "u(t_inf) vs u_s/2 " + fmt(worst));
    v.require(located > 100, "too few parameter sets with an interior inflection");
    if (v.pass) v.detail = "midpoint err " + fmt(worst) + ", sign change located in " + std::to_string(located) + " sets";
    return v;
}

Verdict early_exponential() {
    constexpr double kThreshold = 0.05;
    Verdict v;
    ParamGen gen(1005);
    double worst = 0.0;
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        const TopicParams p = gen();
        const double rate = p.background_rate + p.intensity;
        const double t_inf = inflection_time(p);
        if (!(t_inf > p.lateness)) continue;
        const double stop = std::min(t_inf, p.duration);
        double previous = 0.0;
        for (int k = 0; k <= 400; ++k) {
            const double t = std::min(stop, p.lateness + (stop - p.lateness) * k / 400.0);
            if (!(t > 0.0)) continue;
            const double dev = rel_err(exponential_regime_approx(p, t), eval_u(p, t));
            v.require(dev >= previous, "deviation not monotone toward t_inf");
            previous = dev;
            if (t <= t_inf - 3.0 / rate) worst = std::max(worst, dev);
        }
        ++checked;
    }
    v.require(worst < kThreshold, "deviation " + fmt(worst) + " in the early window");
    if (v.pass) v.detail = "max early deviation " + fmt(worst) + " < " + fmt(kThreshold) + " over " + std::to_string(checked) + " sets";
    return v;
}

Verdict decay_asymptote() {
    Verdict v;
    ParamGen gen(1006);
    double far = 0.0;
    double agree = 0.0;
    for (int i = 0; i < 500; ++i) {
        TopicParams p = gen();
        far = std::max(far, rel_err(eval_v(p, p.duration + 20.0 / p.background_rate), 1.0 / p.inverse_level));
        p.initial_density = saturation_level(p);
        for (int k = 1; k <= 40; ++k) {
            const double t = p.duration + k * 0.25 / p.background_rate;
            agree = std::max(agree, rel_err(eval_v(p, t), eval_v_saturated(p, t)));
        }
    }
    v.require(far < 1e-6, "v(lambda + 20/p) vs 1/q " + fmt(far));
    v.require(agree <= 1e-12, "saturated forms disagree by " + fmt(agree));
    if (v.pass) v.detail = "asymptote err " + fmt(far) + ", saturated agreement " + fmt(agree);
    return v;
}

Verdict crest_shape() {
    Verdict v;
    ParamGen gen(1007);
    int crests = 0;
    int asymmetric = 0;
    for (int i = 0; i < 400 && crests < 150; ++i) {
        const TopicParams p = gen();
        const FlowCurve curve(p);
        const auto t_inf = curve.inflection();
        if (!(p.intensity > 0.0 && t_inf && *t_inf < p.duration)) continue;
        // A crest needs the topic to end above the level the background returns to.
        if (!(curve.boundary_value() > curve.background_level())) continue;
        ++crests;

        const double end = p.duration + 30.0 / p.background_rate;
        const int n = 4000;
        std::vector<double> times;
        for (int k = 1; k < n; ++k) times.push_back(p.duration * k / n);
        times.push_back(p.duration);
        for (int k = 1; k <= n; ++k) times.push_back(p.duration + (end - p.duration) * k / n);
        // Unimodal up to rounding: nondecreasing through lambda, nonincreasing after,
        // with the global maximum at lambda.
        constexpr double kRound = 8 * std::numeric_limits<double>::epsilon();
        std::size_t peak = 0;
        bool unimodal = true;
        for (std::size_t k = 1; k < times.size(); ++k) {
            const double a = curve(times[k - 1]);
            const double b = curve(times[k]);
            const double slack = kRound * std::max(a, b);
            if (times[k] <= p.duration) unimodal = unimodal && b >= a - slack;
            else unimodal = unimodal && b <= a + slack;
            if (b >= curve(times[peak])) peak = k;
        }
        const double where = times[peak];
        v.require(unimodal, "curve is not monotone on both sides of lambda");
        v.require(where == p.duration, "maximum at " + fmt(where) + ", lambda " + fmt(p.duration));
        v.require(curve(where) == curve.boundary_value(), "crest value differs from u(lambda)");
        v.require(curve(times[peak + 1]) < curve(where), "no drop after lambda");

        const double us = curve.saturation();
        const double vs = curve.background_level();
        const double lo = vs + 0.05 * (us - vs);
        const double hi = us - 0.05 * (us - vs);
        if (p.initial_density < lo && curve.boundary_value() > hi) {
            const double rise = crossing(curve, p.lateness, p.duration, hi) -
                                crossing(curve, p.lateness, p.duration, lo);
            const double decay = crossing(curve, after(p.duration), end, lo) -
                                 crossing(curve, after(p.duration), end, hi);
            v.require(rel_err(rise, decay) > 1e-3, "rise and decay durations match");
            ++asymmetric;
        }
    }
    v.require(crests >= 100 && asymmetric >= 50, "too few crest-shaped parameter sets");
    if (v.pass) v.detail = std::to_string(crests) + " crests, " + std::to_string(asymmetric) + " asymmetric";
    return v;
}

TimeSeries synth(const TopicParams& p, NoiseKind noise, std::uint64_t seed) {
    GeneratorSpec spec;
    spec.params = p;
    spec.sample_interval = 0.25;
    spec.horizon = 50;
    spec.noise = noise;
    spec.seed = seed;
    return generate(spec);
}

Verdict fit_round_trip() {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    const TopicParams truth{0.5, 1.0, 0.02, 20, 2, 5};
    const TimeSeries clean = synth(truth, NoiseKind::none, 0);
    v.require(clean.size() == 200, "series has " + std::to_string(clean.size()) + " samples");
    const FitResult r = fit(clean);
    const double errs[] = {rel_err(r.params.background_rate, truth.background_rate),
                           rel_err(r.params.intensity, truth.intensity),
                           rel_err(r.params.inverse_level, truth.inverse_level),
                           rel_err(r.params.duration, truth.duration),
                           rel_err(r.params.lateness, truth.lateness),
                           rel_err(r.params.initial_density, truth.initial_density)};
    const double param_err = *std::max_element(std::begin(errs), std::end(errs));
    v.require(param_err < 0.01, "noise-free parameter error " + fmt(param_err));

    const double us = saturation_level(truth);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const FitResult noisy = fit(synth(truth, NoiseKind::poisson, seed));
        worst = std::max(worst, rel_err(saturation_level(noisy.params), us));
    }
    const double elapsed = seconds_since(start);
    v.require(worst < 0.10, "poisson u_s error " + fmt(worst));
    v.require(elapsed < 60.0, "runtime " + fmt(elapsed) + " s");
    if (v.pass) {
        v.detail = "param err " + fmt(param_err) + ", worst poisson u_s err " + fmt(worst) + ", " +
                   fmt(elapsed) + " s";
    }
    return v;
}

Verdict model_comparison() {
    Verdict v;
    std::string summary;
    auto compare = [&](const std::string& name, const TimeSeries& series) {
        double logistic = NAN;
        double malthus = NAN;
        for (const auto& s : compare_models(series)) (s.name == "logistic" ? logistic : malthus) = s.residual_rms;
        v.require(logistic < malthus, name + ": logistic " + fmt(logistic) + " vs malthus " + fmt(malthus));
        summary += (summary.empty() ? "" : ", ") + name + " " + fmt(logistic) + "<" + fmt(malthus);
    };
    for (const char* name : {"surge_then_fall.csv", "surge_then_settle.csv", "roundtrip.csv"}) {
        compare(name, read_series(fixture(name)));
    }
    compare("poisson", synth({0.5, 1.0, 0.02, 20, 2, 5}, NoiseKind::poisson, 77));
    if (v.pass) v.detail = summary;
    return v;
}

Verdict balance_conservation() {
    Verdict v;
    std::vector<BalanceScenario> scenarios{read_json(fixture("overlap.json")).get<BalanceScenario>()};
    ParamGen gen(1010);
    for (int i = 0; i < 50; ++i) {
        BalanceScenario s;
        s.capacity = gen.log_uniform(1.0, 1e5);
        s.horizon = gen.uniform(10, 150);
        s.step = gen.uniform(0.01, 2.0);
        for (int j = 0; j < i % 7; ++j) {
            TopicParams p = gen();
            const double level = gen.uniform(0.05, 0.9) * s.capacity;
            p.inverse_level = (p.background_rate + p.intensity) / (p.background_rate * level);
            p.initial_density = saturation_level(p) * gen.log_uniform(1e-3, 0.9);
            s.topics.push_back({gen.uniform(0, s.horizon), p});
        }
        scenarios.push_back(s);
    }
    double worst_integral = 0.0;
    std::size_t steps = 0;
    std::size_t contended = 0;
    for (const auto& s : scenarios) {
        const BalanceTrace trace = simulate(s);
        for (std::size_t k = 0; k < trace.times.size(); ++k) {
            v.require(step_total(trace, k) == s.capacity, "pointwise balance broken");
            v.require(trace.background[k] >= 0.0, "negative background");
            for (const auto& row : trace.per_topic) v.require(row[k] >= 0.0, "negative topic flow");
            contended += trace.contention[k];
        }
        steps += trace.times.size();
        worst_integral = std::max(worst_integral, std::abs(balance_integral(trace)));
    }
    const BalanceTrace overlap = simulate(scenarios.front());
    v.require(std::count(overlap.contention.begin(), overlap.contention.end(), true) > 0,
              "overlap fixture shows no contention");
    v.require(worst_integral <= 1e-12, "integral error " + fmt(worst_integral));
    if (v.pass) {
        v.detail = std::to_string(steps) + " steps exact (" + std::to_string(contended) +
                   " contended), max integral err " + fmt(worst_integral);
    }
    return v;
}

Verdict determinism() {
    Verdict v;
    themeflow::test::TempDir dir("acceptance");
    auto cli = [&](std::vector<std::string> args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = themeflow::cli::run(args, out, err);
        v.require(code == 0, "command failed: " + err.str());
    };
    for (int run = 0; run < 2; ++run) {
        const std::string tag = std::to_string(run);
        cli({"gen", "--params", fixture("gen_poisson.json"), "--out", (dir / ("gen" + tag + ".csv")).string()});
        cli({"fit", "--in", (dir / ("gen" + tag + ".csv")).string(), "--out", (dir / ("fit" + tag + ".json")).string()});
    }
    using themeflow::test::slurp;
    v.require(slurp(dir / "gen0.csv") == slurp(dir / "gen1.csv"), "gen output differs");
    v.require(slurp(dir / "fit0.json") == slurp(dir / "fit1.json"), "fit report differs");
    v.require(slurp(dir / "fit0.json.overlay.csv") == slurp(dir / "fit1.json.overlay.csv"), "overlay differs");
    v.require(!slurp(dir / "fit0.json").empty(), "empty fit report");
    if (v.pass) v.detail = "gen CSV, fit JSON and overlay byte-identical";
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"closed-form and rk4 agree on 100 random parameter sets", oracle_agreement},
        {"saturation level depends only on p, D, q", saturation_law},
        {"rise and decay meet continuously at lambda", felling_continuity},
        {"inflection at half saturation", inflection},
        {"early exponential regime", early_exponential},
        {"decay approaches the background level", decay_asymptote},
        {"single asymmetric crest at lambda", crest_shape},
        {"fit round trip", fit_round_trip},
        {"logistic flow beats exponential growth on crests", model_comparison},
        {"balance conservation", balance_conservation},
        {"gen and fit are deterministic", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict verdict;
        try {
            verdict = criteria[i].second();
        } catch (const std::exception& e) {
            verdict = {false, std::string("exception: ") + e.what()};
        }
        failures += !verdict.pass;
        std::printf("%s %2zu %s: %s\n", verdict.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    verdict.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
