#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "fracgrad/experiment.hpp"
#include "fracgrad/observability.hpp"

using namespace fracgrad;
namespace fs = std::filesystem;

namespace {

enum Exit : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kConvergence = 3,
    kSolvability = 4,
    kNonStrategic = 10,
    kInconclusive = 11,
};

struct Options {
    std::string config;
    std::string out;
    std::string measurements;
    std::string sweep_grid;
    bool verbose = false;
};

// Write to a sibling temp file then rename, so readers never see half a file.
void write_atomic(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw InputError("cannot write '" + tmp.string() + "'");
        os << text;
        if (!os) throw InputError("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

// Shortest text that reads back to the same double.
std::string num(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

fs::path out_dir(const Options& o, const RunConfig& c) { return o.out.empty() ? fs::path(c.output_dir) : fs::path(o.out); }

MeasurementRecord simulate(const RunConfig& c) {
    std::mt19937_64 rng(c.seed);
    auto sys = c.system();
    return generate_measurements(sys, c.initial_modal_state(), c.build_sensors(), c.time_grid(), c.noise_sigma, rng);
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

nlohmann::json summary_json(const RunConfig& c, const ReconstructionResult& r, bool converged) {
    nlohmann::json j;
    j["fingerprint"] = c.fingerprint();
    j["converged"] = converged;
    j["residual"] = r.residual;
    j["error_omega"] = r.error ? finite_or_null(*r.error) : nlohmann::json();
    j["condition_estimate"] = finite_or_null(r.condition_estimate);
    j["lambda_min"] = r.lambda_min;
    j["lambda_max"] = r.lambda_max;
    j["iterations"] = r.iterations;
    j["M"] = r.field.M;
    j["regularization"] = r.regularization.describe();
    nlohmann::json h = nlohmann::json::array();
    for (const auto& it : r.history)
        h.push_back({{"M", it.M}, {"regularization", it.regularization.describe()}, {"residual", it.residual}});
    j["history"] = h;
    return j;
}

void log_history(const ReconstructionResult& r) {
    for (std::size_t i = 0; i < r.history.size(); ++i)
        std::cerr << "  iteration " << i + 1 << ": M=" << r.history[i].M << ' '
                  << r.history[i].regularization.describe() << " residual=" << r.history[i].residual << '\n';
}

int cmd_simulate(const Options& o) {
    const RunConfig c = RunConfig::load(o.config);
    const auto rec = simulate(c);
    std::ostringstream os;
    rec.write_csv(os);
    const fs::path path = out_dir(o, c) / "measurements.csv";
    write_atomic(path, os.str());
    std::cout << "fingerprint " << c.fingerprint() << '\n' << "wrote " << path.string() << '\n';
    if (o.verbose) std::cerr << c.canonical();
    return kOk;
}

int cmd_reconstruct(const Options& o) {
    const RunConfig c = RunConfig::load(o.config);
    std::ifstream in(o.measurements);
    if (!in) throw InputError("cannot open measurements '" + o.measurements + "'");
    const auto rec = MeasurementRecord::read_csv(in, c.alpha);
    if (std::abs(rec.grid.horizon() - c.T) > 1e-9 * c.T)
        throw InputError("measurement horizon " + std::to_string(rec.grid.horizon()) + " does not match T = " +
                         std::to_string(c.T));
    const auto truth = c.truth_gradient();
    const fs::path dir = out_dir(o, c);

    ReconstructionResult r;
    bool converged = true;
    try {
        r = reconstruct(c.problem(), rec, truth);
    } catch (const ConvergenceError& e) {
        r = e.best();
        converged = false;
        std::cerr << "fracgrad: " << e.what() << '\n';
    }
    if (o.verbose) log_history(r);

    std::ostringstream field;
    write_field_csv(field, r.field, truth, c.dim == 1 ? 101 : 41);
    write_atomic(dir / "field.csv", field.str());
    const std::string summary = summary_json(c, r, converged).dump(2) + "\n";
    write_atomic(dir / "summary.json", summary);
    std::cout << summary;
    return converged ? kOk : kConvergence;
}

int cmd_check_strategic(const Options& o) {
    const RunConfig c = RunConfig::load(o.config);
    const auto rep = test_gradient_strategic(c.build_sensors(), c.domain(), c.M, c.strategic_tolerance, c.omega);
    std::ostringstream os;
    rep.write_csv(os);
    write_atomic(out_dir(o, c) / "strategic.csv", os.str());
    std::cout << "verdict " << to_string(rep.verdict) << '\n';
    if (!rep.offending.empty()) {
        std::cout << "offending groups";
        for (int g : rep.offending) std::cout << ' ' << g;
        std::cout << '\n';
    }
    if (c.dim > 1)
        std::cout << "kernel map singular values " << rep.surrogate_sigma_min << " .. " << rep.surrogate_sigma_max
                  << '\n';
    if (o.verbose) std::cerr << os.str();
    switch (rep.verdict) {
        case StrategicVerdict::strategic: return kOk;
        case StrategicVerdict::non_strategic: return kNonStrategic;
        case StrategicVerdict::inconclusive: return kInconclusive;
    }
    return kFailure;
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> v;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ':')) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != part.size() || part.empty()) throw InputError("--sweep-grid: expected lo:hi:step, got '" + spec + "'");
        v.push_back(x);
    }
    if (v.size() != 3 || !(v[2] > 0.0) || v[1] < v[0]) throw InputError("--sweep-grid: expected lo:hi:step with step > 0");
    std::vector<double> out;
    const long n = std::lround(std::floor((v[1] - v[0]) / v[2] + 1e-9));
    // Round to the step's decimal grid so 0.1 + 2 * 0.05 prints as 0.2.
    for (long i = 0; i <= n; ++i) out.push_back(std::round((v[0] + i * v[2]) * 1e12) / 1e12);
    return out;
}

int cmd_sweep_sensor(const Options& o) {
    const RunConfig base = RunConfig::load(o.config);
    if (base.dim != 1) throw InputError("sweep-sensor supports the unit interval only");
    const auto grid = parse_grid(o.sweep_grid);
    const bool zonal = base.sensors.front().kind == Sensor::Kind::zonal;
    const double width = zonal ? base.sensors.front().support.width(0) : 0.0;

    std::ostringstream os;
    os << "location,error,residual,lambda_min,status\n";
    for (double x : grid) {
        RunConfig c = base;
        if (zonal)
            c.sensors.front().support = Region::interval(x, x + width);
        else
            c.sensors.front().location[0] = x;
        os << num(x) << ',';
        try {
            c.validate();
            const auto rec = simulate(c);
            ReconstructionResult r;
            std::string status = "ok";
            try {
                r = reconstruct(c.problem(), rec, c.truth_gradient());
            } catch (const ConvergenceError& e) {
                r = e.best();
                status = "not_converged";
            }
            os << num(*r.error) << ',' << num(r.residual) << ',' << num(r.lambda_min) << ',' << status << '\n';
            if (o.verbose) std::cerr << "location " << x << " error " << *r.error << ' ' << status << '\n';
        } catch (const SolvabilityError& e) {
            os << "nan,nan," << num(e.lambda_min()) << ",solve_failed\n";
            if (o.verbose) std::cerr << "location " << x << " solve failed: " << e.what() << '\n';
        } catch (const InputError& e) {
            os << "nan,nan,nan,invalid\n";
            if (o.verbose) std::cerr << "location " << x << " invalid: " << e.what() << '\n';
        }
    }
    const fs::path path = out_dir(o, base) / "sweep.csv";
    write_atomic(path, os.str());
    std::cout << "fingerprint " << base.fingerprint() << '\n' << "wrote " << path.string() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regional gradient reconstruction for time-fractional diffusion"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Run configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory (overrides output_dir)");
        sub->add_flag("--verbose", o.verbose, "Extra diagnostics on stderr");
    };
    auto* sim = app.add_subcommand("simulate", "Write synthetic measurements");
    common(sim);
    auto* rec = app.add_subcommand("reconstruct", "Reconstruct the initial gradient from measurements");
    common(rec);
    rec->add_option("--measurements", o.measurements, "Measurement CSV")->required()->check(CLI::ExistingFile);
    auto* chk = app.add_subcommand("check-strategic", "Test whether the sensors are gradient strategic");
    common(chk);
    auto* sweep = app.add_subcommand("sweep-sensor", "Reconstruct over a grid of sensor positions");
    common(sweep);
    sweep->add_option("--sweep-grid", o.sweep_grid, "lo:hi:step")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*sim) return cmd_simulate(o);
        if (*rec) return cmd_reconstruct(o);
        if (*chk) return cmd_check_strategic(o);
        if (*sweep) return cmd_sweep_sensor(o);
    } catch (const SolvabilityError& e) {
        std::cerr << "fracgrad: " << e.what() << '\n';
        return kSolvability;
    } catch (const InputError& e) {
        std::cerr << "fracgrad: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "fracgrad: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}
