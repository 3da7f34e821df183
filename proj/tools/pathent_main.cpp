// pathent: entropy analysis of compartmental systems in equilibrium.
//
// Subcommands: validate, analyze, simulate, sweep, maxent, identify.
// Exit codes: 0 success, 1 domain failure, 2 usage or parse failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pathent/pathent.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

int default_workers() {
    if (const char* env = std::getenv("PATHENT_WORKERS")) {
        const int value = std::atoi(env);
        if (value >= 1) return value;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw pathent::Error(pathent::ErrorCode::ParseFailure, "cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw pathent::Error(pathent::ErrorCode::InvalidArgument, "cannot write '" + path + "'");
    }
    out << content;
}

pathent::Vector parse_vector(const std::string& text) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        try {
            size_t consumed = 0;
            values.push_back(std::stod(item, &consumed));
            if (consumed != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw pathent::Error(pathent::ErrorCode::ParseFailure,
                                 "cannot parse number '" + item + "'");
        }
    }
    if (values.empty()) {
        throw pathent::Error(pathent::ErrorCode::ParseFailure, "empty number list");
    }
    return Eigen::Map<const pathent::Vector>(values.data(), Eigen::Index(values.size()));
}

// Range grammar start:stop:step, inclusive of start and of stop when it is
// reachable within half a step.
std::vector<double> parse_range(const std::string& text) {
    const pathent::Vector parts = parse_vector([&] {
        std::string commas = text;
        for (char& c : commas) {
            if (c == ':') c = ',';
        }
        return commas;
    }());
    std::vector<double> values;
    if (parts.size() == 1) {
        values.push_back(parts[0]);
        return values;
    }
    if (parts.size() != 3) {
        throw pathent::Error(pathent::ErrorCode::ParseFailure, "range must be start:stop:step");
    }
    const double start = parts[0], stop = parts[1], step = parts[2];
    if (step <= 0.0) {
        if (start == stop) {
            values.push_back(start);
            return values;
        }
        throw pathent::Error(pathent::ErrorCode::ParseFailure, "range step must be positive");
    }
    for (long k = 0;; ++k) {
        const double value = start + double(k) * step;
        if (value > stop + 0.5 * step) break;
        values.push_back(value);
    }
    return values;
}

struct ModelSource {
    std::string path;     // model document file
    std::string builtin;  // or builtin name
    double xi = 1.0;
    int row = 0;
    double lambda = 1.0;
    pathent::WangParameters wang;

    void add_flags(CLI::App* cmd, bool positional_required) {
        auto* file = cmd->add_option("model", path, "model document (JSON)");
        cmd->add_option("--builtin", builtin, "builtin model: emanuel | wang | table1");
        cmd->add_option("--xi", xi, "emanuel rate modifier");
        cmd->add_option("--row", row, "table1 row (1..7)");
        cmd->add_option("--lambda", lambda, "table1 one-pool rate");
        cmd->add_option("--epsilon", wang.epsilon, "wang carbon use efficiency");
        cmd->add_option("--mu-b", wang.mu_b, "wang microbial turnover rate");
        cmd->add_option("--f-npp", wang.F_NPP, "wang carbon influx");
        cmd->add_option("--k-s", wang.K_s, "wang half-saturation constant");
        cmd->add_option("--v-s", wang.V_s, "wang max assimilation rate");
        if (positional_required) file->required(false);
    }

    pathent::ModelDocument load() const {
        if (!path.empty() && !builtin.empty()) {
            throw pathent::Error(pathent::ErrorCode::ParseFailure,
                                 "give either a model file or --builtin, not both");
        }
        if (!path.empty()) return pathent::parse_model_document(read_file(path));
        if (builtin.empty()) {
            throw pathent::Error(pathent::ErrorCode::ParseFailure,
                                 "a model file or --builtin is required");
        }
        pathent::ModelDocument doc;
        pathent::ModelDocument::Builtin spec;
        spec.name = builtin;
        if (builtin == "emanuel") {
            spec.params["xi"] = xi;
        } else if (builtin == "wang") {
            spec.params["epsilon"] = wang.epsilon;
            spec.params["mu_b"] = wang.mu_b;
            spec.params["F_NPP"] = wang.F_NPP;
            spec.params["K_s"] = wang.K_s;
            spec.params["V_s"] = wang.V_s;
        } else if (builtin == "table1") {
            spec.params["row"] = double(row);
            spec.params["lambda"] = lambda;
        } else {
            throw pathent::Error(pathent::ErrorCode::ParseFailure,
                                 "unknown builtin '" + builtin + "'");
        }
        doc.builtin = std::move(spec);
        return doc;
    }
};

int run_validate(const ModelSource& source, double tol) {
    const pathent::CompartmentalSystem sys = pathent::instantiate(source.load());
    const pathent::ValidationReport report = pathent::validate(sys, tol);
    std::cout << pathent::render_validation(report);
    return report.is_valid ? kExitOk : kExitDomain;
}

int run_analyze(const ModelSource& source, const std::string& format, const std::string& log_base,
                double tol) {
    const pathent::CompartmentalSystem sys = pathent::instantiate(source.load());
    const pathent::SteadyState ss = pathent::steady_state(sys, tol);
    const pathent::ChainStats chain = pathent::derive_chain(sys, ss, tol);
    const pathent::EntropyReport report = pathent::entropy_report(sys, ss, chain, tol);
    const pathent::LogBase base =
        log_base == "bits" ? pathent::LogBase::Bits : pathent::LogBase::Nats;
    if (format == "csv") {
        std::cout << pathent::render_analysis_csv(sys, ss, chain, report, base);
    } else {
        std::cout << pathent::render_analysis_text(sys, ss, chain, report, base);
    }
    return kExitOk;
}

int run_simulate(const ModelSource& source, std::int64_t n_paths, std::uint64_t seed, int workers,
                 std::int64_t max_jumps, const std::string& paths_csv, bool strict) {
    if (n_paths < 1) {
        throw pathent::Error(pathent::ErrorCode::ParseFailure, "--n-paths must be >= 1");
    }
    const pathent::CompartmentalSystem sys = pathent::instantiate(source.load());
    const pathent::SteadyState ss = pathent::steady_state(sys);
    const pathent::ChainStats chain = pathent::derive_chain(sys, ss);
    const pathent::EntropyReport analytic = pathent::entropy_report(sys, ss, chain);

    pathent::EstimateConfig config;
    config.n_paths = n_paths;
    config.seed = seed;
    config.workers = workers;
    config.max_jumps = max_jumps;

    pathent::MonteCarloEstimates mc;
    if (!paths_csv.empty()) {
        std::ostringstream csv;
        csv << "path_index,n_jumps,transit_time,exit_pool,log_density\n";
        auto observer = [&](std::int64_t index, const pathent::PathSample& path, double log_density) {
            csv << index << "," << (path.visits.size() + 1) << ","
                << pathent::fmt_csv(path.transit_time) << "," << (path.exit_from + 1) << ","
                << pathent::fmt_csv(log_density) << "\n";
        };
        mc = pathent::estimate(sys, config, observer);
        write_file(paths_csv, csv.str());
    } else {
        mc = pathent::estimate(sys, config);
    }

    std::cout << pathent::render_simulation(sys, chain, analytic, mc);
    if (strict && pathent::max_abs_z(sys, chain, analytic, mc) > 5.0) {
        std::cout << "strict: a z-score exceeded 5\n";
        return kExitDomain;
    }
    return kExitOk;
}

int run_sweep(const std::string& family_name, const std::string& range_spec,
              const std::string& out_path, bool strict, const pathent::WangParameters& wang_params) {
    pathent::ModelFamily family;
    if (family_name == "emanuel") {
        family = [](double xi) { return pathent::emanuel(xi); };
    } else if (family_name == "wang") {
        family = [wang_params](double eps) {
            pathent::WangParameters p = wang_params;
            p.epsilon = eps;
            return pathent::wang(p);
        };
    } else {
        throw pathent::Error(pathent::ErrorCode::ParseFailure,
                             "unknown sweep family '" + family_name + "'");
    }
    const std::vector<double> values = parse_range(range_spec);
    const std::vector<pathent::SweepRow> rows = pathent::sweep(family, values);

    int d = 0;
    for (const auto& row : rows) {
        if (row.ok) {
            d = int(row.stocks.size());
            break;
        }
    }
    if (!out_path.empty()) write_file(out_path, pathent::sweep_csv(rows, d));

    bool any_failed = false;
    for (const auto& row : rows) {
        if (!row.ok) {
            any_failed = true;
            std::cout << "skipped param=" << pathent::fmt(row.param) << ": " << row.error << "\n";
        }
    }
    if (rows.size() > 1) {
        for (const auto& feature : pathent::sweep_features(family_name, family, rows)) {
            std::cout << feature.name << " " << pathent::fmt(feature.value) << "\n";
        }
    }
    std::cout << "rows " << rows.size() << "\n";
    return (strict && any_failed) ? kExitDomain : kExitOk;
}

int run_maxent_transit(int d, const std::string& u_text, double target, bool verify) {
    pathent::TransitConstraintProblem problem;
    problem.dimension = d;
    problem.u = parse_vector(u_text);
    problem.target_mean_transit = target;
    const pathent::CompartmentalSystem sys = pathent::maxent_fixed_transit(problem);
    if (verify) {
        const double transit = pathent::mean_transit_time(sys);
        if (std::abs(transit - target) > 1e-9 * std::max(1.0, target)) {
            throw pathent::Error(pathent::ErrorCode::InvalidArgument,
                                 "verification failed: mean transit time " +
                                     std::to_string(transit));
        }
    }
    std::cout << pathent::serialize_model_document(pathent::document_from_system(sys));
    return kExitOk;
}

int run_maxent_steady(const std::string& xstar_text, const std::string& u_text, bool verify) {
    pathent::SteadyStateConstraintProblem problem;
    problem.x_star = parse_vector(xstar_text);
    if (!u_text.empty()) problem.u = parse_vector(u_text);
    const pathent::CompartmentalSystem sys = pathent::maxent_fixed_steady_state(problem);
    if (verify) {
        const pathent::SteadyState ss = pathent::steady_state(sys);
        if ((ss.x_star - problem.x_star).cwiseAbs().maxCoeff() >
            1e-9 * problem.x_star.cwiseAbs().maxCoeff()) {
            throw pathent::Error(pathent::ErrorCode::InvalidArgument,
                                 "verification failed: steady state deviates from target");
        }
    }
    std::cout << pathent::serialize_model_document(pathent::document_from_system(sys));
    return kExitOk;
}

int run_identify(const std::string& gamma_text, const std::string& u_text, double mesh,
                 const std::string& bounds_text, const std::string& objective_name,
                 const std::string& out_path) {
    const pathent::Vector gammas = parse_vector(gamma_text);
    if (gammas.size() != 3) {
        throw pathent::Error(pathent::ErrorCode::ParseFailure, "--gamma needs three values");
    }
    pathent::GammaConstraints constraints{gammas[0], gammas[1], gammas[2]};

    pathent::IdentifyOptions options;
    options.grid_mesh = mesh;
    if (!bounds_text.empty()) {
        std::string commas = bounds_text;
        for (char& c : commas) {
            if (c == ':') c = ',';
        }
        const pathent::Vector bounds = parse_vector(commas);
        if (bounds.size() != 2 || bounds[0] >= bounds[1]) {
            throw pathent::Error(pathent::ErrorCode::ParseFailure, "--bounds must be lo:hi");
        }
        options.bounds_lo = bounds[0];
        options.bounds_hi = bounds[1];
    }
    if (objective_name == "path-entropy") {
        options.objective = pathent::Objective::PathEntropy;
    } else if (objective_name == "rate-per-jump") {
        options.objective = pathent::Objective::RatePerJump;
    } else if (objective_name == "rate-per-time") {
        options.objective = pathent::Objective::RatePerTime;
    } else {
        throw pathent::Error(pathent::ErrorCode::ParseFailure,
                             "unknown objective '" + objective_name + "'");
    }

    const pathent::Vector u = u_text.empty() ? (pathent::Vector(2) << 1.0, 0.0).finished()
                                             : parse_vector(u_text);
    const pathent::IdentificationResult result = pathent::identify(constraints, u, options);
    std::cout << pathent::render_identification(result);
    if (!out_path.empty()) write_file(out_path, pathent::identify_csv(result));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropy analysis of compartmental systems in equilibrium"};
    app.require_subcommand(1);

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "check a model document");
    ModelSource validate_source;
    double validate_tol = pathent::kDefaultTol;
    validate_source.add_flags(validate_cmd, true);
    validate_cmd->add_option("--tol", validate_tol, "relative tolerance");

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "exact entropy and chain statistics");
    ModelSource analyze_source;
    std::string analyze_format = "text";
    std::string analyze_base = "nats";
    double analyze_tol = pathent::kDefaultTol;
    analyze_source.add_flags(analyze_cmd, true);
    analyze_cmd->add_option("--format", analyze_format, "text | csv")
        ->check(CLI::IsMember({"text", "csv"}));
    analyze_cmd->add_option("--log-base", analyze_base, "nats | bits")
        ->check(CLI::IsMember({"nats", "bits"}));
    analyze_cmd->add_option("--tol", analyze_tol, "relative tolerance");

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo path sampling");
    ModelSource simulate_source;
    std::int64_t n_paths = 100'000;
    std::uint64_t seed = 0;
    int workers = default_workers();
    std::int64_t max_jumps = 10'000'000;
    std::string paths_csv;
    bool strict = false;
    simulate_source.add_flags(simulate_cmd, true);
    simulate_cmd->add_option("--seed", seed, "RNG seed")->required();
    simulate_cmd->add_option("--n-paths", n_paths, "number of sampled paths");
    simulate_cmd->add_option("--workers", workers, "worker threads");
    simulate_cmd->add_option("--max-jumps", max_jumps, "per-path jump cap");
    simulate_cmd->add_option("--paths-csv", paths_csv, "write per-path CSV here");
    simulate_cmd->add_flag("--strict", strict, "exit 1 if any |z| > 5");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep to CSV");
    std::string sweep_family_name;
    std::string sweep_range;
    std::string sweep_out;
    bool sweep_strict = false;
    pathent::WangParameters sweep_wang;
    sweep_cmd->add_option("family", sweep_family_name, "emanuel | wang")->required();
    sweep_cmd->add_option("range", sweep_range, "start:stop:step")->required();
    sweep_cmd->add_option("--out", sweep_out, "CSV output path");
    sweep_cmd->add_flag("--strict", sweep_strict, "exit 1 if any row fails");
    sweep_cmd->add_option("--mu-b", sweep_wang.mu_b, "wang microbial turnover rate");
    sweep_cmd->add_option("--f-npp", sweep_wang.F_NPP, "wang carbon influx");
    sweep_cmd->add_option("--k-s", sweep_wang.K_s, "wang half-saturation constant");
    sweep_cmd->add_option("--v-s", sweep_wang.V_s, "wang max assimilation rate");

    // maxent
    auto* maxent_cmd = app.add_subcommand("maxent", "closed-form maximum entropy models");
    maxent_cmd->require_subcommand(1);
    auto* transit_cmd = maxent_cmd->add_subcommand("transit", "fixed mean transit time");
    int maxent_d = 1;
    std::string maxent_u;
    double maxent_T = 1.0;
    bool transit_verify = false;
    transit_cmd->add_option("--d", maxent_d, "dimension")->required();
    transit_cmd->add_option("--u", maxent_u, "input vector, comma separated")->required();
    transit_cmd->add_option("--T", maxent_T, "target mean transit time")->required();
    transit_cmd->add_flag("--verify", transit_verify, "re-check the constraint");

    auto* steady_cmd = maxent_cmd->add_subcommand("steady", "fixed steady state");
    std::string steady_xstar;
    std::string steady_u;
    bool steady_verify = false;
    steady_cmd->add_option("--xstar", steady_xstar, "target steady state, comma separated")
        ->required();
    steady_cmd->add_option("--u", steady_u, "input vector (dimension check only)");
    steady_cmd->add_flag("--verify", steady_verify, "re-check the constraint");

    // identify
    auto* identify_cmd = app.add_subcommand("identify", "MaxEnt structural identification (2x2)");
    std::string gamma_text;
    std::string identify_u;
    double identify_mesh = 0.2;
    std::string identify_bounds = "0:5";
    std::string identify_objective = "rate-per-time";
    std::string identify_out;
    identify_cmd->add_option("--gamma", gamma_text, "g1,g2,g3")->required();
    identify_cmd->add_option("--u", identify_u, "input vector (default 1,0)");
    identify_cmd->add_option("--mesh", identify_mesh, "grid mesh side");
    identify_cmd->add_option("--bounds", identify_bounds, "grid bounds lo:hi");
    identify_cmd->add_option("--objective", identify_objective,
                             "rate-per-time | rate-per-jump | path-entropy");
    identify_cmd->add_option("--out", identify_out, "local-maxima CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*validate_cmd) return run_validate(validate_source, validate_tol);
        if (*analyze_cmd) return run_analyze(analyze_source, analyze_format, analyze_base, analyze_tol);
        if (*simulate_cmd) {
            return run_simulate(simulate_source, n_paths, seed, workers, max_jumps, paths_csv, strict);
        }
        if (*sweep_cmd) return run_sweep(sweep_family_name, sweep_range, sweep_out, sweep_strict, sweep_wang);
        if (*maxent_cmd) {
            if (*transit_cmd) return run_maxent_transit(maxent_d, maxent_u, maxent_T, transit_verify);
            if (*steady_cmd) return run_maxent_steady(steady_xstar, steady_u, steady_verify);
        }
        if (*identify_cmd) {
            return run_identify(gamma_text, identify_u, identify_mesh, identify_bounds,
                                identify_objective, identify_out);
        }
    } catch (const pathent::Error& e) {
        std::cerr << e.what() << "\n";
        return e.code() == pathent::ErrorCode::ParseFailure ? kExitUsage : kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitUsage;
}
