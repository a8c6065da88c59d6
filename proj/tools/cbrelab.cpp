// Batch experiment runner; see README.md for the config format and the
// exit-code contract (0 pass, 2 statistical fail, 3 precondition, 4 config).
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cbre/battery.hpp"
#include "cbre/config.hpp"
#include "cbre/errors.hpp"
#include "cbre/laws.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitStatFail = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitConfig = 4;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

cbre::ExperimentConfig load(const Options& opt) {
    cbre::ExperimentConfig cfg = cbre::load_config(opt.config_path);
    if (opt.seed) cfg.master_seed = *opt.seed;
    if (opt.out_dir) cfg.output_dir = *opt.out_dir;
    fs::create_directories(cfg.output_dir);
    return cfg;
}

json header(const cbre::ExperimentConfig& cfg, const std::string& operation) {
    return json{{"operation", operation},
                {"config_digest", cfg.digest},
                {"master_seed", cfg.master_seed}};
}

void write_json(const cbre::ExperimentConfig& cfg, const json& doc) {
    std::ofstream out(fs::path(cfg.output_dir) / "report.json");
    out << doc.dump(2) << '\n';
}

json report_json(const cbre::LawReport& rep) {
    return json{{"analytic", rep.analytic},
                {"analytic_se", rep.analytic_se},
                {"mc", {{"value", rep.mc.value}, {"stderr", rep.mc.std_error}, {"n", rep.mc.n}}},
                {"z_score", rep.z_score},
                {"pass", rep.pass}};
}

int run_validate(const Options& opt) {
    const cbre::ExperimentConfig cfg = load(opt);
    std::cout << "config ok, digest=" << cfg.digest << "\n";
    return kExitPass;
}

int run_env_sample(const Options& opt) {
    const cbre::ExperimentConfig cfg = load(opt);
    std::ofstream csv(fs::path(cfg.output_dir) / "env.csv");
    csv << "path,t,xi\n";
    for (std::size_t j = 0; j < cfg.n_env; ++j) {
        cbre::Stream stream(cfg.master_seed, cbre::StreamKind::env_path, j);
        const cbre::EnvironmentPath env =
            cbre::simulate_env(cfg.environment, cfg.horizon, cfg.sim.dt, stream);
        for (std::size_t i = 0; i < env.xi.size(); ++i) {
            csv << j << ',' << env.time_at(i) << ',' << env.xi[i] << '\n';
        }
    }
    json doc = header(cfg, "env-sample");
    doc["paths"] = cfg.n_env;
    write_json(cfg, doc);
    return kExitPass;
}

int run_simulate(const Options& opt) {
    const cbre::ExperimentConfig cfg = load(opt);
    cbre::Stream env_stream(cfg.master_seed, cbre::StreamKind::env_path, 0);
    const cbre::EnvironmentPath env =
        cbre::simulate_env(cfg.environment, cfg.horizon, cfg.sim.dt, env_stream);
    const cbre::ImmigrationMechanism im =
        cfg.immigration.value_or(cbre::ImmigrationMechanism{});
    cbre::ForwardModel model(cfg.branching, im, cfg.environment, cfg.sim);
    model.bind(env);
    const std::size_t n_export = std::min<std::size_t>(cfg.n_paths, 32);
    std::ofstream csv(fs::path(cfg.output_dir) / "paths.csv");
    csv << "path,t,x\n";
    for (std::size_t i = 0; i < n_export; ++i) {
        cbre::Stream stream(cfg.master_seed, cbre::StreamKind::branching, i);
        const cbre::ProcessPath path = model.simulate(cfg.x_values.front(), stream);
        for (std::size_t k = 0; k < path.values.size(); ++k) {
            csv << i << ',' << env.time_at(k) << ',' << path.values[k] << '\n';
        }
    }
    json doc = header(cfg, "simulate");
    doc["paths_exported"] = n_export;
    write_json(cfg, doc);
    return kExitPass;
}

int run_laplace(const Options& opt) {
    const cbre::ExperimentConfig cfg = load(opt);
    const bool quenched = cfg.experiment != "annealed-laplace";
    const double x0 = cfg.x_values.front();
    json reports = json::array();
    std::ofstream csv(fs::path(cfg.output_dir) / "laplace.csv");
    csv << "lambda,analytic,mc,stderr,z\n";
    bool all_pass = true;
    std::optional<cbre::EnvironmentPath> env;
    if (quenched) {
        cbre::Stream stream(cfg.master_seed, cbre::StreamKind::env_path, 0);
        env = cbre::simulate_env(cfg.environment, cfg.horizon, cfg.sim.dt, stream);
    }
    for (double lam : cfg.lambda_grid) {
        cbre::LawReport rep;
        if (cfg.immigration && !cfg.immigration->trivial()) {
            rep = quenched
                      ? cbre::cbire_laplace_quenched(*env, x0, cfg.branching, *cfg.immigration,
                                                     cfg.environment, cfg.horizon, lam,
                                                     cfg.n_paths, cfg.sim, cfg.master_seed)
                      : cbre::cbire_laplace(cfg.environment, x0, cfg.branching,
                                            *cfg.immigration, cfg.horizon, lam, cfg.n_env,
                                            cfg.n_paths, cfg.n_analytic, cfg.sim,
                                            cfg.master_seed);
        } else if (quenched) {
            rep = cbre::quenched_laplace(*env, x0, cfg.branching, cfg.environment, cfg.horizon,
                                         lam, cfg.n_paths, cfg.sim, cfg.master_seed);
        } else {
            rep = cbre::annealed_laplace(cfg.environment, x0, cfg.branching, cfg.horizon, lam,
                                         cfg.n_env, cfg.n_paths, cfg.n_analytic, cfg.sim,
                                         cfg.master_seed);
        }
        all_pass = all_pass && rep.pass;
        json entry = report_json(rep);
        entry["lambda"] = lam;
        reports.push_back(entry);
        csv << lam << ',' << rep.analytic << ',' << rep.mc.value << ',' << rep.mc.std_error
            << ',' << rep.z_score << '\n';
    }
    json doc = header(cfg, "laplace");
    doc["reports"] = reports;
    doc["pass"] = all_pass;
    write_json(cfg, doc);
    return all_pass ? kExitPass : kExitStatFail;
}

int run_extinction(const Options& opt) {
    const cbre::ExperimentConfig cfg = load(opt);
    cbre::Stream stream(cfg.master_seed, cbre::StreamKind::env_path, 0);
    const cbre::EnvironmentPath env =
        cbre::simulate_env(cfg.environment, cfg.horizon, cfg.sim.dt, stream);
    const cbre::LawReport rep =
        cbre::extinction_quenched(env, cfg.x_values.front(), cfg.branching, cfg.environment,
                                  cfg.horizon, cfg.n_paths, cfg.sim, cfg.master_seed);
    json doc = header(cfg, "extinction");
    doc["report"] = report_json(rep);
    write_json(cfg, doc);
    return rep.pass ? kExitPass : kExitStatFail;
}

int run_stationary(const Options& opt) {
    const cbre::ExperimentConfig cfg = load(opt);
    if (!cfg.immigration) {
        std::cerr << "stationary: config needs an immigration table\n";
        return kExitConfig;
    }
    json rows = json::array();
    std::ofstream csv(fs::path(cfg.output_dir) / "stationary.csv");
    csv << "lambda,value,stderr\n";
    for (double lam : cfg.lambda_grid) {
        const cbre::MCEstimate est = cbre::stationary_laplace(
            cfg.environment, cfg.branching, *cfg.immigration, lam, cfg.horizon, cfg.sim.dt,
            std::max<std::size_t>(cfg.n_env, 2), cfg.master_seed, 1e-5);
        rows.push_back({{"lambda", lam}, {"value", est.value}, {"stderr", est.std_error}});
        csv << lam << ',' << est.value << ',' << est.std_error << '\n';
    }
    json doc = header(cfg, "stationary");
    doc["estimates"] = rows;
    write_json(cfg, doc);
    return kExitPass;
}

int run_coupling(const Options& opt) {
    const cbre::ExperimentConfig cfg = load(opt);
    const double x = cfg.x_values.front();
    const double y = cfg.x_values.size() > 1 ? cfg.x_values[1] : x + 1.0;
    const cbre::CouplingReport rep =
        cbre::strong_feller_gap(cfg.environment, x, y, cfg.horizon, cfg.branching, cfg.n_env,
                                cfg.n_paths, cfg.sim, cfg.master_seed);
    json doc = header(cfg, "coupling");
    doc["report"] = report_json(rep.report);
    doc["monotonicity_violations"] = rep.monotonicity_violations;
    write_json(cfg, doc);
    return rep.report.pass && rep.monotonicity_violations == 0 ? kExitPass : kExitStatFail;
}

int run_generator_check(const Options& opt) {
    const cbre::ExperimentConfig cfg = load(opt);
    const double x0 = cfg.x_values.front();
    const double h = cfg.sim.dt * 10.0;
    auto f = [](double x) { return std::exp(-x); };
    const cbre::ImmigrationMechanism im =
        cfg.immigration.value_or(cbre::ImmigrationMechanism{});
    const double af = cbre::generator_apply(
        cfg.branching, cfg.immigration ? &*cfg.immigration : nullptr, cfg.environment, f,
        [](double x) { return -std::exp(-x); }, [](double x) { return std::exp(-x); }, x0,
        1e-10);
    const cbre::ForwardModel base(cfg.branching, im, cfg.environment, cfg.sim);
    double sum = 0.0;
    for (std::size_t i = 0; i < cfg.n_paths; ++i) {
        cbre::Stream env_stream(cfg.master_seed, cbre::StreamKind::env_path, i);
        const cbre::EnvironmentPath env =
            cbre::simulate_env(cfg.environment, h, cfg.sim.dt, env_stream);
        cbre::ForwardModel model = base;
        model.bind(env);
        cbre::Stream stream(cfg.master_seed, cbre::StreamKind::branching, i);
        sum += f(model.simulate(x0, stream).values.back());
    }
    const double derivative = (sum / static_cast<double>(cfg.n_paths) - f(x0)) / h;
    const double rel = std::abs(derivative - af) / std::abs(af);
    json doc = header(cfg, "generator-check");
    doc["generator"] = af;
    doc["mc_derivative"] = derivative;
    doc["relative_error"] = rel;
    doc["pass"] = rel < 0.05;
    write_json(cfg, doc);
    return rel < 0.05 ? kExitPass : kExitStatFail;
}

int run_battery_cmd(const Options& opt) {
    std::uint64_t seed = cbre::kDefaultBatterySeed;
    std::string out_dir = opt.out_dir.value_or(".");
    std::string digest = "builtin";
    if (!opt.config_path.empty()) {
        const cbre::ExperimentConfig cfg = cbre::load_config(opt.config_path);
        seed = cfg.master_seed;
        digest = cfg.digest;
        if (!opt.out_dir) out_dir = cfg.output_dir;
    }
    if (opt.seed) seed = *opt.seed;
    fs::create_directories(out_dir);
    const auto results = cbre::run_battery(seed);
    bool all_pass = true;
    json rows = json::array();
    for (const auto& result : results) {
        std::cout << cbre::format_result(result) << "\n";
        all_pass = all_pass && result.pass;
        rows.push_back({{"id", result.id},
                        {"name", result.name},
                        {"pass", result.pass},
                        {"detail", result.detail},
                        {"seconds", result.seconds}});
    }
    json doc{{"operation", "battery"},
             {"config_digest", digest},
             {"master_seed", seed},
             {"criteria", rows},
             {"pass", all_pass}};
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << doc.dump(2) << '\n';
    return all_pass ? kExitPass : kExitStatFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cbrelab: dual-engine laboratory for branching processes in Levy environments"};
    app.require_subcommand(1);

    Options opt;
    int (*handler)(const Options&) = nullptr;
    auto add = [&](const char* name, const char* desc, int (*fn)(const Options&),
                   bool config_required) {
        CLI::App* sub = app.add_subcommand(name, desc);
        auto* copt = sub->add_option("--config", opt.config_path, "experiment config file");
        if (config_required) copt->required();
        std::uint64_t seed_value = 0;
        sub->add_option("--seed", seed_value, "master seed override")
            ->each([&opt](const std::string& s) { opt.seed = std::stoull(s); });
        std::string out_value;
        sub->add_option("--out", out_value, "output directory")
            ->each([&opt](const std::string& s) { opt.out_dir = s; });
        sub->callback([&handler, fn] { handler = fn; });
    };

    add("validate", "parse and validate a config", run_validate, true);
    add("env-sample", "write sampled environment paths", run_env_sample, true);
    add("simulate", "export forward paths", run_simulate, true);
    add("laplace", "dual-engine Laplace transform comparison", run_laplace, true);
    add("extinction", "extinction probability comparison", run_extinction, true);
    add("stationary", "stationary-law Laplace transform", run_stationary, true);
    add("coupling", "monotone-coupling coalescence check", run_coupling, true);
    add("generator-check", "short-time generator comparison", run_generator_check, true);
    add("battery", "run the acceptance battery", run_battery_cmd, false);

    CLI11_PARSE(app, argc, argv);

    try {
        return handler(opt);
    } catch (const cbre::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const cbre::NotErgodic& e) {
        std::cerr << "precondition: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const cbre::NumericalDomainError& e) {
        std::cerr << "precondition: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const cbre::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStatFail;
    }
}
