#include "cbre/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cbre/errors.hpp"

namespace cbre {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& where,
                       const std::string& what) {
    throw ConfigError(origin + ": " + where + ": " + what);
}

double get_number(const json& j, const std::string& origin, const std::string& where,
                  const char* key, std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        fail(origin, where, std::string("missing field '") + key + "'");
    }
    if (!j[key].is_number()) fail(origin, where, std::string("field '") + key + "' must be a number");
    return j[key].get<double>();
}

std::vector<Atom> parse_atoms(const json& arr, const std::string& origin,
                              const std::string& where) {
    std::vector<Atom> atoms;
    for (const auto& item : arr) {
        if (item.value("family", "") != "atom") continue;
        atoms.push_back({get_number(item, origin, where, "location"),
                         get_number(item, origin, where, "mass")});
    }
    return atoms;
}

std::vector<MeasureComponent> parse_components(const json& arr, const std::string& origin,
                                               const std::string& where) {
    std::vector<MeasureComponent> comps;
    for (const auto& item : arr) {
        const std::string family = item.value("family", "");
        if (family == "atom") continue;
        if (family == "exponential") {
            ExponentialDensity e;
            e.total_mass = get_number(item, origin, where, "total_mass");
            e.rate = get_number(item, origin, where, "rate");
            e.sign = static_cast<int>(get_number(item, origin, where, "sign", 1.0));
            comps.emplace_back(e);
        } else if (family == "power") {
            PowerTail p;
            p.scale = get_number(item, origin, where, "scale");
            p.exponent = get_number(item, origin, where, "exponent");
            p.lower_cut = get_number(item, origin, where, "lower_cut");
            p.sign = static_cast<int>(get_number(item, origin, where, "sign", 1.0));
            comps.emplace_back(p);
        } else if (family == "stable") {
            StableSlab s;
            s.scale = get_number(item, origin, where, "scale");
            s.alpha = get_number(item, origin, where, "alpha");
            comps.emplace_back(s);
        } else {
            fail(origin, where, "unknown component family '" + family + "'");
        }
    }
    return comps;
}

MeasureSpec parse_measure(const json& parent, const std::string& origin,
                          const std::string& where, const char* key, MeasureKind kind) {
    if (!parent.contains(key)) return MeasureSpec::empty(kind);
    const json& arr = parent[key];
    if (!arr.is_array()) fail(origin, where, std::string("'") + key + "' must be an array");
    try {
        return MeasureSpec(kind, parse_atoms(arr, origin, where),
                           parse_components(arr, origin, where));
    } catch (const InvalidArgument& e) {
        fail(origin, where, e.what());
    }
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }

    ExperimentConfig cfg;
    cfg.digest = fnv1a_hex(text);
    if (!root.contains("experiment") || !root["experiment"].is_string()) {
        fail(origin, "top level", "missing string field 'experiment'");
    }
    cfg.experiment = root["experiment"].get<std::string>();

    const json env = root.value("environment", json::object());
    try {
        cfg.environment = EnvLevyCharacteristics(
            get_number(env, origin, "environment", "a", 0.0),
            get_number(env, origin, "environment", "sigma", 0.0),
            parse_measure(env, origin, "environment", "nu", MeasureKind::env),
            get_number(env, origin, "environment", "eps_env", 1e-2));
    } catch (const InvalidArgument& e) {
        fail(origin, "environment", e.what());
    }

    if (!root.contains("branching")) fail(origin, "top level", "missing 'branching' table");
    const json& br = root["branching"];
    try {
        cfg.branching = BranchingMechanism(
            get_number(br, origin, "branching", "b"),
            get_number(br, origin, "branching", "c", 0.0),
            parse_measure(br, origin, "branching", "m", MeasureKind::branching));
    } catch (const InvalidArgument& e) {
        fail(origin, "branching", e.what());
    }

    if (root.contains("immigration")) {
        const json& im = root["immigration"];
        try {
            cfg.immigration = ImmigrationMechanism(
                get_number(im, origin, "immigration", "h", 0.0),
                parse_measure(im, origin, "immigration", "n", MeasureKind::immigration));
        } catch (const InvalidArgument& e) {
            fail(origin, "immigration", e.what());
        }
    }

    const json sim = root.value("simulation", json::object());
    cfg.sim.dt = get_number(sim, origin, "simulation", "dt", 1e-3);
    cfg.horizon = get_number(sim, origin, "simulation", "T", 1.0);
    cfg.sim.eps_branch = get_number(sim, origin, "simulation", "eps_branch", 1e-2);
    cfg.n_paths = static_cast<std::size_t>(get_number(sim, origin, "simulation", "n_paths", 10000.0));
    cfg.n_env = static_cast<std::size_t>(get_number(sim, origin, "simulation", "n_env", 100.0));
    cfg.n_analytic =
        static_cast<std::size_t>(get_number(sim, origin, "simulation", "n_analytic", 1000.0));
    if (!(cfg.sim.dt > 0.0)) fail(origin, "simulation", "dt must be > 0");
    if (!(cfg.horizon > 0.0)) fail(origin, "simulation", "T must be > 0");
    if (cfg.immigration && !cfg.immigration->trivial()) cfg.sim.absorb_at_zero = false;

    auto read_grid = [&](const char* key, std::vector<double> fallback) {
        if (!root.contains(key)) return fallback;
        if (!root[key].is_array()) fail(origin, "top level", std::string(key) + " must be an array");
        std::vector<double> out;
        for (const auto& v : root[key]) {
            if (!v.is_number()) fail(origin, "top level", std::string(key) + " must hold numbers");
            out.push_back(v.get<double>());
        }
        return out;
    };
    cfg.lambda_grid = read_grid("lambda_grid", {1.0});
    cfg.t_ladder = read_grid("t_ladder", {cfg.horizon});
    cfg.x_values = read_grid("x_values", {1.0});

    if (root.contains("master_seed")) {
        if (!root["master_seed"].is_number_unsigned()) {
            fail(origin, "top level", "master_seed must be a nonnegative integer");
        }
        cfg.master_seed = root["master_seed"].get<std::uint64_t>();
    }
    cfg.output_dir = root.value("output_dir", ".");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

}  // namespace cbre
