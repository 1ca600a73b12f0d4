#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "swmf/errors.hpp"
#include "swmf/experiments.hpp"

namespace fs = std::filesystem;
using swmf::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitGated = 1;
constexpr int kExitUsage = 2;

struct GlobalOptions {
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string out;
    std::string config_path;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Json load_config(const std::string& path)
{
    if (path.empty()) return Json::object();
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    Json cfg;
    try {
        in >> cfg;
    } catch (const Json::exception& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
    for (const auto& [key, _] : cfg.items())
        if (key != "experiment" && key != "seed" && key != "threads" && key != "out" && key != "params")
            throw UsageError("config file: unknown key '" + key + "'");
    return cfg;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

void emit(const Json& record, const std::map<std::string, std::string>& csv, const std::string& name, const std::string& out)
{
    const std::string text = record.dump(2) + "\n";
    std::cout << text;
    if (out.empty()) return;
    fs::create_directories(out);
    write_file(fs::path(out) / (name + ".json"), text);
    for (const auto& [stem, body] : csv) write_file(fs::path(out) / (name + "_" + stem + ".csv"), body);
}

// --key value pairs left over by the sweep subcommand.
std::map<std::string, std::string> pair_extras(const std::vector<std::string>& extras, GlobalOptions& g, bool& seed_given,
                                               bool& threads_given)
{
    std::map<std::string, std::string> flags;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& tok = extras[i];
        if (tok.rfind("--", 0) != 0 || tok.size() < 3) throw UsageError("sweep: unexpected argument '" + tok + "'");
        std::string key = tok.substr(2);
        std::string value;
        if (const auto eq = key.find('='); eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else {
            if (i + 1 >= extras.size()) throw UsageError("sweep: missing value for --" + key);
            value = extras[++i];
        }
        if (key == "seed") {
            g.seed = std::stoull(value);
            seed_given = true;
        } else if (key == "threads") {
            g.threads = static_cast<unsigned>(std::stoul(value));
            threads_given = true;
        } else if (key == "out") {
            g.out = value;
        } else if (key == "config") {
            g.config_path = value;
        } else {
            flags[key] = value;
        }
    }
    return flags;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Swendsen-Wang mean-field experiments"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    GlobalOptions g;
    auto* seed_opt = app.add_option("--seed", g.seed, "master seed")->default_val(1);
    auto* threads_opt = app.add_option("--threads", g.threads, "worker threads (0: hardware concurrency)");
    app.add_option("--out", g.out, "output directory for JSON and CSV files");
    app.add_option("--config", g.config_path, "JSON config file {experiment, seed, threads, out, params}");

    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, std::vector<CLI::Option*>> param_opts;
    std::map<std::string, CLI::App*> subs;
    for (const auto& spec : swmf::experiment_specs()) {
        CLI::App* sub = app.add_subcommand(spec.name, spec.help);
        sub->set_help_flag("--help", "print the parameter table");
        for (const auto& ps : spec.params) {
            auto* opt = sub->add_option("--" + ps.name, raw[spec.name][ps.name], ps.help + " (default " + ps.default_value.dump() + ")");
            param_opts[spec.name].push_back(opt);
        }
        subs[spec.name] = sub;
    }
    std::string sweep_target;
    CLI::App* sweep = app.add_subcommand("sweep", "run an experiment over a comma-separated grid of one parameter");
    sweep->add_option("experiment", sweep_target, "experiment to sweep")->required();
    sweep->allow_extras();
    sweep->fallthrough(false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    std::string name;
    const swmf::ExperimentSpec* spec = nullptr;
    try {
        bool seed_given = seed_opt->count() > 0;
        bool threads_given = threads_opt->count() > 0;
        std::map<std::string, std::string> flags;
        if (sweep->parsed()) flags = pair_extras(sweep->remaining(), g, seed_given, threads_given);

        const Json cfg = load_config(g.config_path);
        if (sweep->parsed()) {
            name = sweep_target;
        } else {
            for (const auto& [n, sub] : subs)
                if (sub->parsed()) name = n;
            if (name.empty() && cfg.contains("experiment")) name = cfg.at("experiment").get<std::string>();
        }
        if (name.empty()) {
            std::cerr << app.help();
            return kExitUsage;
        }
        spec = swmf::find_experiment(name);
        if (!spec) throw UsageError("unknown experiment '" + name + "'");
        if (cfg.contains("experiment") && cfg.at("experiment").get<std::string>() != name)
            throw UsageError("config file is for experiment '" + cfg.at("experiment").get<std::string>() + "'");
        if (!seed_given && cfg.contains("seed")) g.seed = cfg.at("seed").get<std::uint64_t>();
        if (!threads_given && cfg.contains("threads")) g.threads = cfg.at("threads").get<unsigned>();
        if (g.out.empty() && cfg.contains("out")) g.out = cfg.at("out").get<std::string>();
        if (g.threads == 0) g.threads = std::max(1u, std::thread::hardware_concurrency());
        const Json cfg_params = cfg.contains("params") ? cfg.at("params") : Json();

        if (sweep->parsed()) {
            const swmf::SweepResult r = swmf::run_sweep(name, cfg_params, flags, g.seed, g.threads);
            emit(r.json, {{name, r.csv}}, "sweep", g.out);
            return r.gated_failure ? kExitGated : kExitOk;
        }
        for (const auto* opt : param_opts[name])
            if (opt->count() > 0) flags[opt->get_name().substr(2)] = raw[name][opt->get_name().substr(2)];
        const Json params = swmf::resolve_params(*spec, cfg_params, flags);
        const swmf::ExperimentResult r = swmf::run_experiment(name, params, g.seed, g.threads);
        emit(r.json, r.csv, name, g.out);
        return r.gated_failure ? kExitGated : kExitOk;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (spec) std::cerr << swmf::describe_params(*spec);
        return kExitUsage;
    } catch (const swmf::ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (spec) std::cerr << swmf::describe_params(*spec);
        return kExitUsage;
    } catch (const swmf::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (spec) std::cerr << swmf::describe_params(*spec);
        return kExitUsage;
    } catch (const swmf::CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (spec) std::cerr << swmf::describe_params(*spec);
        return kExitUsage;
    } catch (const Json::exception& e) {
        std::cerr << "error: malformed config: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGated;
    }
}
