/// Command-line front end: minimize, gradsweep, train, compare.
///
/// Exit codes: 0 success, 1 invalid input, 2 failure during a run.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmgrad/errors.hpp"
#include "swarmgrad/experiment.hpp"

using namespace swarmgrad;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kFailed = 2;

/// "--value-tolerance,--value_tolerance": config files use the underscore form.
std::string names(const std::string& dashed) {
    std::string underscored = dashed;
    for (auto& c : underscored) {
        if (c == '-') c = '_';
    }
    return underscored == dashed ? "--" + dashed : "--" + dashed + ",--" + underscored;
}

struct Raw {
    ExperimentSpec spec;
    std::string variant = "empso";
    std::string loss = "mse";
    std::string optimizer;
    std::vector<std::string> optimizers;
    bool header = false;
    bool no_header = false;
    std::string config;
};

std::string key_of(std::string token) {
    token = token.substr(2, token.find('=') == std::string::npos ? std::string::npos : token.find('=') - 2);
    for (auto& c : token) {
        if (c == '-') c = '_';
    }
    return token;
}

/// Splices the keys of a --config file into the argument list ahead of the
/// user's own flags. Keys also given on the command line are dropped, so
/// flags override the file. Keys may sit at top level or in a section named
/// after the subcommand.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string path;
    std::set<std::string> given;
    std::size_t sub_pos = 0;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (sub_pos == 0 && a.rfind("-", 0) != 0) sub_pos = i;
        if (a.rfind("--", 0) != 0) continue;
        if (a == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (a.rfind("--config=", 0) == 0) path = a.substr(9);
        given.insert(key_of(a));
    }
    if (path.empty() || sub_pos == 0) return args;
    if (given.count("header") || given.count("no_header")) given.insert("header"), given.insert("no_header");
    if (given.count("optimizer") || given.count("optimizers")) given.insert("optimizer"), given.insert("optimizers");

    const std::string& sub = args[sub_pos];
    std::vector<std::string> injected;
    for (const auto& item : CLI::ConfigTOML{}.from_file(path)) {
        if (item.name == "++" || item.name == "--") continue;
        if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents.front() == sub)) continue;
        std::string key = item.name;
        for (auto& c : key) {
            if (c == '-') c = '_';
        }
        if (given.count(key)) continue;
        const bool boolean = item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false");
        if (boolean) {
            if (item.inputs[0] == "true") injected.push_back("--" + key);
            else if (key == "header") injected.push_back("--no_header");
            continue;
        }
        injected.push_back("--" + key);
        injected.push_back(CLI::detail::join(item.inputs, ","));
    }
    std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1);
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, args.end());
    return out;
}

void add_common(CLI::App* sub, Raw& raw) {
    sub->add_option("--config", raw.config, "TOML file with the same keys as the flags; flags win");
    sub->add_option(names("seed"), raw.spec.seed, "First seed; run r uses seed + r")->capture_default_str();
    sub->add_option(names("seeds"), raw.spec.seeds, "Number of seeded repetitions")->capture_default_str();
    sub->add_option(names("out"), raw.spec.out, "Output file (stdout when omitted)");
    sub->add_flag(names("timestamp"), raw.spec.timestamp, "Record generation time in the report");
}

void add_swarm(CLI::App* sub, Raw& raw) {
    auto& s = raw.spec;
    sub->add_option(names("particles"), s.particles, "Swarm size")->capture_default_str();
    sub->add_option(names("c1"), s.c1, "Cognitive coefficient")->capture_default_str();
    sub->add_option(names("c2"), s.c2, "Social coefficient")->capture_default_str();
    sub->add_option(names("beta"), s.beta, "Momentum factor")->capture_default_str();
    sub->add_option(names("inertia"), s.inertia, "Inertia weight (vanilla)")->capture_default_str();
    sub->add_option(names("lambda"), s.lambda, "Momentum blend (mpso)")->capture_default_str();
}

void add_function(CLI::App* sub, Raw& raw) {
    auto& s = raw.spec;
    sub->add_option(names("function"), s.function, "Catalogue name")->required();
    sub->add_option(names("variant"), raw.variant, "vanilla | mpso | empso")->capture_default_str();
    sub->add_option(names("eta"), s.eta, "Learning rate (default 0.1)");
    sub->add_option(names("value-tolerance"), s.value_tolerance, "Stop when |f(w) - gbest| drops below")
        ->capture_default_str();
    sub->add_option(names("max-iterations"), s.max_iterations, "Iteration budget")->capture_default_str();
    sub->add_option(names("steps-per-query"), s.steps_per_query, "Swarm steps per gradient query")
        ->capture_default_str();
    sub->add_option(names("shift-alpha"), s.shift_alpha, "Shift for non-differentiable functions")
        ->capture_default_str();
    add_swarm(sub, raw);
}

void add_training(CLI::App* sub, Raw& raw, bool several) {
    auto& s = raw.spec;
    sub->add_option(names("dataset"), s.dataset, "CSV path, or builtin 'iris' / 'banknote'")->required();
    sub->add_option(names("label-column"), s.label_column, "Label column index or name (default last)");
    sub->add_flag(names("header"), raw.header, "First row is a header");
    sub->add_flag(names("no-header"), raw.no_header, "First row is data");
    if (several) {
        sub->add_option("--optimizers,--optimizer", raw.optimizers, "Two or more optimizer kinds")
            ->required()
            ->delimiter(',');
    } else {
        sub->add_option(names("optimizer"), raw.optimizer, "Optimizer kind (default adaswarm)");
    }
    sub->add_option(names("loss"), raw.loss, "mse | bce | mae")->capture_default_str();
    sub->add_option(names("eta"), s.eta, "Learning rate (default per optimizer)");
    sub->add_option(names("beta1"), s.beta1, "First-moment decay");
    sub->add_option(names("beta2"), s.beta2, "Second-moment decay");
    sub->add_option(names("epsilon"), s.epsilon, "Denominator guard");
    sub->add_option(names("momentum"), s.momentum, "sgd_momentum velocity decay");
    sub->add_option(names("rho"), s.rho, "rmsprop / adadelta decay");
    sub->add_option(names("epochs"), s.epochs, "Epoch budget")->capture_default_str();
    sub->add_option(names("patience"), s.patience, "Stop after this many epochs without improvement")
        ->capture_default_str();
    sub->add_option(names("batch-size"), s.batch_size, "Mini-batch size")->capture_default_str();
    sub->add_option(names("hidden"), s.hidden, "Hidden units")->capture_default_str();
    sub->add_option(names("swarm-steps"), s.swarm_steps, "Swarm steps per batch")->capture_default_str();
    sub->add_flag(names("swarm-warm-start"), s.swarm_warm_start, "Carry the batch swarm across batches");
    sub->add_option(names("train-fraction"), s.train_fraction, "Stratified train share")->capture_default_str();
    sub->add_option(names("accuracy-threshold"), s.accuracy_threshold, "Test accuracy for epochs-to-threshold")
        ->capture_default_str();
    add_swarm(sub, raw);
}

void finish_spec(Raw& raw, Task task) {
    auto& s = raw.spec;
    s.task = task;
    s.variant = parse_variant(raw.variant);
    s.loss = parse_loss(raw.loss);
    if (raw.header && raw.no_header) throw ValidationError("--header and --no-header are exclusive");
    if (raw.header) s.header = true;
    if (raw.no_header) s.header = false;
    if (!raw.optimizer.empty()) s.optimizers = {parse_optimizer(raw.optimizer)};
    for (const auto& o : raw.optimizers) s.optimizers.push_back(parse_optimizer(o));
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
    } else {
        write_atomically(path, content);
    }
}

void print_minimize(const Report& r) {
    const auto& agg = r.at("aggregates");
    std::cout << agg.at("function").get<std::string>() << "  (known minimum ";
    if (agg.at("known_minimum_value").is_null()) std::cout << "n/a";
    else std::cout << agg.at("known_minimum_value").get<double>();
    std::cout << ")\n";
    for (const char* m : {"gd", "emulated_gd", "emulated_momentum"}) {
        if (agg.at(m).is_null()) continue;
        std::cout << "  " << m << ": median value " << agg.at(m).at("final_value").at("median").get<double>()
                  << ", median iterations " << agg.at(m).at("iterations").at("median").get<double>() << "\n";
    }
}

void print_training(const Report& r) {
    for (const auto& [name, a] : r.at("aggregates").at("optimizers").items()) {
        std::cout << "  " << name << ": test accuracy " << a.at("test_accuracy_display").get<std::string>()
                  << ", test loss " << a.at("test_loss").at("mean").get<double>() << ", reached threshold "
                  << a.at("reached_threshold").get<std::size_t>() << "/" << a.at("test_accuracy").at("count").get<std::size_t>()
                  << "\n";
    }
}

int execute(Task task, Raw& raw) {
    finish_spec(raw, task);
    const ExperimentSpec& spec = raw.spec;
    if (task == Task::gradsweep) {
        const SweepArtifact a = run_gradsweep(spec);
        std::ostringstream csv;
        a.table.write_csv(csv);
        csv << "# sign_agreement=" << a.table.sign_agreement() << "\n";
        emit(spec.out, csv.str());
        if (!spec.out.empty()) {
            std::cout << spec.function << ": gbest " << a.table.gbest << ", sign agreement "
                      << a.table.sign_agreement() << " over [" << a.interval.low << ", " << a.interval.high
                      << "]\n";
        }
        return kOk;
    }
    const Report report = run(spec);
    emit(spec.out, dump_report(report));
    if (!spec.out.empty()) {
        if (task == Task::minimize) print_minimize(report);
        else print_training(report);
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Swarm-derived gradients: function minimization, gradient sweeps and network training"};
    app.require_subcommand(1);

    Raw raw;
    std::optional<Task> chosen;

    auto* minimize = app.add_subcommand("minimize", "GD, emulated GD and emulated SGD-momentum on a catalogue function");
    add_function(minimize, raw);
    add_common(minimize, raw);
    minimize->callback([&] { chosen = Task::minimize; });

    auto* sweep = app.add_subcommand("gradsweep", "Finite-difference vs swarm gradient on a grid (CSV)");
    add_function(sweep, raw);
    add_common(sweep, raw);
    sweep->add_option(names("low"), raw.spec.sweep_low, "Interval start (default gbest - 1)");
    sweep->add_option(names("high"), raw.spec.sweep_high, "Interval end (default gbest + 1)");
    sweep->add_option(names("points"), raw.spec.points, "Grid points")->capture_default_str();
    sweep->callback([&] { chosen = Task::gradsweep; });

    auto* train = app.add_subcommand("train", "Train the default network with one optimizer");
    add_training(train, raw, false);
    add_common(train, raw);
    train->callback([&] { chosen = Task::train; });

    auto* compare = app.add_subcommand("compare", "Train with several optimizers on shared seeds");
    add_training(compare, raw, true);
    add_common(compare, raw);
    compare->callback([&] { chosen = Task::compare; });

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(args);
        std::reverse(args.begin(), args.end());
        args.pop_back();
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    try {
        return execute(*chosen, raw);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kFailed;
    }
}
