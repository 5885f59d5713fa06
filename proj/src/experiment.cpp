#include "swarmgrad/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "swarmgrad/dataset.hpp"
#include "swarmgrad/errors.hpp"
#include "swarmgrad/neural.hpp"
#include "swarmgrad/objectives.hpp"
#include "swarmgrad/random.hpp"

namespace swarmgrad {

using nlohmann::json;

std::string to_string(Task t) {
    switch (t) {
    case Task::minimize: return "minimize";
    case Task::gradsweep: return "gradsweep";
    case Task::train: return "train";
    case Task::compare: return "compare";
    }
    return "?";
}

Task parse_task(std::string_view name) {
    for (Task t : {Task::minimize, Task::gradsweep, Task::train, Task::compare}) {
        if (to_string(t) == name) return t;
    }
    throw ValidationError("unknown task '" + std::string(name) + "'");
}

namespace {

SwarmConfig swarm_config(const ExperimentSpec& spec) {
    SwarmConfig cfg;
    cfg.num_particles = spec.particles;
    cfg.c1 = spec.c1;
    cfg.c2 = spec.c2;
    cfg.beta = spec.beta;
    cfg.inertia = spec.inertia;
    cfg.lambda = spec.lambda;
    cfg.max_iterations = spec.max_iterations;
    return cfg;
}

EmulationConfig emulation_config(const ExperimentSpec& spec) {
    EmulationConfig cfg;
    cfg.eta = spec.eta.value_or(0.1);
    cfg.beta = spec.beta;
    cfg.swarm = swarm_config(spec);
    cfg.variant = spec.variant;
    cfg.steps_per_query = spec.steps_per_query;
    cfg.shift_alpha = spec.shift_alpha;
    cfg.value_tolerance = spec.value_tolerance;
    cfg.max_iterations = spec.max_iterations;
    return cfg;
}

Hyper hyper_for(const ExperimentSpec& spec, OptimizerKind kind) {
    Hyper h = default_hyper(kind);
    if (spec.eta) h.eta = *spec.eta;
    if (spec.beta1) h.beta1 = *spec.beta1;
    if (spec.beta2) h.beta2 = *spec.beta2;
    if (spec.epsilon) h.epsilon = *spec.epsilon;
    if (spec.momentum) h.momentum = *spec.momentum;
    if (spec.rho) h.rho = *spec.rho;
    return h;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

template <class T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_from(const json& doc, const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
    return doc.at(key).get<T>();
}

} // namespace

void ExperimentSpec::validate() const {
    require(seeds >= 1, "seeds must be >= 1 (got 0 repetitions)");
    switch (task) {
    case Task::minimize:
    case Task::gradsweep: {
        require(!function.empty(), "--function is required");
        find_objective(function);
        try {
            emulation_config(*this).validate();
        } catch (const ConfigError& e) {
            throw ValidationError(e.what());
        }
        if (task == Task::gradsweep) {
            require(points >= 2, "points must be >= 2");
            if (sweep_low && sweep_high) require(*sweep_low < *sweep_high, "sweep_low must be < sweep_high");
        }
        break;
    }
    case Task::train:
    case Task::compare: {
        require(!dataset.empty(), "--dataset is required");
        if (task == Task::train) {
            require(optimizers.size() <= 1, "train takes a single optimizer; use compare for several");
        } else {
            require(optimizers.size() >= 2, "compare needs at least 2 optimizers");
        }
        require(epochs >= 1, "epochs must be >= 1");
        require(batch_size >= 1, "batch_size must be >= 1");
        require(hidden >= 1, "hidden must be >= 1");
        require(swarm_steps >= 1, "swarm_steps must be >= 1");
        require(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0, 1)");
        require(!eta || *eta > 0.0, "eta must be > 0");
        try {
            SwarmConfig cfg = swarm_config(*this);
            cfg.bounds = {Bound{0.0, 1.0}};
            cfg.validate();
        } catch (const ConfigError& e) {
            throw ValidationError(e.what());
        }
        break;
    }
    }
}

std::vector<std::uint64_t> ExperimentSpec::seed_list() const {
    std::vector<std::uint64_t> out;
    for (std::size_t r = 0; r < seeds; ++r) out.push_back(seed + r);
    return out;
}

json ExperimentSpec::to_json() const {
    json j;
    j["task"] = to_string(task);
    j["function"] = function;
    j["variant"] = to_string(variant);
    j["particles"] = particles;
    j["c1"] = c1;
    j["c2"] = c2;
    j["beta"] = beta;
    j["inertia"] = inertia;
    j["lambda"] = lambda;
    j["value_tolerance"] = value_tolerance;
    j["max_iterations"] = max_iterations;
    j["steps_per_query"] = steps_per_query;
    j["shift_alpha"] = shift_alpha;
    j["sweep_low"] = opt_json(sweep_low);
    j["sweep_high"] = opt_json(sweep_high);
    j["points"] = points;
    j["dataset"] = dataset;
    j["label_column"] = label_column;
    j["header"] = opt_json(header);
    auto& opts = j["optimizers"] = json::array();
    for (auto k : optimizers) opts.push_back(to_string(k));
    j["loss"] = to_string(loss);
    j["eta"] = opt_json(eta);
    j["beta1"] = opt_json(beta1);
    j["beta2"] = opt_json(beta2);
    j["epsilon"] = opt_json(epsilon);
    j["momentum"] = opt_json(momentum);
    j["rho"] = opt_json(rho);
    j["epochs"] = epochs;
    j["patience"] = patience;
    j["batch_size"] = batch_size;
    j["hidden"] = hidden;
    j["swarm_steps"] = swarm_steps;
    j["swarm_warm_start"] = swarm_warm_start;
    j["train_fraction"] = train_fraction;
    j["accuracy_threshold"] = accuracy_threshold;
    j["seed"] = seed;
    j["seeds"] = seeds;
    j["out"] = out;
    j["timestamp"] = timestamp;
    return j;
}

ExperimentSpec ExperimentSpec::from_json(const json& doc) {
    try {
        ExperimentSpec s;
        s.task = parse_task(doc.value("task", std::string("minimize")));
        s.function = doc.value("function", s.function);
        s.variant = parse_variant(doc.value("variant", std::string("empso")));
        s.particles = doc.value("particles", s.particles);
        s.c1 = doc.value("c1", s.c1);
        s.c2 = doc.value("c2", s.c2);
        s.beta = doc.value("beta", s.beta);
        s.inertia = doc.value("inertia", s.inertia);
        s.lambda = doc.value("lambda", s.lambda);
        s.value_tolerance = doc.value("value_tolerance", s.value_tolerance);
        s.max_iterations = doc.value("max_iterations", s.max_iterations);
        s.steps_per_query = doc.value("steps_per_query", s.steps_per_query);
        s.shift_alpha = doc.value("shift_alpha", s.shift_alpha);
        s.sweep_low = opt_from<double>(doc, "sweep_low");
        s.sweep_high = opt_from<double>(doc, "sweep_high");
        s.points = doc.value("points", s.points);
        s.dataset = doc.value("dataset", s.dataset);
        s.label_column = doc.value("label_column", s.label_column);
        s.header = opt_from<bool>(doc, "header");
        if (doc.contains("optimizers")) {
            for (const auto& o : doc.at("optimizers")) s.optimizers.push_back(parse_optimizer(o.get<std::string>()));
        }
        s.loss = parse_loss(doc.value("loss", std::string("mse")));
        s.eta = opt_from<double>(doc, "eta");
        s.beta1 = opt_from<double>(doc, "beta1");
        s.beta2 = opt_from<double>(doc, "beta2");
        s.epsilon = opt_from<double>(doc, "epsilon");
        s.momentum = opt_from<double>(doc, "momentum");
        s.rho = opt_from<double>(doc, "rho");
        s.epochs = doc.value("epochs", s.epochs);
        s.patience = doc.value("patience", s.patience);
        s.batch_size = doc.value("batch_size", s.batch_size);
        s.hidden = doc.value("hidden", s.hidden);
        s.swarm_steps = doc.value("swarm_steps", s.swarm_steps);
        s.swarm_warm_start = doc.value("swarm_warm_start", s.swarm_warm_start);
        s.train_fraction = doc.value("train_fraction", s.train_fraction);
        s.accuracy_threshold = doc.value("accuracy_threshold", s.accuracy_threshold);
        s.seed = doc.value("seed", s.seed);
        s.seeds = doc.value("seeds", s.seeds);
        s.out = doc.value("out", s.out);
        s.timestamp = doc.value("timestamp", s.timestamp);
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("experiment config: ") + e.what());
    }
}

Summary summarize(std::vector<double> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    const std::size_t n = values.size();
    s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    s.min = values.front();
    s.max = values.back();
    return s;
}

json to_json(const Summary& s) {
    return {{"count", s.count}, {"mean", s.mean}, {"std", s.std},
            {"median", s.median}, {"min", s.min}, {"max", s.max}};
}

Trajectory plain_gd(const Objective& objective, double eta, const Vector& w0, double tolerance,
                    std::size_t max_iterations) {
    if (!objective.gradient) throw ConfigError("'" + objective.name + "' has no closed-form derivative");
    if (!(eta > 0.0)) throw ConfigError("learning rate eta must be > 0");
    const auto value_at = [&](const Vector& w) {
        const auto f = objective.evaluate(w);
        if (!f || !std::isfinite(*f)) throw RunError("gradient descent left the domain of '" + objective.name + "'");
        return *f;
    };
    Trajectory traj;
    Vector w = w0;
    traj.w_history.push_back(w[0]);
    traj.f_history.push_back(value_at(w));
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        Vector next = w - eta * objective.gradient(w);
        if (!next.allFinite()) throw RunError("gradient descent diverged on '" + objective.name + "'");
        for (Eigen::Index d = 0; d < next.size(); ++d) next[d] = objective.bounds[d].clamp(next[d]);
        w = std::move(next);
        const double f = value_at(w);
        const double prev = traj.f_history.back();
        traj.w_history.push_back(w[0]);
        traj.f_history.push_back(f);
        traj.iterations = it;
        if (std::abs(f - prev) < tolerance) {
            traj.reached_tolerance = true;
            break;
        }
    }
    traj.final_w = w;
    traj.final_value = traj.f_history.back();
    return traj;
}

namespace {

json trajectory_json(const Trajectory& t, bool with_gbest) {
    json j{{"final_w", t.final_w[0]},
           {"final_value", t.final_value},
           {"iterations", t.iterations},
           {"reached_tolerance", t.reached_tolerance}};
    if (with_gbest) {
        j["gbest_fitness"] = t.gbest_fitness;
        j["gbest_position"] = t.gbest_position[0];
    }
    return j;
}

json method_aggregate(const json& runs, const char* method) {
    std::vector<double> values;
    std::vector<double> iterations;
    std::size_t reached = 0;
    for (const auto& r : runs) {
        if (r.at(method).is_null()) continue;
        values.push_back(r.at(method).at("final_value").get<double>());
        iterations.push_back(r.at(method).at("iterations").get<double>());
        if (r.at(method).at("reached_tolerance").get<bool>()) ++reached;
    }
    if (values.empty()) return nullptr;
    return {{"final_value", to_json(summarize(values))},
            {"iterations", to_json(summarize(iterations))},
            {"reached_tolerance", reached}};
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

Report make_report(const ExperimentSpec& spec, json runs, json aggregates) {
    Report r;
    r["config"] = spec.to_json();
    r["seeds"] = spec.seed_list();
    r["runs"] = std::move(runs);
    r["aggregates"] = std::move(aggregates);
    if (spec.timestamp) r["generated_at"] = utc_now();
    return r;
}

} // namespace

Report run_minimize(const ExperimentSpec& spec) {
    ExperimentSpec s = spec;
    s.task = Task::minimize;
    s.validate();
    const Objective& obj = find_objective(s.function);
    const EmulationConfig base = emulation_config(s);

    json runs = json::array();
    for (std::uint64_t seed : s.seed_list()) {
        Rng start_rng(derive_seed(seed, 0));
        Vector w0(static_cast<Eigen::Index>(obj.dimension));
        for (std::size_t d = 0; d < obj.dimension; ++d) {
            w0[static_cast<Eigen::Index>(d)] = uniform(start_rng, obj.bounds[d].low, obj.bounds[d].high);
        }
        json run{{"seed", seed}, {"w0", w0[0]}};
        run["gd"] = obj.gradient
                        ? trajectory_json(plain_gd(obj, base.eta, w0, s.value_tolerance, s.max_iterations), false)
                        : json(nullptr);
        EmulationConfig cfg = base;
        cfg.swarm.rng_seed = derive_seed(seed, 1);
        run["emulated_gd"] = trajectory_json(emulate_gd(obj, cfg, w0), true);
        cfg.swarm.rng_seed = derive_seed(seed, 2);
        run["emulated_momentum"] = trajectory_json(emulate_sgd_momentum(obj, cfg, w0), true);
        runs.push_back(std::move(run));
    }

    json agg;
    agg["function"] = obj.name;
    agg["formula"] = obj.formula;
    agg["known_minimum_value"] = opt_json(obj.known_minimum_value);
    for (const char* m : {"gd", "emulated_gd", "emulated_momentum"}) agg[m] = method_aggregate(runs, m);
    return make_report(s, std::move(runs), std::move(agg));
}

SweepArtifact run_gradsweep(const ExperimentSpec& spec) {
    ExperimentSpec s = spec;
    s.task = Task::gradsweep;
    s.validate();
    const Objective& obj = find_objective(s.function);
    EmulationConfig cfg = emulation_config(s);
    cfg.swarm.rng_seed = derive_seed(s.seed, 1);
    const SwarmResult converged = converge_swarm(obj, cfg);
    const double g = converged.gbest_position[0];
    Bound interval{s.sweep_low.value_or(g - 1.0), s.sweep_high.value_or(g + 1.0)};
    if (!(interval.low < interval.high)) throw ValidationError("sweep interval must have low < high");
    return {gradient_sweep(obj, interval, s.points, cfg.eta, converged.final_state), interval};
}

namespace {

double full_loss(LossKind loss, const Matrix& pred, const Matrix& targets) {
    if (loss == LossKind::bce) return loss_forward(loss, pred.cwiseMax(1e-12).cwiseMin(1.0 - 1e-12), targets);
    return loss_forward(loss, pred, targets);
}

json train_one(const ExperimentSpec& s, const RawTable& raw, OptimizerKind kind, std::uint64_t seed) {
    const Dataset data = make_dataset(s.dataset, raw, derive_seed(seed, 1), s.train_fraction);
    Network net = Network::default_topology(static_cast<std::size_t>(data.features.cols()), data.class_count,
                                            derive_seed(seed, 2), s.hidden);
    const Hyper hyper = hyper_for(s, kind);
    OptimizerState opt = make_optimizer(kind, net.parameter_count(), hyper);

    GradientSource source;
    source.mode = kind == OptimizerKind::adaswarm ? GradientMode::swarm : GradientMode::analytic;
    source.loss = s.loss;
    source.swarm = swarm_config(s);
    source.swarm.rng_seed = derive_seed(seed, 3);
    source.eta = s.eta.value_or(0.1);
    source.swarm_steps = s.swarm_steps;
    source.reinit_per_batch = !s.swarm_warm_start;
    BatchSwarm swarm;
    Rng shuffle(derive_seed(seed, 4));

    const Matrix train_x = data.rows(data.features, data.train);
    const Matrix train_y = data.rows(data.labels, data.train);
    const Matrix test_x = data.rows(data.features, data.test);
    const Matrix test_y = data.rows(data.labels, data.test);

    json loss_hist = json::array();
    json acc_hist = json::array();
    json test_hist = json::array();
    std::optional<std::size_t> epochs_to_threshold;
    double best = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    std::size_t epoch = 0;
    EpochMetrics last;
    while (epoch < s.epochs) {
        const auto batches = make_batches(data, data.train, s.batch_size, shuffle);
        last = train_epoch(net, batches, source, opt, swarm);
        ++epoch;
        loss_hist.push_back(last.loss_running_avg);
        acc_hist.push_back(last.accuracy_running_avg);
        const double test_acc = accuracy(forward(net, test_x).predictions(), test_y);
        test_hist.push_back(test_acc);
        if (!epochs_to_threshold && test_acc >= s.accuracy_threshold) epochs_to_threshold = epoch;

        const double train_loss = full_loss(s.loss, forward(net, train_x).predictions(), train_y);
        if (train_loss < best - 1e-5) {
            best = train_loss;
            stale = 0;
        } else if (s.patience > 0 && ++stale >= s.patience) {
            break;
        }
    }

    const Matrix test_pred = forward(net, test_x).predictions();
    json rec;
    rec["seed"] = seed;
    rec["optimizer"] = to_string(kind);
    rec["gradient_source"] = to_string(source.mode);
    rec["train_rows"] = data.train.size();
    rec["test_rows"] = data.test.size();
    rec["epochs_run"] = epoch;
    rec["loss_running_avg"] = last.loss_running_avg;
    rec["accuracy_running_avg"] = last.accuracy_running_avg;
    rec["test_accuracy"] = accuracy(test_pred, test_y);
    rec["test_loss"] = full_loss(s.loss, test_pred, test_y);
    rec["epochs_to_threshold"] = epochs_to_threshold ? json(*epochs_to_threshold) : json(nullptr);
    rec["history"] = {{"loss_running_avg", loss_hist}, {"accuracy_running_avg", acc_hist}, {"test_accuracy", test_hist}};
    return rec;
}

std::string percent(const Summary& s) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << 100.0 * s.mean << "% ± " << 100.0 * s.std << "%";
    return os.str();
}

json optimizer_aggregate(const json& runs, const std::string& name) {
    std::vector<double> acc, loss, epochs, to_threshold;
    for (const auto& r : runs) {
        if (r.at("optimizer") != name) continue;
        acc.push_back(r.at("test_accuracy").get<double>());
        loss.push_back(r.at("test_loss").get<double>());
        epochs.push_back(r.at("epochs_run").get<double>());
        if (!r.at("epochs_to_threshold").is_null()) to_threshold.push_back(r.at("epochs_to_threshold").get<double>());
    }
    const Summary a = summarize(acc);
    return {{"test_accuracy", to_json(a)},
            {"test_accuracy_display", percent(a)},
            {"test_loss", to_json(summarize(loss))},
            {"epochs_run", to_json(summarize(epochs))},
            {"epochs_to_threshold", to_json(summarize(to_threshold))},
            {"reached_threshold", to_threshold.size()}};
}

Report train_many(const ExperimentSpec& s) {
    CsvSchema schema;
    schema.label_column = s.label_column;
    schema.header = s.header;
    const RawTable raw = read_csv(resolve_dataset(s.dataset), schema);

    std::vector<OptimizerKind> kinds = s.optimizers;
    if (kinds.empty()) kinds.push_back(OptimizerKind::adaswarm);
    json runs = json::array();
    for (OptimizerKind k : kinds) {
        for (std::uint64_t seed : s.seed_list()) runs.push_back(train_one(s, raw, k, seed));
    }
    json agg;
    agg["dataset"] = s.dataset;
    agg["rows"] = raw.labels.size();
    agg["classes"] = raw.class_names.size();
    agg["loss"] = to_string(s.loss);
    agg["accuracy_threshold"] = s.accuracy_threshold;
    json per = json::object();
    for (OptimizerKind k : kinds) per[to_string(k)] = optimizer_aggregate(runs, to_string(k));
    agg["optimizers"] = std::move(per);
    return make_report(s, std::move(runs), std::move(agg));
}

} // namespace

Report run_train(const ExperimentSpec& spec) {
    ExperimentSpec s = spec;
    s.task = Task::train;
    if (s.optimizers.empty()) s.optimizers.push_back(OptimizerKind::adaswarm);
    s.validate();
    return train_many(s);
}

Report run_compare(const ExperimentSpec& spec) {
    ExperimentSpec s = spec;
    s.task = Task::compare;
    s.validate();
    return train_many(s);
}

Report run(const ExperimentSpec& spec) {
    switch (spec.task) {
    case Task::minimize: return run_minimize(spec);
    case Task::train: return run_train(spec);
    case Task::compare: return run_compare(spec);
    case Task::gradsweep: {
        const SweepArtifact a = run_gradsweep(spec);
        ExperimentSpec s = spec;
        s.seeds = 1;
        json agg{{"gbest", a.table.gbest},
                 {"coeff_sum_avg", a.table.coeff_sum_avg},
                 {"interval", {a.interval.low, a.interval.high}},
                 {"sign_agreement", a.table.sign_agreement()}};
        return make_report(s, json::array(), std::move(agg));
    }
    }
    throw ValidationError("unknown task");
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw RunError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw RunError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw RunError("cannot move report into '" + path.string() + "': " + ec.message());
    }
}

std::string dump_report(const Report& report) { return report.dump(2) + "\n"; }

} // namespace swarmgrad
