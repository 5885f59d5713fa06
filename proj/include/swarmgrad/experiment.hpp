#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmgrad/grad_bridge.hpp"
#include "swarmgrad/losses.hpp"
#include "swarmgrad/optimizers.hpp"
#include "swarmgrad/swarm.hpp"

namespace swarmgrad {

enum class Task { minimize, gradsweep, train, compare };

std::string to_string(Task t);
Task parse_task(std::string_view name);

/// Declarative description of one experiment. Field names double as CLI
/// flag names (underscores become dashes) and config-file keys.
struct ExperimentSpec {
    Task task = Task::minimize;

    // Function minimization and gradient sweeps.
    std::string function;
    SwarmVariant variant = SwarmVariant::empso;
    std::size_t particles = 20;
    double c1 = 0.8;
    double c2 = 0.9;
    /// EMPSO momentum factor; also the SGD-momentum beta of the emulation.
    double beta = 0.9;
    double inertia = 0.5;
    double lambda = 0.1;
    double value_tolerance = 1e-3;
    std::size_t max_iterations = 1000;
    std::size_t steps_per_query = 1;
    double shift_alpha = 0.0;
    /// Sweep interval; defaults to gbest +/- 1.
    std::optional<double> sweep_low;
    std::optional<double> sweep_high;
    std::size_t points = 101;

    // Training.
    std::string dataset;
    std::string label_column;
    std::optional<bool> header;
    std::vector<OptimizerKind> optimizers;
    LossKind loss = LossKind::mse;
    /// Unset fields fall back to each rule's default.
    std::optional<double> eta;
    std::optional<double> beta1;
    std::optional<double> beta2;
    std::optional<double> epsilon;
    std::optional<double> momentum;
    std::optional<double> rho;
    std::size_t epochs = 200;
    std::size_t patience = 20;
    std::size_t batch_size = 16;
    std::size_t hidden = 10;
    std::size_t swarm_steps = 20;
    bool swarm_warm_start = false;
    double train_fraction = 0.7;
    double accuracy_threshold = 0.9;

    // Common.
    std::uint64_t seed = 1;
    /// Number of repetitions; run r uses seed + r.
    std::size_t seeds = 10;
    std::string out;
    bool timestamp = false;

    /// Throws ValidationError naming the offending field.
    void validate() const;
    std::vector<std::uint64_t> seed_list() const;
    nlohmann::json to_json() const;
    static ExperimentSpec from_json(const nlohmann::json& doc);
};

/// Report document with keys config, seeds, runs, aggregates.
using Report = nlohmann::json;

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    /// Sample standard deviation (n - 1); 0 for a single value.
    double std = 0.0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

Summary summarize(std::vector<double> values);
nlohmann::json to_json(const Summary& s);

/// Projected gradient descent with the closed-form derivative; stops when
/// successive values differ by less than tolerance.
Trajectory plain_gd(const Objective& objective, double eta, const Vector& w0, double tolerance,
                    std::size_t max_iterations);

Report run_minimize(const ExperimentSpec& spec);

struct SweepArtifact {
    SweepTable table;
    Bound interval;
};

SweepArtifact run_gradsweep(const ExperimentSpec& spec);

Report run_train(const ExperimentSpec& spec);
Report run_compare(const ExperimentSpec& spec);

/// Dispatches on spec.task (gradsweep yields its summary as a report).
Report run(const ExperimentSpec& spec);

/// Writes through a temporary sibling file and renames it into place.
void write_atomically(const std::filesystem::path& path, const std::string& content);

std::string dump_report(const Report& report);

} // namespace swarmgrad
