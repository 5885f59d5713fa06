#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swarmgrad/neural.hpp"
#include "swarmgrad/types.hpp"

namespace swarmgrad {

struct CsvSchema {
    /// Column index ("4") or header name ("class"); empty means the last column.
    std::string label_column;
    /// nullopt: treat the first row as a header when any feature cell in it
    /// is non-numeric.
    std::optional<bool> header;
};

/// Features and label indices as read, before splitting.
struct RawTable {
    std::vector<std::string> feature_names;
    Matrix features;
    std::vector<std::size_t> labels;
    /// Class names in index order (numeric labels sort numerically).
    std::vector<std::string> class_names;
};

/// Throws ParseError (with 1-based line numbers) for unreadable, ragged or
/// non-numeric input and ValidationError for fewer than two rows or classes.
RawTable read_csv(const std::filesystem::path& path, const CsvSchema& schema);

struct Dataset {
    std::string name;
    /// Standardized with the train split's per-column mean and population std.
    Matrix features;
    /// One-hot [rows x classes].
    Matrix labels;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::size_t class_count = 0;
    std::vector<std::string> class_names;
    Vector feature_mean;
    Vector feature_std;

    Matrix rows(const Matrix& m, const std::vector<std::size_t>& idx) const;
};

/// Stratified split: per class, round(train_fraction * count) shuffled rows
/// go to train. Both index lists come back sorted.
void stratified_split(const std::vector<std::size_t>& labels, std::size_t class_count, double train_fraction,
                      std::uint64_t seed, std::vector<std::size_t>& train, std::vector<std::size_t>& test);

Dataset make_dataset(std::string name, const RawTable& raw, std::uint64_t split_seed, double train_fraction = 0.7);

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema, std::uint64_t split_seed,
                 double train_fraction = 0.7);

/// Maps "iris" and "banknote" to files under the data directory; anything
/// else is taken as a path. The Bank Note file can also be pointed to with
/// SWARMGRAD_BANKNOTE_CSV. Throws ValidationError when nothing is found.
std::filesystem::path resolve_dataset(const std::string& name_or_path);

/// Shuffled mini-batches over the given rows; the last batch may be short.
std::vector<Batch> make_batches(const Dataset& data, const std::vector<std::size_t>& rows, std::size_t batch_size,
                                Rng& rng);

} // namespace swarmgrad
