#include "swarmgrad/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "swarmgrad/errors.hpp"
#include "swarmgrad/random.hpp"

#ifndef SWARMGRAD_DATA_DIR
#define SWARMGRAD_DATA_DIR "data"
#endif

namespace swarmgrad {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* begin = s.data() + (s.front() == '+' ? 1 : 0);
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

} // namespace

RawTable read_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");

    std::vector<std::pair<std::size_t, std::vector<std::string>>> lines;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        lines.emplace_back(line_no, split_line(line));
    }
    if (lines.empty()) throw ParseError("'" + path.string() + "' is empty");

    const std::size_t width = lines.front().second.size();
    if (width < 2) throw ParseError("line " + std::to_string(lines.front().first) + ": need at least 2 columns");
    for (const auto& [no, cells] : lines) {
        if (cells.size() != width) {
            throw ParseError("line " + std::to_string(no) + ": expected " + std::to_string(width) + " cells, got " +
                             std::to_string(cells.size()));
        }
    }

    // Label column by index or, failing that, by header name.
    std::optional<std::size_t> label_idx;
    const std::string& lc = schema.label_column;
    if (lc.empty()) {
        label_idx = width - 1;
    } else if (std::all_of(lc.begin(), lc.end(), [](unsigned char c) { return std::isdigit(c); })) {
        label_idx = static_cast<std::size_t>(std::stoul(lc));
        if (*label_idx >= width) throw ValidationError("label column " + lc + " out of range");
    }

    bool header = false;
    if (schema.header) {
        header = *schema.header;
    } else if (label_idx) {
        const auto& first = lines.front().second;
        for (std::size_t c = 0; c < width; ++c) {
            if (c != *label_idx && !parse_number(first[c])) header = true;
        }
    } else {
        header = true;
    }
    if (!label_idx) {
        if (!header) throw ValidationError("label column '" + lc + "' given by name but the file has no header");
        const auto& names = lines.front().second;
        const auto it = std::find(names.begin(), names.end(), lc);
        if (it == names.end()) throw ValidationError("no column named '" + lc + "'");
        label_idx = static_cast<std::size_t>(it - names.begin());
    }

    RawTable raw;
    for (std::size_t c = 0; c < width; ++c) {
        if (c == *label_idx) continue;
        raw.feature_names.push_back(header ? lines.front().second[c] : "x" + std::to_string(c));
    }
    const std::size_t first_row = header ? 1 : 0;
    const std::size_t rows = lines.size() - first_row;
    if (rows == 0) throw ParseError("'" + path.string() + "' has a header but no data rows");
    if (rows < 2) throw ValidationError("'" + path.string() + "' needs at least 2 data rows");

    raw.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width - 1));
    std::vector<std::string> label_text(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& [no, cells] = lines[first_row + r];
        Eigen::Index f = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (c == *label_idx) {
                if (cells[c].empty()) throw ParseError("line " + std::to_string(no) + ": empty label");
                label_text[r] = cells[c];
                continue;
            }
            const auto v = parse_number(cells[c]);
            if (!v) {
                throw ParseError("line " + std::to_string(no) + ", column " + std::to_string(c + 1) +
                                 ": non-numeric feature '" + cells[c] + "'");
            }
            raw.features(static_cast<Eigen::Index>(r), f++) = *v;
        }
    }

    std::vector<std::string> names = label_text;
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    const bool numeric = std::all_of(names.begin(), names.end(), [](const auto& s) { return parse_number(s); });
    if (numeric) {
        std::sort(names.begin(), names.end(),
                  [](const auto& a, const auto& b) { return *parse_number(a) < *parse_number(b); });
    }
    if (names.size() < 2) throw ValidationError("'" + path.string() + "' contains a single class");
    std::map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < names.size(); ++k) index[names[k]] = k;
    raw.labels.reserve(rows);
    for (const auto& t : label_text) raw.labels.push_back(index.at(t));
    raw.class_names = std::move(names);
    return raw;
}

Matrix Dataset::rows(const Matrix& m, const std::vector<std::size_t>& idx) const {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

void stratified_split(const std::vector<std::size_t>& labels, std::size_t class_count, double train_fraction,
                      std::uint64_t seed, std::vector<std::size_t>& train, std::vector<std::size_t>& test) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
    train.clear();
    test.clear();
    Rng rng(seed);
    for (std::size_t k = 0; k < class_count; ++k) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == k) members.push_back(i);
        }
        // Fisher-Yates with the portable uniform draw.
        for (std::size_t i = members.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
            std::swap(members[i - 1], members[j]);
        }
        const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(members.size())));
        train.insert(train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
        test.insert(test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
}

Dataset make_dataset(std::string name, const RawTable& raw, std::uint64_t split_seed, double train_fraction) {
    Dataset d;
    d.name = std::move(name);
    d.class_count = raw.class_names.size();
    d.class_names = raw.class_names;
    stratified_split(raw.labels, d.class_count, train_fraction, split_seed, d.train, d.test);
    if (d.train.empty() || d.test.empty()) throw ValidationError("dataset too small for a train/test split");

    const Matrix train_x = d.rows(raw.features, d.train);
    d.feature_mean = train_x.colwise().mean().transpose();
    d.feature_std = ((train_x.rowwise() - d.feature_mean.transpose()).array().square().colwise().mean().sqrt())
                        .matrix()
                        .transpose();
    for (Eigen::Index c = 0; c < d.feature_std.size(); ++c) {
        if (d.feature_std[c] == 0.0) d.feature_std[c] = 1.0;
    }
    d.features = ((raw.features.rowwise() - d.feature_mean.transpose()).array().rowwise() /
                  d.feature_std.transpose().array())
                     .matrix();

    d.labels = Matrix::Zero(raw.features.rows(), static_cast<Eigen::Index>(d.class_count));
    for (std::size_t i = 0; i < raw.labels.size(); ++i) {
        d.labels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(raw.labels[i])) = 1.0;
    }
    return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema, std::uint64_t split_seed,
                 double train_fraction) {
    return make_dataset(path.stem().string(), read_csv(path, schema), split_seed, train_fraction);
}

std::filesystem::path resolve_dataset(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    const fs::path data_dir = SWARMGRAD_DATA_DIR;
    std::vector<fs::path> candidates;
    if (name_or_path == "iris") {
        candidates.push_back(data_dir / "iris.csv");
    } else if (name_or_path == "banknote") {
        if (const char* env = std::getenv("SWARMGRAD_BANKNOTE_CSV")) candidates.emplace_back(env);
        candidates.push_back(data_dir / "banknote.csv");
    } else {
        candidates.emplace_back(name_or_path);
    }
    for (const auto& p : candidates) {
        if (fs::is_regular_file(p)) return p;
    }
    throw ValidationError("dataset '" + name_or_path + "' not found (looked at " + candidates.front().string() + ")");
}

std::vector<Batch> make_batches(const Dataset& data, const std::vector<std::size_t>& rows, std::size_t batch_size,
                                Rng& rng) {
    if (batch_size == 0) throw ConfigError("batch size must be >= 1");
    std::vector<std::size_t> order = rows;
    for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
        std::swap(order[i - 1], order[j]);
    }
    std::vector<Batch> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + batch_size)));
        batches.push_back({data.rows(data.features, idx), data.rows(data.labels, idx)});
    }
    return batches;
}

} // namespace swarmgrad
