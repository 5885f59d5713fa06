#pragma once

#include <vector>

#include <Eigen/Dense>

namespace swarmgrad {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Closed search interval for one coordinate.
struct Bound {
    double low = 0.0;
    double high = 0.0;

    double clamp(double x) const { return x < low ? low : (x > high ? high : x); }
    bool contains(double x) const { return x >= low && x <= high; }
    bool operator==(const Bound&) const = default;
};

using Bounds = std::vector<Bound>;

} // namespace swarmgrad
