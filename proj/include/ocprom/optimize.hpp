#pragma once

#include "ocprom/linalg.hpp"

#include <functional>

namespace ocprom {

// Objective returning the value and writing the gradient in place.
using Objective = std::function<double(const Vector& x, Vector& grad)>;
using ScalarObjective = std::function<double(const Vector& x)>;

enum class OptimizerKind { Adam, Lbfgs };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Lbfgs;
    int max_iterations = 500;
    double gradient_tolerance = 1e-10;
    double step_size = 1e-3;   // Adam learning rate / initial descent scale
    int lbfgs_memory = 10;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    void validate() const;
};

struct MinimizeResult {
    Vector x;
    std::vector<double> history;   // cost per accepted iterate, history[0] = f(x0)
    bool converged = false;        // gradient tolerance met (vs iteration cap)
    int iterations = 0;
};

struct OptimizeError : std::runtime_error {
    OptimizeError(const std::string& what, Vector last_iterate)
        : std::runtime_error(what), last(std::move(last_iterate)) {}
    Vector last;
};

MinimizeResult minimize(const Objective& f, const Vector& x0, const OptimizerConfig& cfg);

// Central differences, (f(x+h e_i) - f(x-h e_i)) / 2h per coordinate.
Vector finite_diff_gradient(const ScalarObjective& f, const Vector& x, double h);

}  // namespace ocprom
