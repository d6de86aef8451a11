#pragma once

#include "ocprom/linalg.hpp"

#include <optional>

namespace ocprom {

// One point in the time x parameter space. For the thermal-cooling problem
// params = [theta (radians), r] locating the heat source in polar coordinates.
struct Scenario {
    Vector params;
    std::optional<double> time;

    double theta() const { return params[0]; }
    double r() const { return params[1]; }
};

// Per-coordinate bounds of the admissible parameter box.
struct ParameterBox {
    Vector lo;
    Vector hi;

    Eigen::Index dim() const { return lo.size(); }
    bool contains(const Vector& p) const
    {
        for (Eigen::Index i = 0; i < p.size(); ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        return true;
    }
    void validate() const
    {
        if (lo.size() != hi.size() || lo.size() == 0)
            throw std::invalid_argument("ParameterBox: mismatched or empty bounds");
        for (Eigen::Index i = 0; i < lo.size(); ++i)
            if (!(lo[i] <= hi[i]))
                throw std::invalid_argument("ParameterBox: lo > hi in coordinate " +
                                            std::to_string(i));
    }
};

}  // namespace ocprom
