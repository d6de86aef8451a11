#pragma once

#include "ocprom/ocp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ocprom {

// Where a dataset came from: enough to reproduce it and to check that a
// train/test pair shares no columns.
struct Provenance {
    std::uint64_t mesh_hash = 0;
    std::uint64_t seed = 0;
    std::uint64_t dataset_id = 0;    // hash of the generating run, shared by splits
    double nu = 0.0, gamma = 0.0, y_ext = 0.0, beta = 0.0, beta_g = 0.0;
    std::string solver_config;
    std::vector<std::uint32_t> column_origin;  // original column index of each column
};

// Paired optimal state/control snapshot matrices, one column per
// (time, scenario) pair.
struct SnapshotSet {
    DenseMatrix y;                    // n_state x M
    DenseMatrix u;                    // n_control x M
    std::vector<Scenario> scenarios;  // length M, time set for unsteady data
    Vector time_grid;                 // empty for steady data
    Provenance provenance;

    Eigen::Index columns() const { return y.cols(); }
    void validate() const;
};

std::vector<Scenario> sample_scenarios(const ParameterBox& box, int count, std::uint64_t seed);

// Solves every scenario with the direct solver (or the unsteady march) and
// stacks the optimal pairs column by column, scenario-major then time-major.
// `workers` only distributes the scenario loop; the result is identical for
// any worker count.
SnapshotSet generate(const OcpProblem& problem, const std::vector<Scenario>& scenarios,
                     int workers = 1, std::uint64_t seed = 0);

struct SplitResult {
    SnapshotSet train;
    SnapshotSet test;
};

SplitResult split(const SnapshotSet& set, double test_fraction, std::uint64_t seed);

void save_snapshots(const SnapshotSet& set, const std::string& path);
SnapshotSet load_snapshots(const std::string& path);

void export_snapshots_csv(const SnapshotSet& set, const std::string& path);

// Spot-check: re-substitute `count` random columns into the state equation
// and report the worst relative residual.
double verify_columns(const SnapshotSet& set, const OcpProblem& problem, int count,
                      std::uint64_t seed);

}  // namespace ocprom
