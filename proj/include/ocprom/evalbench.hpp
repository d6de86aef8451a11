#pragma once

#include "ocprom/ocp.hpp"
#include "ocprom/surrogate.hpp"

namespace ocprom {

// sqrt((t-a)' G (t-a) / t' G t); G is the L2 mass matrix of the relevant
// domain (state: Omega, control: Omega_c).
double rel_l2(const Vector& truth, const Vector& approx, const SparseMatrix& gram);

enum class EvalMode : std::uint8_t {
    Reconstruction,   // decode(encode(truth)): reducer quality only
    Prediction,       // full rom_predict from the scenario
};

struct ErrorReport {
    EvalMode mode = EvalMode::Prediction;
    std::vector<double> eps_state;     // per test sample
    std::vector<double> eps_control;
    double mean_state = 0.0;
    double mean_control = 0.0;
};

// Test-set errors against the stored optima. Refuses test sets whose columns
// overlap the model's training columns (same dataset, intersecting origins).
ErrorReport evaluate(const RomModel& rom, const SnapshotSet& test, const SparseMatrix& gram_y,
                     const SparseMatrix& gram_u, EvalMode mode);

void write_error_report_csv(const ErrorReport& report, const std::string& path);

struct SweepRow {
    double theta = 0.0;
    double r = 0.0;
    double j = 0.0;
    double obs_norm = 0.0;   // ||y||_{L2(Gamma_obs)}
};

struct SweepTable {
    Eigen::Index n1 = 0;              // theta samples
    Eigen::Index n2 = 0;              // r samples
    std::vector<SweepRow> rows;       // row-major: theta index outer
    double seconds = 0.0;
};

// Evaluates the ROM on an inclusive n1 x n2 lattice over the parameter box,
// reporting the cost and the observed boundary norm per point.
SweepTable sweep(const RomModel& rom, const OcpProblem& problem, Eigen::Index n1,
                 Eigen::Index n2);

void write_sweep_csv(const SweepTable& table, const std::string& path);

struct SpeedupReport {
    double fom_seconds = 0.0;   // median full-order KKT solve
    double rom_seconds = 0.0;   // median rom_predict
    double ratio = 0.0;
    int fom_solves = 0;
    int rom_queries = 0;
};

// Median wall-clock of full-order solves (>= 5) against n_queries ROM
// predictions at seeded random scenarios.
SpeedupReport speedup(const OcpProblem& problem, const RomModel& rom, int n_queries,
                      std::uint64_t seed);

// ||y||_{L2(Gamma_obs)} via the boundary-observation mass matrix.
double obs_norm(const SparseMatrix& m_obs, const Vector& y);

struct EfficacyReport {
    double controlled_mean = 0.0;     // mean ||y||_{L2(Gamma_obs)} with ROM controls
    double uncontrolled_mean = 0.0;   // mean with u = 0
    double ratio = 0.0;
};

// Re-solves the state equation under the ROM-predicted controls on an
// n1 x n2 scenario lattice and compares the observed boundary norms against
// the uncontrolled solves.
EfficacyReport control_efficacy(const OcpProblem& problem, const RomModel& rom, Eigen::Index n1,
                                Eigen::Index n2);

}  // namespace ocprom
