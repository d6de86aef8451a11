#include "ocprom/evalbench.hpp"

#include "ocprom/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ocprom {

namespace {

double now_seconds()
{
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_disjoint(const RomModel& rom, const SnapshotSet& test)
{
    if (rom.manifest.training_dataset_id == 0 ||
        rom.manifest.training_dataset_id != test.provenance.dataset_id)
        return;   // different generating runs cannot share columns
    for (std::uint32_t c : test.provenance.column_origin)
        if (std::find(rom.manifest.training_columns.begin(), rom.manifest.training_columns.end(),
                      c) != rom.manifest.training_columns.end())
            throw std::invalid_argument(
                "evaluate: test set overlaps the model's training columns (dataset " +
                std::to_string(test.provenance.dataset_id) + ", column " + std::to_string(c) +
                ")");
}

}  // namespace

double rel_l2(const Vector& truth, const Vector& approx, const SparseMatrix& gram)
{
    const Vector diff = truth - approx;
    const double denom = truth.dot(gram * truth);
    if (!(denom > 0.0))
        throw std::invalid_argument("rel_l2: truth has zero norm in the given inner product");
    return std::sqrt(std::max(0.0, diff.dot(gram * diff)) / denom);
}

ErrorReport evaluate(const RomModel& rom, const SnapshotSet& test, const SparseMatrix& gram_y,
                     const SparseMatrix& gram_u, EvalMode mode)
{
    test.validate();
    check_disjoint(rom, test);

    ErrorReport report;
    report.mode = mode;
    const Eigen::Index m = test.columns();
    for (Eigen::Index c = 0; c < m; ++c) {
        Vector y_hat, u_hat;
        if (mode == EvalMode::Reconstruction) {
            y_hat = reducer_decode(rom.state_reducer, reducer_encode(rom.state_reducer, test.y.col(c)));
            u_hat = reducer_decode(rom.control_reducer,
                                   reducer_encode(rom.control_reducer, test.u.col(c)));
        } else {
            const auto& s = test.scenarios[static_cast<size_t>(c)];
            const RomPrediction pred = rom_predict(rom, s.time, s);
            y_hat = pred.y;
            u_hat = pred.u;
        }
        report.eps_state.push_back(rel_l2(test.y.col(c), y_hat, gram_y));
        report.eps_control.push_back(rel_l2(test.u.col(c), u_hat, gram_u));
    }
    report.mean_state = 0.0;
    report.mean_control = 0.0;
    for (size_t i = 0; i < report.eps_state.size(); ++i) {
        report.mean_state += report.eps_state[i];
        report.mean_control += report.eps_control[i];
    }
    report.mean_state /= static_cast<double>(m);
    report.mean_control /= static_cast<double>(m);
    return report;
}

void write_error_report_csv(const ErrorReport& report, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "sample,eps_state,eps_control\n";
    for (size_t i = 0; i < report.eps_state.size(); ++i)
        out << i << ',' << fmt17(report.eps_state[i]) << ',' << fmt17(report.eps_control[i])
            << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

double obs_norm(const SparseMatrix& m_obs, const Vector& y)
{
    return std::sqrt(std::max(0.0, y.dot(m_obs * y)));
}

SweepTable sweep(const RomModel& rom, const OcpProblem& problem, Eigen::Index n1,
                 Eigen::Index n2)
{
    if (n1 < 2 || n2 < 2) throw std::invalid_argument("sweep: lattice needs >= 2 points per axis");
    const ParameterBox& box = rom.box;
    const double t0 = now_seconds();

    SweepTable table;
    table.n1 = n1;
    table.n2 = n2;
    table.rows.resize(static_cast<size_t>(n1 * n2));
    for (Eigen::Index i = 0; i < n1; ++i) {
        const double theta =
            box.lo[0] + (box.hi[0] - box.lo[0]) * static_cast<double>(i) / static_cast<double>(n1 - 1);
        for (Eigen::Index j = 0; j < n2; ++j) {
            const double r =
                box.lo[1] + (box.hi[1] - box.lo[1]) * static_cast<double>(j) / static_cast<double>(n2 - 1);
            Scenario mu;
            mu.params = Vector(2);
            mu.params << theta, r;
            const RomPrediction pred = rom_predict(rom, std::nullopt, mu);
            SweepRow& row = table.rows[static_cast<size_t>(i * n2 + j)];
            row.theta = theta;
            row.r = r;
            row.j = eval_cost(problem, pred.y, pred.u);
            row.obs_norm = obs_norm(problem.ops.m_obs, pred.y);
        }
    }
    table.seconds = now_seconds() - t0;
    return table;
}

void write_sweep_csv(const SweepTable& table, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "theta,r,J,obs_norm\n";
    for (const SweepRow& row : table.rows)
        out << fmt17(row.theta) << ',' << fmt17(row.r) << ',' << fmt17(row.j) << ','
            << fmt17(row.obs_norm) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

EfficacyReport control_efficacy(const OcpProblem& problem, const RomModel& rom, Eigen::Index n1,
                                Eigen::Index n2)
{
    if (n1 < 2 || n2 < 2)
        throw std::invalid_argument("control_efficacy: lattice needs >= 2 points per axis");
    const ParameterBox& box = problem.box;
    const SparseFactorization state_solver(problem.ops.a);

    EfficacyReport report;
    for (Eigen::Index i = 0; i < n1; ++i)
        for (Eigen::Index j = 0; j < n2; ++j) {
            Scenario mu;
            mu.params = Vector(2);
            mu.params << box.lo[0] + (box.hi[0] - box.lo[0]) * static_cast<double>(i) /
                             static_cast<double>(n1 - 1),
                box.lo[1] + (box.hi[1] - box.lo[1]) * static_cast<double>(j) /
                    static_cast<double>(n2 - 1);
            const Vector f = problem.rhs_load(mu);
            const Vector y_free = state_solver.solve(f);
            const RomPrediction pred = rom_predict(rom, std::nullopt, mu);
            const Vector y_ctrl = state_solver.solve(f + problem.ops.b * pred.u);
            report.uncontrolled_mean += obs_norm(problem.ops.m_obs, y_free);
            report.controlled_mean += obs_norm(problem.ops.m_obs, y_ctrl);
        }
    const double count = static_cast<double>(n1 * n2);
    report.uncontrolled_mean /= count;
    report.controlled_mean /= count;
    report.ratio = report.controlled_mean / report.uncontrolled_mean;
    return report;
}

SpeedupReport speedup(const OcpProblem& problem, const RomModel& rom, int n_queries,
                      std::uint64_t seed)
{
    if (n_queries < 1) throw std::invalid_argument("speedup: need at least one ROM query");
    const std::vector<Scenario> scenarios =
        sample_scenarios(problem.box, std::max(n_queries, 5), seed);

    SpeedupReport report;
    report.fom_solves = 5;
    report.rom_queries = n_queries;

    std::vector<double> fom_times;
    volatile double sink = 0.0;   // keep the solves from being optimized out
    for (int i = 0; i < report.fom_solves; ++i) {
        const double t0 = now_seconds();
        // A fresh query pays the whole KKT solve, factorization included.
        const OptimalPair sol = solve_direct(problem, scenarios[static_cast<size_t>(i)]);
        fom_times.push_back(now_seconds() - t0);
        sink = sink + sol.cost;
    }

    std::vector<double> rom_times;
    for (int i = 0; i < n_queries; ++i) {
        const Scenario& mu = scenarios[static_cast<size_t>(i)];
        const double t0 = now_seconds();
        const RomPrediction pred = rom_predict(rom, std::nullopt, mu);
        rom_times.push_back(now_seconds() - t0);
        sink = sink + pred.y[0];
    }
    (void)sink;

    report.fom_seconds = median(std::move(fom_times));
    report.rom_seconds = median(std::move(rom_times));
    report.ratio = report.fom_seconds / report.rom_seconds;
    return report;
}

}  // namespace ocprom
