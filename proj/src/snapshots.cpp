#include "ocprom/snapshots.hpp"

#include "ocprom/binio.hpp"
#include "ocprom/rng.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

namespace ocprom {

namespace {

constexpr char kMagic[8] = {'O', 'C', 'P', 'S', 'N', 'A', 'P', '1'};

}  // namespace

void SnapshotSet::validate() const
{
    if (y.cols() != u.cols() || static_cast<size_t>(y.cols()) != scenarios.size())
        throw std::runtime_error("SnapshotSet: column/scenario count mismatch");
}

std::vector<Scenario> sample_scenarios(const ParameterBox& box, int count, std::uint64_t seed)
{
    box.validate();
    if (count < 1) throw std::invalid_argument("sample_scenarios: count must be >= 1");
    SplitMix64 rng(seed);
    std::vector<Scenario> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        Scenario s;
        s.params.resize(box.dim());
        for (Eigen::Index d = 0; d < box.dim(); ++d)
            s.params[d] = rng.next_uniform(box.lo[d], box.hi[d]);
        out.push_back(std::move(s));
    }
    return out;
}

SnapshotSet generate(const OcpProblem& problem, const std::vector<Scenario>& scenarios,
                     int workers, std::uint64_t seed)
{
    problem.validate();
    if (scenarios.empty()) throw std::invalid_argument("generate: no scenarios");
    workers = std::max(1, workers);

    const int nt = problem.unsteady ? problem.unsteady->steps : 1;
    const Eigen::Index m = static_cast<Eigen::Index>(scenarios.size()) * nt;

    SnapshotSet set;
    set.y.resize(problem.ops.n_state(), m);
    set.u.resize(problem.ops.n_control(), m);
    set.scenarios.resize(static_cast<size_t>(m));
    if (problem.unsteady) {
        set.time_grid.resize(nt);
        const double dt = problem.unsteady->final_time / nt;
        for (int j = 0; j < nt; ++j) set.time_grid[j] = (j + 1) * dt;
    }

    // Snapshot-grade optimizer config for the unsteady march.
    OptimizerConfig ucfg;
    ucfg.kind = OptimizerKind::Lbfgs;
    ucfg.gradient_tolerance = 1e-10;
    ucfg.max_iterations = 5000;
    ucfg.lbfgs_memory = 30;

    std::optional<DirectSolver> direct;
    if (!problem.unsteady) direct.emplace(problem);

    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::string error_message;

    auto worker_loop = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= static_cast<int>(scenarios.size())) break;
            try {
                if (problem.unsteady) {
                    const OptimalPair pair = solve_unsteady(problem, scenarios[i], ucfg);
                    for (int j = 0; j < nt; ++j) {
                        const Eigen::Index col = static_cast<Eigen::Index>(i) * nt + j;
                        set.y.col(col) = pair.y_traj.col(j);
                        set.u.col(col) = pair.u_traj.col(j);
                        Scenario s = scenarios[i];
                        s.time = set.time_grid[j];
                        set.scenarios[static_cast<size_t>(col)] = std::move(s);
                    }
                } else {
                    const OptimalPair pair = direct->solve(scenarios[i]);
                    set.y.col(i) = pair.y;
                    set.u.col(i) = pair.u;
                    set.scenarios[static_cast<size_t>(i)] = scenarios[i];
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (error_message.empty()) {
                    error_message = "generate: solve failed for scenario " + std::to_string(i) +
                                    " (params";
                    for (Eigen::Index d = 0; d < scenarios[i].params.size(); ++d)
                        error_message += " " + std::to_string(scenarios[i].params[d]);
                    error_message += "): " + std::string(e.what());
                }
            }
        }
    };

    if (workers == 1) {
        worker_loop();
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(worker_loop);
        for (auto& t : threads) t.join();
    }
    if (!error_message.empty()) throw std::runtime_error(error_message);

    set.provenance.mesh_hash = problem.mesh_hash;
    set.provenance.seed = seed;
    set.provenance.nu = problem.nu;
    set.provenance.gamma = problem.gamma;
    set.provenance.y_ext = problem.y_ext;
    set.provenance.beta = problem.beta;
    set.provenance.beta_g = problem.beta_g;
    set.provenance.solver_config =
        problem.unsteady ? "unsteady lbfgs tol=1e-10" : "direct kkt sparse-lu";
    set.provenance.column_origin.resize(static_cast<size_t>(m));
    std::iota(set.provenance.column_origin.begin(), set.provenance.column_origin.end(), 0u);
    {
        // Dataset id ties the split halves back to this generation run.
        Fnv1a h;
        h.update(&problem.mesh_hash, sizeof problem.mesh_hash);
        h.update(&seed, sizeof seed);
        const auto mcount = static_cast<std::uint64_t>(m);
        h.update(&mcount, sizeof mcount);
        for (const auto& s : scenarios)
            h.update(s.params.data(), sizeof(double) * static_cast<size_t>(s.params.size()));
        set.provenance.dataset_id = h.digest();
    }
    return set;
}

SplitResult split(const SnapshotSet& set, double test_fraction, std::uint64_t seed)
{
    set.validate();
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("split: test fraction must lie in (0,1)");
    const Eigen::Index m = set.columns();
    const Eigen::Index n_test = static_cast<Eigen::Index>(std::llround(test_fraction * m));
    if (n_test == 0 || n_test == m)
        throw std::invalid_argument("split: fraction yields an empty side");

    std::vector<Eigen::Index> perm(static_cast<size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    SplitMix64 rng(seed);
    for (Eigen::Index i = m - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[i], perm[j]);
    }

    auto take = [&](Eigen::Index begin, Eigen::Index count) {
        SnapshotSet out;
        out.y.resize(set.y.rows(), count);
        out.u.resize(set.u.rows(), count);
        out.scenarios.resize(static_cast<size_t>(count));
        out.time_grid = set.time_grid;
        out.provenance = set.provenance;
        out.provenance.column_origin.resize(static_cast<size_t>(count));
        for (Eigen::Index k = 0; k < count; ++k) {
            const Eigen::Index src = perm[static_cast<size_t>(begin + k)];
            out.y.col(k) = set.y.col(src);
            out.u.col(k) = set.u.col(src);
            out.scenarios[static_cast<size_t>(k)] = set.scenarios[static_cast<size_t>(src)];
            out.provenance.column_origin[static_cast<size_t>(k)] =
                set.provenance.column_origin[static_cast<size_t>(src)];
        }
        return out;
    };

    SplitResult res;
    res.train = take(0, m - n_test);
    res.test = take(m - n_test, n_test);
    return res;
}

void save_snapshots(const SnapshotSet& set, const std::string& path)
{
    set.validate();
    const Eigen::Index m = set.columns();
    const Eigen::Index p = m > 0 ? set.scenarios[0].params.size() : 0;

    ByteWriter w;
    w.write_bytes(kMagic, sizeof kMagic);
    w.write_u32(static_cast<std::uint32_t>(set.y.rows()));
    w.write_u32(static_cast<std::uint32_t>(set.u.rows()));
    w.write_u32(static_cast<std::uint32_t>(m));
    w.write_u32(static_cast<std::uint32_t>(set.time_grid.size()));
    w.write_u32(static_cast<std::uint32_t>(p));

    const auto& prov = set.provenance;
    w.write_u64(prov.mesh_hash);
    w.write_u64(prov.seed);
    w.write_u64(prov.dataset_id);
    w.write_f64(prov.nu);
    w.write_f64(prov.gamma);
    w.write_f64(prov.y_ext);
    w.write_f64(prov.beta);
    w.write_f64(prov.beta_g);
    w.write_u32(static_cast<std::uint32_t>(prov.solver_config.size()));
    w.write_bytes(prov.solver_config.data(), prov.solver_config.size());
    w.write_u32(static_cast<std::uint32_t>(prov.column_origin.size()));
    for (std::uint32_t c : prov.column_origin) w.write_u32(c);

    // Scenario table: one row per column, params then the time stamp
    // (written only when a time grid is present).
    for (const auto& s : set.scenarios) {
        w.write_f64_array(s.params.data(), static_cast<size_t>(p));
        if (set.time_grid.size() > 0) w.write_f64(s.time.value_or(0.0));
    }
    w.write_f64_array(set.time_grid.data(), static_cast<size_t>(set.time_grid.size()));
    w.write_f64_array(set.y.data(), static_cast<size_t>(set.y.size()));
    w.write_f64_array(set.u.data(), static_cast<size_t>(set.u.size()));

    Fnv1a checksum;
    checksum.update(w.bytes().data(), w.bytes().size());
    w.write_u64(checksum.digest());
    write_file_bytes(path, w.bytes());
}

SnapshotSet load_snapshots(const std::string& path)
{
    const auto bytes = read_file_bytes(path);
    if (bytes.size() < sizeof(kMagic) + 8)
        throw FileFormatError(FileFormatError::Kind::Truncated, "snapshot file too short: " + path);
    if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw FileFormatError(FileFormatError::Kind::MagicMismatch,
                              "not a snapshot file (bad magic): " + path);
    {
        Fnv1a checksum;
        checksum.update(bytes.data(), bytes.size() - 8);
        ByteReader tail(bytes.data() + bytes.size() - 8, 8);
        if (tail.read_u64() != checksum.digest())
            throw FileFormatError(FileFormatError::Kind::ChecksumMismatch,
                                  "snapshot checksum mismatch: " + path);
    }

    ByteReader r(bytes.data() + sizeof kMagic, bytes.size() - sizeof kMagic - 8);
    SnapshotSet set;
    const std::uint32_t ny = r.read_u32();
    const std::uint32_t nu = r.read_u32();
    const std::uint32_t m = r.read_u32();
    const std::uint32_t nt = r.read_u32();
    const std::uint32_t p = r.read_u32();

    auto& prov = set.provenance;
    prov.mesh_hash = r.read_u64();
    prov.seed = r.read_u64();
    prov.dataset_id = r.read_u64();
    prov.nu = r.read_f64();
    prov.gamma = r.read_f64();
    prov.y_ext = r.read_f64();
    prov.beta = r.read_f64();
    prov.beta_g = r.read_f64();
    const std::uint32_t cfg_len = r.read_u32();
    prov.solver_config.resize(cfg_len);
    if (cfg_len) r.read_bytes(prov.solver_config.data(), cfg_len);
    const std::uint32_t origin_count = r.read_u32();
    if (origin_count != m)
        throw FileFormatError(FileFormatError::Kind::BadHeader,
                              "column-origin count disagrees with column count: " + path);
    prov.column_origin.resize(origin_count);
    for (auto& c : prov.column_origin) c = r.read_u32();

    set.scenarios.resize(m);
    for (auto& s : set.scenarios) {
        s.params.resize(p);
        for (std::uint32_t d = 0; d < p; ++d) s.params[d] = r.read_f64();
        if (nt > 0) s.time = r.read_f64();
    }
    set.time_grid.resize(nt);
    for (std::uint32_t j = 0; j < nt; ++j) set.time_grid[j] = r.read_f64();

    const std::uint64_t payload =
        static_cast<std::uint64_t>(ny) * m + static_cast<std::uint64_t>(nu) * m;
    if (r.remaining() != payload * 8)
        throw FileFormatError(FileFormatError::Kind::Truncated,
                              "payload length disagrees with header dimensions: " + path);
    set.y.resize(ny, m);
    for (Eigen::Index i = 0; i < set.y.size(); ++i) set.y.data()[i] = r.read_f64();
    set.u.resize(nu, m);
    for (Eigen::Index i = 0; i < set.u.size(); ++i) set.u.data()[i] = r.read_f64();
    set.validate();
    return set;
}

void export_snapshots_csv(const SnapshotSet& set, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out.precision(17);
    out << "column,time,";
    for (Eigen::Index d = 0; d < set.scenarios[0].params.size(); ++d) out << "param" << d << ",";
    out << "y_norm,u_norm\n";
    for (Eigen::Index c = 0; c < set.columns(); ++c) {
        const auto& s = set.scenarios[static_cast<size_t>(c)];
        out << c << "," << s.time.value_or(0.0) << ",";
        for (Eigen::Index d = 0; d < s.params.size(); ++d) out << s.params[d] << ",";
        out << set.y.col(c).norm() << "," << set.u.col(c).norm() << "\n";
    }
}

double verify_columns(const SnapshotSet& set, const OcpProblem& problem, int count,
                      std::uint64_t seed)
{
    set.validate();
    if (problem.unsteady)
        throw std::invalid_argument("verify_columns: steady snapshot sets only");
    SplitMix64 rng(seed);
    double worst = 0.0;
    for (int k = 0; k < count; ++k) {
        const auto c = static_cast<Eigen::Index>(
            rng.next_below(static_cast<std::uint64_t>(set.columns())));
        const Vector f = problem.rhs_load(set.scenarios[static_cast<size_t>(c)]);
        const double res = (problem.ops.a * set.y.col(c) - problem.ops.b * set.u.col(c) - f).norm();
        worst = std::max(worst, res / f.norm());
    }
    return worst;
}

}  // namespace ocprom
