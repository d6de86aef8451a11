#include "ocprom/binio.hpp"
#include "ocprom/pipeline.hpp"
#include "ocprom/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ocprom;

namespace {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level()
{
    const char* env = std::getenv("OCPROM_LOG");
    if (!env) return LogLevel::Info;
    const std::string v = env;
    if (v == "error") return LogLevel::Error;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    throw std::invalid_argument("OCPROM_LOG must be one of error, info, debug");
}

void log_info(const std::string& msg)
{
    if (log_level() >= LogLevel::Info) std::cerr << "[info] " << msg << "\n";
}

double now_seconds()
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
};

RunConfig resolve_config(const CommonOpts& opts)
{
    RunConfig cfg = opts.config_path.empty() ? parse_config("{}") : load_config(opts.config_path);
    if (opts.seed_set) cfg.sample_seed = opts.seed;
    if (opts.workers > 0) cfg.workers = opts.workers;
    return cfg;
}

std::string out_path(const CommonOpts& opts, const std::string& rel)
{
    fs::create_directories(opts.out_dir);
    return fs::path(rel).is_absolute() ? rel : (fs::path(opts.out_dir) / rel).string();
}

void check_mesh_hash(const PipelineContext& ctx, const Provenance& prov, const std::string& what)
{
    const std::uint64_t mesh_hash = ctx.mesh->content_hash();
    if (prov.mesh_hash != mesh_hash)
        throw std::runtime_error("provenance mismatch: " + what + " was generated on mesh " +
                                 std::to_string(prov.mesh_hash) + " but the config builds mesh " +
                                 std::to_string(mesh_hash));
}

void check_training_hash(const RomModel& rom, const std::string& train_path)
{
    const std::uint64_t actual = hash_file(train_path);
    if (rom.manifest.training_file_hash != actual)
        throw std::runtime_error("provenance mismatch: model expects training file hash " +
                                 std::to_string(rom.manifest.training_file_hash) + " but " +
                                 train_path + " hashes to " + std::to_string(actual));
}

void emit(const json& summary) { std::cout << summary.dump(2) << std::endl; }

// --- commands --------------------------------------------------------------

int cmd_snapshots(const CommonOpts& opts)
{
    const RunConfig cfg = resolve_config(opts);
    const double t0 = now_seconds();
    const PipelineContext ctx = make_context(cfg);
    log_info("mesh: " + std::to_string(ctx.mesh->nodes.size()) + " nodes, " +
             std::to_string(ctx.mesh->triangles.size()) + " triangles");
    const SnapshotSet all = pipeline_snapshots(ctx, cfg);
    const SplitResult parts = split(all, cfg.test_fraction, cfg.split_seed);

    const std::string all_path = out_path(opts, cfg.snapshots_path);
    const std::string train_path = out_path(opts, cfg.train_path);
    const std::string test_path = out_path(opts, cfg.test_path);
    save_snapshots(all, all_path);
    save_snapshots(parts.train, train_path);
    save_snapshots(parts.test, test_path);

    emit(json{{"command", "snapshots"},
              {"snapshots", all.columns()},
              {"train", parts.train.columns()},
              {"test", parts.test.columns()},
              {"dataset_id", all.provenance.dataset_id},
              {"files",
               {{"snapshots", all_path}, {"train", train_path}, {"test", test_path}}},
              {"hashes",
               {{"snapshots", hash_file(all_path)},
                {"train", hash_file(train_path)},
                {"test", hash_file(test_path)}}},
              {"seconds", now_seconds() - t0}});
    return 0;
}

int cmd_reduce(const CommonOpts& opts)
{
    const RunConfig cfg = resolve_config(opts);
    const double t0 = now_seconds();
    const PipelineContext ctx = make_context(cfg);
    const std::string train_path = out_path(opts, cfg.train_path);
    const SnapshotSet train = load_snapshots(train_path);
    check_mesh_hash(ctx, train.provenance, "training set");

    RomModel rom;
    const auto ae_report = build_reducers(rom, cfg, train);
    rom.manifest.training_file_hash = hash_file(train_path);

    const std::string model_path = out_path(opts, cfg.model_path);
    save_model(rom, model_path);

    json summary{{"command", "reduce"},
                 {"kind", static_cast<int>(cfg.kind)},
                 {"latent_state", rom.latent_y()},
                 {"latent_control", rom.latent_u()},
                 {"model", model_path},
                 {"model_hash", hash_file(model_path)},
                 {"seconds", now_seconds() - t0}};
    if (ae_report)
        summary["ae"] = {{"final_loss", ae_report->loss_history.back()},
                         {"iterations", ae_report->loss_history.size() - 1},
                         {"converged", ae_report->converged}};
    emit(summary);
    return 0;
}

int cmd_train(const CommonOpts& opts)
{
    const RunConfig cfg = resolve_config(opts);
    const double t0 = now_seconds();
    const std::string train_path = out_path(opts, cfg.train_path);
    const std::string model_path = out_path(opts, cfg.model_path);
    RomModel rom = load_model(model_path);
    check_training_hash(rom, train_path);
    const SnapshotSet train = load_snapshots(train_path);

    const PhiTrainReport report = pipeline_train(rom, train, cfg);
    rom.manifest.training_file_hash = hash_file(train_path);
    save_model(rom, model_path);

    emit(json{{"command", "train"},
              {"final_loss", report.loss_history.back()},
              {"iterations", report.loss_history.size() - 1},
              {"converged", report.converged},
              {"model", model_path},
              {"model_hash", hash_file(model_path)},
              {"seconds", now_seconds() - t0}});
    return 0;
}

int cmd_eval(const CommonOpts& opts)
{
    const RunConfig cfg = resolve_config(opts);
    const double t0 = now_seconds();
    const PipelineContext ctx = make_context(cfg);
    const RomModel rom = load_model(out_path(opts, cfg.model_path));
    const SnapshotSet test = load_snapshots(out_path(opts, cfg.test_path));
    check_mesh_hash(ctx, test.provenance, "test set");

    const auto& ops = ctx.problem.ops;
    const ErrorReport rec = evaluate(rom, test, ops.m, ops.mc, EvalMode::Reconstruction);
    const ErrorReport pred = evaluate(rom, test, ops.m, ops.mc, EvalMode::Prediction);
    const std::string rec_path = out_path(opts, "eval_reconstruction.csv");
    const std::string pred_path = out_path(opts, "eval_prediction.csv");
    write_error_report_csv(rec, rec_path);
    write_error_report_csv(pred, pred_path);

    emit(json{{"command", "eval"},
              {"reconstruction", {{"eps_state", rec.mean_state}, {"eps_control", rec.mean_control}}},
              {"prediction", {{"eps_state", pred.mean_state}, {"eps_control", pred.mean_control}}},
              {"files", {{"reconstruction", rec_path}, {"prediction", pred_path}}},
              {"seconds", now_seconds() - t0}});
    return 0;
}

void write_column_csv(const std::string& path, const Vector& v)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "value\n";
    char buf[40];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        out << buf << '\n';
    }
}

int cmd_predict(const CommonOpts& opts, double theta, double r, bool verify)
{
    const RunConfig cfg = resolve_config(opts);
    const double t0 = now_seconds();
    const RomModel rom = load_model(out_path(opts, cfg.model_path));

    Scenario mu;
    mu.params = Vector(2);
    mu.params << theta, r;
    const RomPrediction pred = rom_predict(rom, std::nullopt, mu);

    const std::string y_path = out_path(opts, "predict_y.csv");
    const std::string u_path = out_path(opts, "predict_u.csv");
    write_column_csv(y_path, pred.y);
    write_column_csv(u_path, pred.u);

    json summary{{"command", "predict"},
                 {"theta", theta},
                 {"r", r},
                 {"extrapolated", pred.extrapolated},
                 {"files", {{"state", y_path}, {"control", u_path}}}};
    if (verify) {
        const PipelineContext ctx = make_context(cfg);
        const OptimalPair truth = solve_direct(ctx.problem, mu);
        summary["verify"] = {
            {"eps_state", rel_l2(truth.y, pred.y, ctx.problem.ops.m)},
            {"eps_control", rel_l2(truth.u, pred.u, ctx.problem.ops.mc)},
            {"cost_full_order", truth.cost},
            {"cost_predicted", eval_cost(ctx.problem, pred.y, pred.u)}};
    }
    summary["seconds"] = now_seconds() - t0;
    emit(summary);
    return 0;
}

int cmd_sweep(const CommonOpts& opts, int n1, int n2)
{
    const RunConfig cfg = resolve_config(opts);
    const PipelineContext ctx = make_context(cfg);
    const RomModel rom = load_model(out_path(opts, cfg.model_path));
    const SweepTable table = sweep(rom, ctx.problem, n1, n2);
    const std::string csv_path = out_path(opts, "sweep.csv");
    write_sweep_csv(table, csv_path);
    emit(json{{"command", "sweep"},
              {"rows", table.rows.size()},
              {"file", csv_path},
              {"file_hash", hash_file(csv_path)},
              {"seconds", table.seconds}});
    return 0;
}

int cmd_bench_cooling(const CommonOpts& opts)
{
    const RunConfig cfg = resolve_config(opts);
    const double t0 = now_seconds();
    const PipelineContext ctx = make_context(cfg);

    log_info("generating " + std::to_string(cfg.num_snapshots) + " optimal snapshots");
    const SnapshotSet all = pipeline_snapshots(ctx, cfg);
    const SplitResult parts = split(all, cfg.test_fraction, cfg.split_seed);
    const std::string all_path = out_path(opts, cfg.snapshots_path);
    const std::string train_path = out_path(opts, cfg.train_path);
    const std::string test_path = out_path(opts, cfg.test_path);
    save_snapshots(all, all_path);
    save_snapshots(parts.train, train_path);
    save_snapshots(parts.test, test_path);

    log_info("fitting reducers");
    RomModel rom;
    build_reducers(rom, cfg, parts.train);
    rom.manifest.training_file_hash = hash_file(train_path);
    log_info("training the latent map");
    pipeline_train(rom, parts.train, cfg);
    const std::string model_path = out_path(opts, cfg.model_path);
    save_model(rom, model_path);

    log_info("evaluating");
    const auto& ops = ctx.problem.ops;
    const ErrorReport rec = evaluate(rom, parts.test, ops.m, ops.mc, EvalMode::Reconstruction);
    const ErrorReport pred = evaluate(rom, parts.test, ops.m, ops.mc, EvalMode::Prediction);
    const EfficacyReport efficacy = control_efficacy(ctx.problem, rom, 10, 10);
    const SpeedupReport timing = speedup(ctx.problem, rom, 1000, cfg.sample_seed + 1);
    const SweepTable table = sweep(rom, ctx.problem, 100, 100);
    const std::string sweep_path = out_path(opts, "sweep.csv");
    write_sweep_csv(table, sweep_path);

    emit(json{
        {"command", "bench-cooling"},
        {"prediction", {{"eps_state", pred.mean_state}, {"eps_control", pred.mean_control}}},
        {"reconstruction", {{"eps_state", rec.mean_state}, {"eps_control", rec.mean_control}}},
        {"efficacy",
         {{"controlled_mean", efficacy.controlled_mean},
          {"uncontrolled_mean", efficacy.uncontrolled_mean},
          {"ratio", efficacy.ratio}}},
        {"speedup",
         {{"fom_seconds", timing.fom_seconds},
          {"rom_seconds", timing.rom_seconds},
          {"ratio", timing.ratio}}},
        {"sweep", {{"rows", table.rows.size()}, {"seconds", table.seconds}}},
        {"hashes",
         {{"snapshots", hash_file(all_path)},
          {"model", hash_file(model_path)},
          {"sweep", hash_file(sweep_path)}}},
        {"seconds", now_seconds() - t0}});
    return 0;
}

int cmd_check(const CommonOpts& opts)
{
    const RunConfig base = resolve_config(opts);
    json checks = json::array();
    bool ok = true;
    const auto record = [&](const std::string& name, double value, double limit) {
        const bool pass = value <= limit;
        ok = ok && pass;
        checks.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"pass", pass}});
    };

    {
        SplitMix64 rng(7);
        DenseMatrix a(12, 8);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.next_uniform(-1.0, 1.0);
        const SvdResult s = svd(a);
        const DenseMatrix rec = s.u * s.sigma.asDiagonal() * s.vt;
        record("svd_reconstruction", (a - rec).norm() / a.norm(), 1e-9);
    }
    {
        RunConfig cfg = base;
        cfg.mesh_n = 16;
        const PipelineContext ctx = make_context(cfg);
        Scenario mu;
        mu.params = Vector(2);
        mu.params << -0.22, 0.44;
        SplitMix64 rng(11);
        Vector u(ctx.problem.ops.n_control());
        for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.next_uniform(-1.0, 1.0);
        Vector grad;
        reduced_cost(ctx.problem, mu, u, &grad);
        const Vector fd = finite_diff_gradient(
            [&](const Vector& v) { return reduced_cost(ctx.problem, mu, v); }, u, 1e-5);
        record("adjoint_gradient", (grad - fd).norm() / fd.norm(), 1e-5);

        const OptimalPair direct = solve_direct(ctx.problem, mu);
        Vector x(2 * ctx.problem.ops.n_state() + ctx.problem.ops.n_control());
        const KktSystem kkt = assemble_kkt(ctx.problem, mu);
        x.head(kkt.n_state) = direct.y;
        x.segment(kkt.n_state, kkt.n_control) = direct.u;
        x.tail(kkt.n_state) = *direct.p;
        record("kkt_residual", (kkt.k * x - kkt.rhs).norm() / kkt.rhs.norm(), 1e-9);
    }
    {
        const Mlp net = make_mlp({3, 5, 2}, 13);
        SplitMix64 rng(17);
        DenseMatrix x(3, 4), target(2, 4);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.next_uniform(-1.0, 1.0);
        for (Eigen::Index i = 0; i < target.size(); ++i)
            target.data()[i] = rng.next_uniform(-1.0, 1.0);
        Vector grad(net.parameter_count());
        weighted_mse_and_gradient(net, x, target, Vector(), grad);
        Mlp probe = net;
        const Vector fd = finite_diff_gradient(
            [&](const Vector& p) {
                probe.set_parameters(p);
                Vector g(probe.parameter_count());
                return weighted_mse_and_gradient(probe, x, target, Vector(), g);
            },
            net.flatten_parameters(), 1e-6);
        record("backprop_gradient", (grad - fd).norm() / fd.norm(), 1e-5);
    }

    emit(json{{"command", "check"}, {"pass", ok}, {"checks", checks}});
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Optimal-control reduced-order modeling toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    app.add_option("--config", opts.config_path, "JSON configuration file");
    app.add_option("--out", opts.out_dir, "Artifact directory (default: out)");
    auto* seed_opt = app.add_option("--seed", opts.seed, "Override the sampling seed");
    app.add_option("--workers", opts.workers, "Override the snapshot worker count");

    app.add_subcommand("snapshots", "Generate and split optimal snapshot pairs");
    app.add_subcommand("reduce", "Fit POD/autoencoder reducers on the training set");
    app.add_subcommand("train", "Train the parameter-to-latent map");
    app.add_subcommand("eval", "Test-set reconstruction and prediction errors");

    double theta = 0.0, r = 0.0;
    bool verify = false;
    auto* predict = app.add_subcommand("predict", "Evaluate the ROM at one scenario");
    predict->add_option("--theta", theta, "Source angle (radians)")->required();
    predict->add_option("--r", r, "Source radius")->required();
    predict->add_flag("--verify", verify, "Compare against a fresh full-order solve");

    int n1 = 100, n2 = 100;
    auto* sweep_cmd = app.add_subcommand("sweep", "Cost landscape over a parameter lattice");
    sweep_cmd->add_option("n1", n1, "Theta samples (default 100)");
    sweep_cmd->add_option("n2", n2, "Radius samples (default 100)");

    app.add_subcommand("bench-cooling", "Full pipeline benchmark with summary metrics");
    app.add_subcommand("check", "Quick numerical self-checks");

    try {
        app.parse(argc, argv);
        opts.seed_set = seed_opt->count() > 0;
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "snapshots") return cmd_snapshots(opts);
        if (cmd == "reduce") return cmd_reduce(opts);
        if (cmd == "train") return cmd_train(opts);
        if (cmd == "eval") return cmd_eval(opts);
        if (cmd == "predict") return cmd_predict(opts, theta, r, verify);
        if (cmd == "sweep") return cmd_sweep(opts, n1, n2);
        if (cmd == "bench-cooling") return cmd_bench_cooling(opts);
        if (cmd == "check") return cmd_check(opts);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
