#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ocprom/binio.hpp"
#include "ocprom/rng.hpp"
#include "ocprom/surrogate.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace ocprom;

namespace {

std::string temp_path(const char* name)
{
    return (std::filesystem::temp_directory_path() / name).string();
}

// Synthetic dataset: snapshots are smooth functions of (theta, r), so a small
// phi can learn the latent map well.
SnapshotSet synthetic_set(Eigen::Index ny, Eigen::Index nu, int count, std::uint64_t seed)
{
    SnapshotSet set;
    set.y.resize(ny, count);
    set.u.resize(nu, count);
    SplitMix64 rng(seed);
    for (int j = 0; j < count; ++j) {
        Scenario mu;
        mu.params = Vector(2);
        mu.params << rng.next_uniform(-1.5, 1.5), rng.next_uniform(0.4, 0.9);
        for (Eigen::Index i = 0; i < ny; ++i)
            set.y(i, j) = std::sin(0.5 * (i + 1)) * mu.theta() * mu.r() +
                          std::cos(0.3 * i) * mu.r() + 0.05 * i * mu.theta();
        for (Eigen::Index i = 0; i < nu; ++i)
            set.u(i, j) = std::cos(0.2 * (i + 1)) * mu.theta() + std::sin(0.4 * i + 0.3) * mu.r() * mu.r();
        set.scenarios.push_back(mu);
    }
    set.provenance.dataset_id = seed;
    set.provenance.column_origin.resize(static_cast<size_t>(count));
    for (int j = 0; j < count; ++j)
        set.provenance.column_origin[static_cast<size_t>(j)] = static_cast<std::uint32_t>(j);
    return set;
}

RomModel pod_rom(const SnapshotSet& train, Eigen::Index ny, Eigen::Index nu)
{
    RomModel rom;
    rom.kind = RomKind::PodNN;
    rom.state_reducer = pod_fit(train.y, ny);
    rom.control_reducer = pod_fit(train.u, nu);
    rom.input.features = {"r_cos_theta", "r_sin_theta"};
    rom.box.lo = Vector(2);
    rom.box.hi = Vector(2);
    rom.box.lo << -1.5, 0.4;
    rom.box.hi << 1.5, 0.9;
    rom.phi = make_mlp({4, 16, 16, ny + nu}, 77);
    return rom;
}

}  // namespace

TEST_CASE("augment_features computes the polar products")
{
    Scenario mu;
    mu.params = Vector(2);
    mu.params << -0.22, 0.44;
    const Vector out = augment_features(mu, {"r_cos_theta", "r_sin_theta"});
    REQUIRE(out.size() == 4);
    CHECK(out[0] == -0.22);
    CHECK(out[1] == 0.44);
    CHECK(out[2] == doctest::Approx(0.44 * std::cos(-0.22)).epsilon(1e-15));
    CHECK(out[3] == doctest::Approx(0.44 * std::sin(-0.22)).epsilon(1e-15));
    CHECK_THROWS_AS(augment_features(mu, {"bogus"}), std::invalid_argument);
}

TEST_CASE("phi gradient matches finite differences")
{
    const SnapshotSet train = synthetic_set(12, 5, 20, 100);
    RomModel rom = pod_rom(train, 4, 3);
    const DenseMatrix raw = rom_training_inputs(rom, train);
    rom.input.scaler.fit(raw);
    const DenseMatrix inputs = rom.input.scaler.apply(raw);
    const DenseMatrix targets = rom_latent_targets(rom, train);

    Vector grad;
    phi_loss_and_gradient(rom, inputs, targets, grad);
    RomModel probe = rom;
    const Vector fd = finite_diff_gradient(
        [&](const Vector& p) {
            probe.phi.set_parameters(p);
            Vector g;
            return phi_loss_and_gradient(probe, inputs, targets, g);
        },
        rom.phi.flatten_parameters(), 1e-6);
    CHECK((grad - fd).norm() <= 1e-5 * fd.norm());
}

TEST_CASE("weighted phi loss matches the stated row weighting")
{
    const SnapshotSet train = synthetic_set(10, 4, 8, 200);
    RomModel rom = pod_rom(train, 3, 2);
    const DenseMatrix raw = rom_training_inputs(rom, train);
    rom.input.scaler.fit(raw);
    const DenseMatrix inputs = rom.input.scaler.apply(raw);
    const DenseMatrix targets = rom_latent_targets(rom, train);

    Vector g;
    const double loss = phi_loss_and_gradient(rom, inputs, targets, g);

    const DenseMatrix diff = rom.phi.forward(inputs) - targets;
    const double wy = 3.0 / 5.0, wu = 2.0 / 5.0;
    const double expected = (wy * diff.topRows(3).squaredNorm() +
                             wu * diff.bottomRows(2).squaredNorm()) /
                            static_cast<double>(diff.cols());
    CHECK(loss == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("a linear phi reaches the normal-equations optimum")
{
    const SnapshotSet train = synthetic_set(8, 4, 30, 300);
    RomModel rom = pod_rom(train, 3, 2);
    // Single affine layer: the weighted least-squares optimum is computable
    // in closed form and the row weights cannot change it (exact per-row fit
    // of an overdetermined consistent normal system).
    rom.phi = make_mlp({4, 5}, 7);

    OptimizerConfig cfg;
    cfg.max_iterations = 400;
    cfg.gradient_tolerance = 1e-12;
    const PhiTrainReport rep = phi_train(rom, train, cfg, 7);
    CHECK(rep.converged);

    // Oracle: solve min ||W X - T||_F row by row via normal equations on the
    // same scaled inputs/targets phi_train used.
    const DenseMatrix inputs = rom.input.scaler.apply(rom_training_inputs(rom, train));
    const DenseMatrix targets = rom.latent_scaler.apply(rom_latent_targets(rom, train));
    DenseMatrix x_aug(5, inputs.cols());
    x_aug.topRows(4) = inputs;
    x_aug.row(4).setOnes();
    const DenseMatrix gram = x_aug * x_aug.transpose();
    const DenseMatrix wb = gram.ldlt().solve(x_aug * targets.transpose()).transpose();

    const DenseMatrix pred = rom.phi.forward(inputs);
    const DenseMatrix oracle = wb.leftCols(4) * inputs;
    const DenseMatrix oracle_shift = oracle.colwise() + Vector(wb.col(4));
    CHECK((pred - oracle_shift).norm() <= 1e-6 * oracle_shift.norm());
}

TEST_CASE("trained rom predicts held-out scenarios")
{
    const SnapshotSet train = synthetic_set(12, 5, 60, 400);
    RomModel rom = pod_rom(train, 4, 3);
    OptimizerConfig cfg;
    cfg.max_iterations = 3000;
    cfg.gradient_tolerance = 1e-12;
    cfg.lbfgs_memory = 20;
    phi_train(rom, train, cfg, 77);

    const SnapshotSet test = synthetic_set(12, 5, 10, 500);
    double err = 0.0;
    for (Eigen::Index c = 0; c < test.columns(); ++c) {
        const RomPrediction p =
            rom_predict(rom, std::nullopt, test.scenarios[static_cast<size_t>(c)]);
        err += (p.y - test.y.col(c)).norm() / test.y.col(c).norm();
    }
    CHECK(err / 10.0 < 0.05);

    Scenario inside, outside;
    inside.params = Vector(2);
    inside.params << 0.0, 0.5;
    outside.params = Vector(2);
    outside.params << 0.0, 2.0;
    CHECK(!rom_predict(rom, std::nullopt, inside).extrapolated);
    CHECK(rom_predict(rom, std::nullopt, outside).extrapolated);
}

TEST_CASE("model files round-trip through save/load")
{
    const SnapshotSet train = synthetic_set(10, 4, 25, 600);
    RomModel rom = pod_rom(train, 3, 2);
    OptimizerConfig cfg;
    cfg.max_iterations = 200;
    phi_train(rom, train, cfg, 12);
    rom.manifest.training_file_hash = 0xDEADBEEF;
    rom.manifest.config_json = "{\"note\":\"round trip\"}";

    const std::string p1 = temp_path("ocprom_model_rt1.bin");
    const std::string p2 = temp_path("ocprom_model_rt2.bin");
    save_model(rom, p1);
    const RomModel loaded = load_model(p1);
    save_model(loaded, p2);
    CHECK(hash_file(p1) == hash_file(p2));

    CHECK(loaded.kind == rom.kind);
    CHECK(loaded.manifest.training_dataset_id == rom.manifest.training_dataset_id);
    CHECK(loaded.manifest.training_columns == rom.manifest.training_columns);
    CHECK(loaded.manifest.config_json == rom.manifest.config_json);
    Scenario mu;
    mu.params = Vector(2);
    mu.params << 0.3, 0.6;
    const RomPrediction a = rom_predict(rom, std::nullopt, mu);
    const RomPrediction b = rom_predict(loaded, std::nullopt, mu);
    CHECK(a.y == b.y);
    CHECK(a.u == b.u);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("model with an autoencoder reducer round-trips too")
{
    const SnapshotSet train = synthetic_set(10, 4, 25, 700);
    RomModel rom;
    rom.kind = RomKind::PodDlRom;
    Autoencoder ae = make_autoencoder({6, 5, 2}, {2, 5, 6}, AeMode::OnPodCoefficients, 9);
    ae.basis = pod_fit(train.y, 6);
    OptimizerConfig ae_cfg;
    ae_cfg.max_iterations = 150;
    ae_train(ae, train.y, ae_cfg, 9);
    rom.state_reducer = std::move(ae);
    rom.control_reducer = pod_fit(train.u, 2);
    rom.input.features = {"r_cos_theta", "r_sin_theta"};
    rom.box.lo = Vector(2);
    rom.box.hi = Vector(2);
    rom.box.lo << -1.5, 0.4;
    rom.box.hi << 1.5, 0.9;
    rom.phi = make_mlp({4, 8, 4}, 10);
    OptimizerConfig cfg;
    cfg.max_iterations = 150;
    phi_train(rom, train, cfg, 10);

    const std::string path = temp_path("ocprom_model_ae.bin");
    save_model(rom, path);
    const RomModel loaded = load_model(path);
    Scenario mu;
    mu.params = Vector(2);
    mu.params << -0.5, 0.7;
    CHECK(rom_predict(rom, std::nullopt, mu).y == rom_predict(loaded, std::nullopt, mu).y);

    // Corruption is detected.
    auto bytes = read_file_bytes(path);
    bytes[bytes.size() / 3] ^= 0x01;
    write_file_bytes(path, bytes);
    CHECK_THROWS_AS(load_model(path), FileFormatError);
    std::remove(path.c_str());
}

TEST_CASE("rom_input rejects a time mismatch")
{
    const SnapshotSet train = synthetic_set(6, 3, 10, 800);
    RomModel rom = pod_rom(train, 2, 2);
    OptimizerConfig cfg;
    cfg.max_iterations = 50;
    phi_train(rom, train, cfg, 1);
    Scenario mu;
    mu.params = Vector(2);
    mu.params << 0.0, 0.5;
    CHECK_THROWS_AS(rom_input(rom, 0.5, mu), std::invalid_argument);
}
