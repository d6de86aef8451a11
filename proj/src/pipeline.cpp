#include "ocprom/pipeline.hpp"

#include <stdexcept>

namespace ocprom {

PipelineContext make_context(const RunConfig& cfg)
{
    cfg.validate();
    PipelineContext ctx;
    ctx.mesh = std::make_shared<Mesh>(
        build_mesh(cfg.mesh_n, cfg.obstacle_radius, cfg.annulus_inner, cfg.annulus_outer));
    ctx.problem = make_cooling_problem(ctx.mesh, cfg.nu, cfg.gamma, cfg.y_ext, cfg.beta,
                                       cfg.beta_g, cfg.box);
    return ctx;
}

SnapshotSet pipeline_snapshots(const PipelineContext& ctx, const RunConfig& cfg)
{
    const std::vector<Scenario> scenarios =
        sample_scenarios(cfg.box, cfg.num_snapshots, cfg.sample_seed);
    return generate(ctx.problem, scenarios, cfg.workers, cfg.sample_seed);
}

std::optional<AeTrainReport> build_reducers(RomModel& rom, const RunConfig& cfg,
                                            const SnapshotSet& train)
{
    rom.kind = cfg.kind;
    rom.box = cfg.box;
    rom.input.features = cfg.phi_features;
    rom.input.uses_time = train.time_grid.size() > 0;
    rom.control_reducer = pod_fit(train.u, cfg.control_pod_rank);

    std::optional<AeTrainReport> ae_report;
    if (cfg.kind == RomKind::PodNN) {
        rom.state_reducer = pod_fit(train.y, cfg.state_pod_rank);
    } else {
        const AeMode mode =
            cfg.kind == RomKind::PodDlRom ? AeMode::OnPodCoefficients : AeMode::OnFullOrder;
        Autoencoder ae = make_autoencoder(cfg.ae_encoder, cfg.ae_decoder, mode, cfg.ae_seed);
        if (mode == AeMode::OnPodCoefficients)
            ae.basis = pod_fit(train.y, cfg.state_pod_rank);
        else if (cfg.ae_encoder.front() != train.y.rows())
            throw std::invalid_argument("build_reducers: autoencoder width must match the "
                                        "state dimension for full-order reduction");
        ae_report = ae_train(ae, train.y, cfg.ae_optimizer, cfg.ae_seed);
        rom.state_reducer = std::move(ae);
    }

    std::vector<Eigen::Index> phi_sizes;
    phi_sizes.push_back(cfg.box.dim() + static_cast<Eigen::Index>(cfg.phi_features.size()) +
                        (rom.input.uses_time ? 1 : 0));
    phi_sizes.insert(phi_sizes.end(), cfg.phi_hidden.begin(), cfg.phi_hidden.end());
    phi_sizes.push_back(rom.latent_y() + rom.latent_u());
    rom.phi = make_mlp(phi_sizes, cfg.phi_seed);

    rom.manifest.training_dataset_id = train.provenance.dataset_id;
    rom.manifest.training_columns = train.provenance.column_origin;
    rom.manifest.seed = cfg.phi_seed;
    rom.manifest.config_json = cfg.source_json;
    return ae_report;
}

PhiTrainReport pipeline_train(RomModel& rom, const SnapshotSet& train, const RunConfig& cfg)
{
    return phi_train(rom, train, cfg.phi_optimizer, cfg.phi_seed);
}

}  // namespace ocprom
