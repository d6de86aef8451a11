#pragma once

#include "ocprom/config.hpp"
#include "ocprom/evalbench.hpp"
#include "ocprom/rb.hpp"
#include "ocprom/snapshots.hpp"

namespace ocprom {

// Mesh + assembled problem for one configuration; the mesh is shared with the
// problem's source-load closure.
struct PipelineContext {
    std::shared_ptr<const Mesh> mesh;
    OcpProblem problem;
};

PipelineContext make_context(const RunConfig& cfg);

// Samples and solves the configured scenario set.
SnapshotSet pipeline_snapshots(const PipelineContext& ctx, const RunConfig& cfg);

// Fits the configured reducers on the training set and initializes (but does
// not train) phi. Returns the AE training report when an AE is involved.
std::optional<AeTrainReport> build_reducers(RomModel& rom, const RunConfig& cfg,
                                            const SnapshotSet& train);

PhiTrainReport pipeline_train(RomModel& rom, const SnapshotSet& train, const RunConfig& cfg);

}  // namespace ocprom
