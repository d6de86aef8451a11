#pragma once

#include "ocprom/optimize.hpp"
#include "ocprom/scenario.hpp"
#include "ocprom/surrogate.hpp"

#include <string>
#include <vector>

namespace ocprom {

// One JSON document drives the whole pipeline. Unknown keys are rejected and
// every random draw is tied to an explicit seed in here.
struct RunConfig {
    // mesh
    int mesh_n = 48;
    double obstacle_radius = 0.15;
    double annulus_inner = 0.2;
    double annulus_outer = 0.3;

    // physics + cost
    double nu = 1.0;
    double gamma = 1.0;
    double y_ext = 125.0;
    double beta = 1e-8;
    double beta_g = 1e-8;

    ParameterBox box;   // defaults to theta in (-pi/2, pi/2), r in (0.4, 0.9)

    // snapshot generation
    int num_snapshots = 100;
    double test_fraction = 0.2;
    std::uint64_t sample_seed = 1;
    std::uint64_t split_seed = 2;
    int workers = 1;

    // reduction
    RomKind kind = RomKind::PodDlRom;
    int state_pod_rank = 72;
    int control_pod_rank = 7;
    int latent_state = 6;
    std::vector<Eigen::Index> ae_encoder = {72, 70, 30, 6};
    std::vector<Eigen::Index> ae_decoder = {6, 30, 50, 70, 72};
    std::uint64_t ae_seed = 3;
    OptimizerConfig ae_optimizer{OptimizerKind::Lbfgs, 5000, 1e-10, 1e-3, 20};

    // latent map
    std::vector<Eigen::Index> phi_hidden = {50, 50};
    std::vector<std::string> phi_features = {"r_cos_theta", "r_sin_theta"};
    std::uint64_t phi_seed = 4;
    OptimizerConfig phi_optimizer{OptimizerKind::Lbfgs, 5000, 1e-10, 1e-3, 20};

    // artifact paths (relative paths resolve against the --out directory)
    std::string snapshots_path = "snapshots.ocpsnap";
    std::string train_path = "train.ocpsnap";
    std::string test_path = "test.ocpsnap";
    std::string model_path = "model.ocpmodl";

    std::string source_json;   // the parsed document, verbatim

    void validate() const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

}  // namespace ocprom
