#pragma once

#include "ocprom/reduction.hpp"
#include "ocprom/scenario.hpp"
#include "ocprom/snapshots.hpp"

#include <string>
#include <variant>
#include <vector>

namespace ocprom {

enum class RomKind : std::uint8_t { PodNN = 0, DlRom = 1, PodDlRom = 2 };

using Reducer = std::variant<PodBasis, Autoencoder>;

Eigen::Index reducer_latent_dim(const Reducer& r);
Vector reducer_encode(const Reducer& r, const Vector& x_full);
Vector reducer_decode(const Reducer& r, const Vector& latent);
DenseMatrix reducer_encode_columns(const Reducer& r, const DenseMatrix& x);
DenseMatrix reducer_decode_columns(const Reducer& r, const DenseMatrix& z);

// Derived input features appended after the raw parameters. Supported names:
// "r_cos_theta", "r_sin_theta" (params = [theta, r]).
Vector augment_features(const Scenario& mu, const std::vector<std::string>& features);

struct InputSpec {
    bool uses_time = false;
    std::vector<std::string> features;
    FeatureScaler scaler;    // over [raw params, derived features, time?]
};

struct RomManifest {
    std::uint64_t training_dataset_id = 0;
    std::uint64_t training_file_hash = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> training_columns;
    std::string config_json;
};

// The deployable online artifact: reducers plus the parameter-to-latent map.
struct RomModel {
    RomKind kind = RomKind::PodNN;
    Reducer state_reducer;
    Reducer control_reducer;
    Mlp phi;
    InputSpec input;
    FeatureScaler latent_scaler;   // phi predicts scaled latents
    ParameterBox box;
    RomManifest manifest;

    Eigen::Index latent_y() const { return reducer_latent_dim(state_reducer); }
    Eigen::Index latent_u() const { return reducer_latent_dim(control_reducer); }
    void validate() const;
};

struct PhiTrainReport {
    std::vector<double> loss_history;
    bool converged = false;
};

// Fits phi on the latent encodings of the training snapshots using the
// weighted loss  N_y/(N_y+N_u) |y_N - phi_y|^2 + N_u/(N_y+N_u) |u_N - phi_u|^2
// averaged over the batch. Reducers must already be fitted/trained.
PhiTrainReport phi_train(RomModel& rom, const SnapshotSet& train, const OptimizerConfig& cfg,
                         std::uint64_t seed);

// Loss + phi-parameter gradient at the current parameters (for FD checks).
double phi_loss_and_gradient(const RomModel& rom, const DenseMatrix& inputs,
                             const DenseMatrix& latent_targets, Vector& grad_out);

// Scaled-and-augmented phi input for one scenario.
Vector rom_input(const RomModel& rom, std::optional<double> t, const Scenario& mu);

// Raw (unscaled) phi inputs, one column per snapshot.
DenseMatrix rom_training_inputs(const RomModel& rom, const SnapshotSet& set);
DenseMatrix rom_latent_targets(const RomModel& rom, const SnapshotSet& set);

struct RomPrediction {
    Vector y;
    Vector u;
    bool extrapolated = false;   // scenario outside the declared parameter box
};

RomPrediction rom_predict(const RomModel& rom, std::optional<double> t, const Scenario& mu);

void save_model(const RomModel& rom, const std::string& path);
RomModel load_model(const std::string& path);

}  // namespace ocprom
