#pragma once

#include "ocprom/mlp.hpp"
#include "ocprom/optimize.hpp"

#include <optional>

namespace ocprom {

struct PodBasis {
    DenseMatrix v;             // orthonormal columns, n_h x n
    Vector singular_values;    // full spectrum, for diagnostics
    Eigen::Index n = 0;

    Vector project(const Vector& x) const { return v.transpose() * x; }
    Vector lift(const Vector& z) const { return v * z; }
    DenseMatrix project_columns(const DenseMatrix& x) const { return v.transpose() * x; }
    DenseMatrix lift_columns(const DenseMatrix& z) const { return v * z; }
};

PodBasis pod_fit(const DenseMatrix& snapshots, Eigen::Index n);

// Per-feature affine map onto [-1, 1] fitted on training data. Constant
// features map to 0.
struct FeatureScaler {
    Vector lo;
    Vector hi;

    void fit(const DenseMatrix& data);
    // One min/max over all entries, so relative feature magnitudes survive
    // (the right choice for POD coefficients and nodal fields).
    void fit_global(const DenseMatrix& data);
    DenseMatrix apply(const DenseMatrix& x) const;
    Vector apply(const Vector& x) const;
    DenseMatrix unapply(const DenseMatrix& z) const;
    Vector unapply(const Vector& z) const;
    // Chain rule factor per feature, d(scaled)/d(raw).
    Vector jacobian_diagonal() const;
};

enum class AeMode : std::uint8_t { OnFullOrder = 0, OnPodCoefficients = 1 };

struct Autoencoder {
    Mlp encoder;
    Mlp decoder;
    Eigen::Index latent_dim = 0;
    AeMode mode = AeMode::OnFullOrder;
    std::optional<PodBasis> basis;   // outer POD space, OnPodCoefficients only
    FeatureScaler scaler;            // fitted on the encoder-input features

    void validate() const;

    Vector encode(const Vector& x_full) const;
    // Full-order reconstruction (includes the POD lift when applicable).
    Vector decode(const Vector& latent) const;
    DenseMatrix encode_columns(const DenseMatrix& x) const;
    DenseMatrix decode_columns(const DenseMatrix& z) const;
};

// Encoder layer_sizes and decoder layer_sizes chained around the latent
// dimension, e.g. {72, 70, 30, 6} / {6, 30, 50, 70, 72}.
Autoencoder make_autoencoder(const std::vector<Eigen::Index>& encoder_sizes,
                             const std::vector<Eigen::Index>& decoder_sizes, AeMode mode,
                             std::uint64_t seed);

struct AeTrainReport {
    std::vector<double> loss_history;
    bool converged = false;
};

// Full-batch reconstruction training. `data` holds full-order snapshot
// columns; in POD-coefficient mode they are projected (and the basis must be
// set) before scaling. Loss is the batch-mean squared Euclidean
// reconstruction error in the scaled coefficient space.
AeTrainReport ae_train(Autoencoder& ae, const DenseMatrix& data, const OptimizerConfig& cfg,
                       std::uint64_t seed);

struct AeApplyResult {
    Vector latent;
    Vector reconstruction;
};

AeApplyResult ae_apply(const Autoencoder& ae, const Vector& x_full);

// Loss + parameter gradient of the reconstruction objective at the current
// parameters (exposed for finite-difference verification).
double ae_loss_and_gradient(const Autoencoder& ae, const DenseMatrix& scaled_inputs,
                            Vector& grad_out);

Vector ae_flatten_parameters(const Autoencoder& ae);
void ae_set_parameters(Autoencoder& ae, const Vector& params);

}  // namespace ocprom
