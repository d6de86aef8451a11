#include "ocprom/reduction.hpp"

#include <cmath>

namespace ocprom {

PodBasis pod_fit(const DenseMatrix& snapshots, Eigen::Index n)
{
    if (n < 1 || n > std::min(snapshots.rows(), snapshots.cols()))
        throw std::invalid_argument("pod_fit: rank " + std::to_string(n) +
                                    " out of range for " + std::to_string(snapshots.rows()) +
                                    "x" + std::to_string(snapshots.cols()) + " snapshots");
    SvdResult s = svd(snapshots);
    PodBasis basis;
    basis.v = s.u.leftCols(n);
    basis.singular_values = std::move(s.sigma);
    basis.n = n;
    return basis;
}

void FeatureScaler::fit(const DenseMatrix& data)
{
    lo = data.rowwise().minCoeff();
    hi = data.rowwise().maxCoeff();
}

void FeatureScaler::fit_global(const DenseMatrix& data)
{
    lo = Vector::Constant(data.rows(), data.minCoeff());
    hi = Vector::Constant(data.rows(), data.maxCoeff());
}

Vector FeatureScaler::jacobian_diagonal() const
{
    Vector d(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        const double width = hi[i] - lo[i];
        d[i] = width > 0.0 ? 2.0 / width : 0.0;
    }
    return d;
}

DenseMatrix FeatureScaler::apply(const DenseMatrix& x) const
{
    DenseMatrix z(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double width = hi[i] - lo[i];
        if (width > 0.0)
            z.row(i) = (x.row(i).array() - lo[i]) * (2.0 / width) - 1.0;
        else
            z.row(i).setZero();
    }
    return z;
}

Vector FeatureScaler::apply(const Vector& x) const
{
    return apply(DenseMatrix(x)).col(0);
}

DenseMatrix FeatureScaler::unapply(const DenseMatrix& z) const
{
    DenseMatrix x(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double width = hi[i] - lo[i];
        if (width > 0.0)
            x.row(i) = (z.row(i).array() + 1.0) * (width / 2.0) + lo[i];
        else
            x.row(i).setConstant(lo[i]);
    }
    return x;
}

Vector FeatureScaler::unapply(const Vector& z) const
{
    return unapply(DenseMatrix(z)).col(0);
}

void Autoencoder::validate() const
{
    encoder.validate();
    decoder.validate();
    if (encoder.output_dim() != latent_dim || decoder.input_dim() != latent_dim)
        throw std::invalid_argument("Autoencoder: latent dimension does not match coder pair");
    if (encoder.input_dim() != decoder.output_dim())
        throw std::invalid_argument("Autoencoder: encoder input and decoder output differ");
    if (mode == AeMode::OnPodCoefficients) {
        if (!basis) throw std::invalid_argument("Autoencoder: POD-coefficient mode needs a basis");
        if (basis->n != encoder.input_dim())
            throw std::invalid_argument("Autoencoder: encoder input must equal POD rank");
    }
}

DenseMatrix Autoencoder::encode_columns(const DenseMatrix& x) const
{
    const DenseMatrix coeffs =
        (mode == AeMode::OnPodCoefficients) ? basis->project_columns(x) : x;
    return encoder.forward(scaler.apply(coeffs));
}

DenseMatrix Autoencoder::decode_columns(const DenseMatrix& z) const
{
    const DenseMatrix coeffs = scaler.unapply(decoder.forward(z));
    return (mode == AeMode::OnPodCoefficients) ? basis->lift_columns(coeffs) : coeffs;
}

Vector Autoencoder::encode(const Vector& x_full) const
{
    return encode_columns(DenseMatrix(x_full)).col(0);
}

Vector Autoencoder::decode(const Vector& latent) const
{
    return decode_columns(DenseMatrix(latent)).col(0);
}

Autoencoder make_autoencoder(const std::vector<Eigen::Index>& encoder_sizes,
                             const std::vector<Eigen::Index>& decoder_sizes, AeMode mode,
                             std::uint64_t seed)
{
    Autoencoder ae;
    // Distinct derived seeds keep the two nets decorrelated.
    ae.encoder = make_mlp(encoder_sizes, seed);
    ae.decoder = make_mlp(decoder_sizes, seed ^ 0x9E3779B97F4A7C15ULL);
    ae.latent_dim = encoder_sizes.back();
    ae.mode = mode;
    // Identity scaler until ae_train fits one.
    ae.scaler.lo = Vector::Constant(encoder_sizes.front(), -1.0);
    ae.scaler.hi = Vector::Constant(encoder_sizes.front(), 1.0);
    return ae;
}

Vector ae_flatten_parameters(const Autoencoder& ae)
{
    Vector out(ae.encoder.parameter_count() + ae.decoder.parameter_count());
    out.head(ae.encoder.parameter_count()) = ae.encoder.flatten_parameters();
    out.tail(ae.decoder.parameter_count()) = ae.decoder.flatten_parameters();
    return out;
}

void ae_set_parameters(Autoencoder& ae, const Vector& params)
{
    const Eigen::Index ne = ae.encoder.parameter_count();
    ae.encoder.set_parameters(params.head(ne));
    ae.decoder.set_parameters(params.tail(ae.decoder.parameter_count()));
}

double ae_loss_and_gradient(const Autoencoder& ae, const DenseMatrix& scaled_inputs,
                            Vector& grad_out)
{
    ForwardCache enc_cache, dec_cache;
    const DenseMatrix latent = forward_cached(ae.encoder, scaled_inputs, enc_cache);
    const DenseMatrix recon = forward_cached(ae.decoder, latent, dec_cache);

    const double inv_m = 1.0 / static_cast<double>(scaled_inputs.cols());
    const DenseMatrix diff = recon - scaled_inputs;
    const double loss = diff.squaredNorm() * inv_m;

    const Eigen::Index ne = ae.encoder.parameter_count();
    grad_out.resize(ne + ae.decoder.parameter_count());
    grad_out.setZero();
    DenseMatrix latent_grad;
    backward(ae.decoder, dec_cache, 2.0 * inv_m * diff, grad_out.tail(grad_out.size() - ne),
             &latent_grad);
    backward(ae.encoder, enc_cache, latent_grad, grad_out.head(ne));
    return loss;
}

AeTrainReport ae_train(Autoencoder& ae, const DenseMatrix& data, const OptimizerConfig& cfg,
                       std::uint64_t seed)
{
    (void)seed;  // initialization happens in make_autoencoder; kept for the call contract
    DenseMatrix coeffs = data;
    if (ae.mode == AeMode::OnPodCoefficients) {
        if (!ae.basis) throw std::invalid_argument("ae_train: POD-coefficient mode needs a basis");
        coeffs = ae.basis->project_columns(data);
    }
    if (coeffs.rows() != ae.encoder.input_dim())
        throw std::invalid_argument("ae_train: data dimension does not match encoder input");
    ae.scaler.fit_global(coeffs);
    const DenseMatrix scaled = ae.scaler.apply(coeffs);

    Autoencoder& net = ae;
    const Objective objective = [&](const Vector& params, Vector& grad) {
        ae_set_parameters(net, params);
        grad.resize(params.size());
        return ae_loss_and_gradient(net, scaled, grad);
    };

    MinimizeResult res;
    try {
        res = minimize(objective, ae_flatten_parameters(ae), cfg);
    } catch (const OptimizeError& e) {
        throw std::runtime_error(std::string("ae_train: ") + e.what());
    }
    ae_set_parameters(ae, res.x);
    AeTrainReport report;
    report.loss_history = std::move(res.history);
    report.converged = res.converged;
    return report;
}

AeApplyResult ae_apply(const Autoencoder& ae, const Vector& x_full)
{
    AeApplyResult r;
    r.latent = ae.encode(x_full);
    r.reconstruction = ae.decode(r.latent);
    return r;
}

}  // namespace ocprom
