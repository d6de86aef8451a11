#include "ocprom/mlp.hpp"

#include "ocprom/rng.hpp"

#include <cmath>

namespace ocprom {

namespace {

void apply_activation(DenseMatrix& z, Activation act, double slope)
{
    if (act == Activation::Identity) return;
    z = z.unaryExpr([slope](double v) { return v >= 0.0 ? v : slope * v; });
}

DenseMatrix activation_derivative(const DenseMatrix& pre, Activation act, double slope)
{
    if (act == Activation::Identity) return DenseMatrix::Ones(pre.rows(), pre.cols());
    return pre.unaryExpr([slope](double v) { return v >= 0.0 ? 1.0 : slope; });
}

}  // namespace

Eigen::Index Mlp::parameter_count() const
{
    Eigen::Index n = 0;
    for (size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

void Mlp::validate() const
{
    if (weights.size() != biases.size() || weights.size() != activations.size())
        throw std::invalid_argument("Mlp: layer bookkeeping out of sync");
    for (size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != biases[l].size())
            throw std::invalid_argument("Mlp: bias/weight row mismatch in layer " +
                                        std::to_string(l));
        if (l > 0 && weights[l].cols() != weights[l - 1].rows())
            throw std::invalid_argument("Mlp: layer dimensions do not chain at layer " +
                                        std::to_string(l));
        if (!weights[l].allFinite() || !biases[l].allFinite())
            throw std::invalid_argument("Mlp: non-finite parameters in layer " + std::to_string(l));
    }
}

DenseMatrix Mlp::forward(const DenseMatrix& x) const
{
    DenseMatrix a = x;
    for (size_t l = 0; l < weights.size(); ++l) {
        DenseMatrix z = (weights[l] * a).colwise() + biases[l];
        apply_activation(z, activations[l], leaky_slope);
        a = std::move(z);
    }
    return a;
}

Vector Mlp::flatten_parameters() const
{
    Vector out(parameter_count());
    Eigen::Index pos = 0;
    for (size_t l = 0; l < weights.size(); ++l) {
        out.segment(pos, weights[l].size()) =
            Eigen::Map<const Vector>(weights[l].data(), weights[l].size());
        pos += weights[l].size();
        out.segment(pos, biases[l].size()) = biases[l];
        pos += biases[l].size();
    }
    return out;
}

void Mlp::set_parameters(const Vector& params)
{
    if (params.size() != parameter_count())
        throw std::invalid_argument("Mlp::set_parameters: size mismatch");
    Eigen::Index pos = 0;
    for (size_t l = 0; l < weights.size(); ++l) {
        Eigen::Map<Vector>(weights[l].data(), weights[l].size()) =
            params.segment(pos, weights[l].size());
        pos += weights[l].size();
        biases[l] = params.segment(pos, biases[l].size());
        pos += biases[l].size();
    }
}

Mlp make_mlp(const std::vector<Eigen::Index>& layer_sizes, std::uint64_t seed, double leaky_slope)
{
    if (layer_sizes.size() < 2) throw std::invalid_argument("make_mlp: need at least two sizes");
    SplitMix64 rng(seed);
    Mlp net;
    net.leaky_slope = leaky_slope;
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const Eigen::Index fan_in = layer_sizes[l];
        const Eigen::Index fan_out = layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        DenseMatrix w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < w.size(); ++i)
            w.data()[i] = rng.next_uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Vector::Zero(fan_out));
        net.activations.push_back(l + 2 < layer_sizes.size() ? Activation::LeakyRelu
                                                             : Activation::Identity);
    }
    return net;
}

DenseMatrix forward_cached(const Mlp& net, const DenseMatrix& x, ForwardCache& cache)
{
    cache.pre.resize(net.weights.size());
    cache.act.resize(net.weights.size() + 1);
    cache.act[0] = x;
    for (size_t l = 0; l < net.weights.size(); ++l) {
        cache.pre[l] = (net.weights[l] * cache.act[l]).colwise() + net.biases[l];
        cache.act[l + 1] = cache.pre[l];
        apply_activation(cache.act[l + 1], net.activations[l], net.leaky_slope);
    }
    return cache.act.back();
}

void backward(const Mlp& net, const ForwardCache& cache, const DenseMatrix& output_grad,
              Eigen::Ref<Vector> grad_out, DenseMatrix* input_grad)
{
    const auto layers = net.weights.size();
    DenseMatrix delta = output_grad;

    // Parameter offsets in flatten order.
    std::vector<Eigen::Index> offset(layers);
    Eigen::Index pos = 0;
    for (size_t l = 0; l < layers; ++l) {
        offset[l] = pos;
        pos += net.weights[l].size() + net.biases[l].size();
    }

    for (size_t li = layers; li-- > 0;) {
        delta = delta.cwiseProduct(
            activation_derivative(cache.pre[li], net.activations[li], net.leaky_slope));
        const DenseMatrix wgrad = delta * cache.act[li].transpose();
        const Vector bgrad = delta.rowwise().sum();
        grad_out.segment(offset[li], wgrad.size()) +=
            Eigen::Map<const Vector>(wgrad.data(), wgrad.size());
        grad_out.segment(offset[li] + wgrad.size(), bgrad.size()) += bgrad;
        if (li > 0 || input_grad) delta = net.weights[li].transpose() * delta;
    }
    if (input_grad) *input_grad = std::move(delta);
}

double weighted_mse_and_gradient(const Mlp& net, const DenseMatrix& x, const DenseMatrix& target,
                                 const Vector& row_weights, Eigen::Ref<Vector> grad_out)
{
    if (x.cols() != target.cols())
        throw std::invalid_argument("weighted_mse_and_gradient: batch size mismatch");
    ForwardCache cache;
    const DenseMatrix pred = forward_cached(net, x, cache);
    if (pred.rows() != target.rows())
        throw std::invalid_argument("weighted_mse_and_gradient: output dimension mismatch");

    const double inv_m = 1.0 / static_cast<double>(x.cols());
    DenseMatrix diff = pred - target;
    double loss;
    DenseMatrix output_grad;
    if (row_weights.size() == 0) {
        loss = diff.squaredNorm() * inv_m;
        output_grad = 2.0 * inv_m * diff;
    } else {
        if (row_weights.size() != diff.rows())
            throw std::invalid_argument("weighted_mse_and_gradient: weight size mismatch");
        loss = (row_weights.asDiagonal() * diff.cwiseProduct(diff)).sum() * inv_m;
        output_grad = 2.0 * inv_m * (row_weights.asDiagonal() * diff);
    }
    grad_out.setZero();
    backward(net, cache, output_grad, grad_out);
    return loss;
}

}  // namespace ocprom
