#pragma once

#include "ocprom/linalg.hpp"

#include <cstdint>
#include <vector>

namespace ocprom {

enum class Activation : std::uint8_t { Identity = 0, LeakyRelu = 1 };

// Fully connected network; forward/backward operate on batches stored as
// matrix columns.
struct Mlp {
    std::vector<DenseMatrix> weights;
    std::vector<Vector> biases;
    std::vector<Activation> activations;   // one per layer
    double leaky_slope = 0.01;

    Eigen::Index input_dim() const { return weights.empty() ? 0 : weights.front().cols(); }
    Eigen::Index output_dim() const { return weights.empty() ? 0 : weights.back().rows(); }
    Eigen::Index layer_count() const { return static_cast<Eigen::Index>(weights.size()); }
    Eigen::Index parameter_count() const;

    DenseMatrix forward(const DenseMatrix& x) const;

    Vector flatten_parameters() const;
    void set_parameters(const Vector& params);

    void validate() const;
};

// Hidden layers leaky-ReLU, output identity; weights uniform in
// +-sqrt(6/(fan_in+fan_out)), biases zero, drawn from the given seed.
Mlp make_mlp(const std::vector<Eigen::Index>& layer_sizes, std::uint64_t seed,
             double leaky_slope = 0.01);

struct ForwardCache {
    std::vector<DenseMatrix> pre;    // pre-activation per layer
    std::vector<DenseMatrix> act;    // act[0] = input, act[l+1] = layer l output
};

DenseMatrix forward_cached(const Mlp& net, const DenseMatrix& x, ForwardCache& cache);

// Backpropagates dL/d(output) through the cached forward pass and appends the
// parameter gradient (same ordering as flatten_parameters) into grad_out.
void backward(const Mlp& net, const ForwardCache& cache, const DenseMatrix& output_grad,
              Eigen::Ref<Vector> grad_out, DenseMatrix* input_grad = nullptr);

// Mean over batch columns of the row-weighted squared error
//   L = (1/M) sum_m sum_r w_r (pred - target)^2.
// Pass an empty weight vector for uniform weights.
double weighted_mse_and_gradient(const Mlp& net, const DenseMatrix& x, const DenseMatrix& target,
                                 const Vector& row_weights, Eigen::Ref<Vector> grad_out);

}  // namespace ocprom
