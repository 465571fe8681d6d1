#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uvtex/schedule.hpp"
#include "uvtex/tensor.hpp"

namespace uvtex {

// Noise-prediction U-Net: three resolution levels, one residual block per
// level on the way down, one in the middle, one per level on the way up
// (fed by concatenated skips), sinusoidal time embedding plus a learned
// class embedding injected into every block, zero-initialized output head.
struct DenoiserConfig {
    int texture_resolution = 64;
    int base_channels = 32;
    std::vector<int> channel_multipliers{1, 2, 4};
    int time_embed_dim = 64;
    int num_classes = 8; // plus one reserved null class
    uint64_t seed = 0;

    int levels() const { return static_cast<int>(channel_multipliers.size()); }
    int null_class() const { return num_classes; }
    int channels(int level) const { return base_channels * channel_multipliers[level]; }
};

void validate_config(const DenoiserConfig& config);

struct ParamSpec {
    std::string name;
    std::vector<int> shape;
};

// Checkpoint tensor order; both the initializer and the file format follow it.
std::vector<ParamSpec> param_layout(const DenoiserConfig& config);

// Total parameter count by shape enumeration.
int64_t param_count(const DenoiserConfig& config);

// The same count from the closed-form expression documented in the README;
// the unit tests hold the two routes together.
int64_t param_count_formula(const DenoiserConfig& config);

// Largest divisor of `channels` that is at most 8.
int gn_groups(int channels);

struct DenoiserParams {
    DenoiserConfig config;
    std::vector<Tensor> tensors; // param_layout order
};

DenoiserParams init_params(const DenoiserConfig& config);

// eps_hat = net(x_t {B,3,R,R}, t_index (0-based), class id with K = null).
Tensor denoiser_forward(const DenoiserParams& params, const Tensor& x_t,
                        const std::vector<int>& t_index, const std::vector<int>& class_id);

template <typename T>
struct LossGradsT {
    double loss = 0;
    std::vector<TensorT<T>> grads; // param_layout order
};

// Builds x_t = q_sample(x0, t, eps), runs the network, and differentiates
// mean |eps - eps_hat|^2 with respect to every parameter. Templated so the
// gradient check can run the identical computation in double.
template <typename T>
LossGradsT<T> loss_and_grads_t(const std::vector<TensorT<T>>& param_tensors,
                               const DenoiserConfig& config, const TensorT<T>& x0,
                               const std::vector<int>& t, const TensorT<T>& eps,
                               const std::vector<int>& class_id,
                               const NoiseSchedule& schedule);

extern template LossGradsT<float> loss_and_grads_t<float>(
    const std::vector<TensorT<float>>&, const DenoiserConfig&, const TensorT<float>&,
    const std::vector<int>&, const TensorT<float>&, const std::vector<int>&,
    const NoiseSchedule&);
extern template LossGradsT<double> loss_and_grads_t<double>(
    const std::vector<TensorT<double>>&, const DenoiserConfig&, const TensorT<double>&,
    const std::vector<int>&, const TensorT<double>&, const std::vector<int>&,
    const NoiseSchedule&);

LossGradsT<float> loss_and_grads(const DenoiserParams& params, const Tensor& x0,
                                 const std::vector<int>& t, const Tensor& eps,
                                 const std::vector<int>& class_id,
                                 const NoiseSchedule& schedule);

struct OptimizerState {
    std::vector<Tensor> m, v; // shapes mirror the params
    int64_t step = 0;
};

OptimizerState init_optimizer(const DenoiserParams& params);

void adam_step(DenoiserParams& params, const std::vector<Tensor>& grads, OptimizerState& state,
               float lr, float beta1 = 0.9f, float beta2 = 0.999f, float eps = 1e-8f);

// Checkpoint: magic DNZ1, u32 header length, header JSON (config plus an
// "optimizer" flag), u64 step, parameter tensors in layout order as float32
// little-endian, then Adam m and v tensors when the flag is set.
struct Checkpoint {
    DenoiserParams params;
    int64_t step = 0;
    std::optional<OptimizerState> optimizer;
};

void save_checkpoint(const std::string& path, const DenoiserParams& params, int64_t step,
                     const OptimizerState* optimizer = nullptr);
Checkpoint load_checkpoint(const std::string& path);

std::string config_to_json(const DenoiserConfig& config);
DenoiserConfig config_from_json(const std::string& json_text);

} // namespace uvtex
