#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "masksplitter/mask.hpp"
#include "masksplitter/splitter.hpp"

namespace masksplitter {

// Index of each prediction-type branch in the head.
enum HeadType : int { kGood = 0, kBadType1 = 1, kBadType2 = 2 };

/// All learnable weights of the head: one 3x3x2 unified conv, three 3x3x1
/// type convs, and three fully-connected count units over H*W inputs.
struct HeadParams {
    int height = 0;
    int width = 0;
    std::array<double, 18> unified_weights{};  // [channel][ky][kx]
    double unified_bias = 0.0;
    std::array<std::array<double, 9>, 3> type_weights{};
    std::array<double, 3> type_bias{};
    std::array<std::vector<double>, 3> fc_weights;  // each H*W, row-major
    std::array<double, 3> fc_bias{};

    HeadParams() = default;
    HeadParams(int h, int w);

    static HeadParams random_init(int h, int w, std::uint64_t seed, double scale = 0.05);

    std::size_t param_count() const;
    std::vector<double> to_flat() const;
    void from_flat(std::span<const double> flat);
};

/// 19 + 30 + 3*(H*W + 1)
std::size_t head_param_count(int h, int w);

/// Intermediate activations of one forward pass.
struct ForwardCache {
    int height = 0;
    int width = 0;
    std::vector<double> unified_map;
    std::array<std::vector<double>, 3> type_maps;
    std::array<std::vector<double>, 3> gated_maps;  // sparse layers
    std::array<double, 3> unit_outputs{};
    std::vector<double> good_sigmoid;
};

struct LossBreakdown {
    double l_gs = 0.0;
    double l_good = 0.0;
    double l_badcows = 0.0;
    double l_badpreds = 0.0;
    double total = 0.0;
};

/// What the two bad-count units regress toward: the split counts, or zero.
enum class BadTargets { AlgorithmCounts, Zero };

struct AdamState {
    long long step = 0;
    std::vector<double> first_moments;
    std::vector<double> second_moments;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 1e-5;

    AdamState() = default;
    explicit AdamState(std::size_t n, double lr = 1e-5)
        : first_moments(n, 0.0), second_moments(n, 0.0), learning_rate(lr) {}
};

/// Stride-1 zero-padded (pad 1) cross-correlation preserving spatial size.
/// input is channels*h*w, kernel is channels*9 laid out [c][ky][kx].
std::vector<double> conv3x3(std::span<const double> input, int channels, int h, int w,
                            std::span<const double> kernel, double bias);

/// Elementwise product with a split mask; the mask is a constant for gradients.
std::vector<double> gate(std::span<const double> map, const BinaryMask& split_mask);

/// Dot product of the flattened map with the weights, plus bias. No activation.
double fc_unit(std::span<const double> map, std::span<const double> weights, double bias);

/// Mean pixelwise cross-entropy of sigmoid(scores) against a binary target,
/// evaluated in the stable logit form.
double sigmoid_ce_loss(std::span<const double> good_map, const BinaryMask& full_gt);

double euclid_loss(double predicted, double target);

ForwardCache head_forward(const ScoreMapPair& scores, const SplitResult& split,
                          const HeadParams& params);

LossBreakdown total_loss(const ForwardCache& cache, const LabelMap& gt, const SplitResult& split,
                         BadTargets bad_targets = BadTargets::AlgorithmCounts);

/// Exact gradient of total_loss with respect to every parameter. Split masks
/// and the input score maps carry no gradient.
HeadParams head_backward(const ForwardCache& cache, const ScoreMapPair& scores, const LabelMap& gt,
                         const SplitResult& split, const HeadParams& params,
                         BadTargets bad_targets = BadTargets::AlgorithmCounts);

/// Bias-corrected Adam update, in place.
void adam_step(HeadParams& params, const HeadParams& grads, AdamState& state);

}  // namespace masksplitter
