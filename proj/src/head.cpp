#include "masksplitter/head.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace masksplitter {

namespace {

void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

std::array<const BinaryMask*, 3> split_mask_refs(const SplitResult& split) {
    return {&split.good_mask, &split.bad1_mask, &split.bad2_mask};
}

std::array<double, 3> count_targets(const LabelMap& gt, const SplitResult& split,
                                    BadTargets bad_targets) {
    if (bad_targets == BadTargets::Zero) return {static_cast<double>(gt.count), 0.0, 0.0};
    return {static_cast<double>(gt.count), static_cast<double>(split.n_bad_type1),
            static_cast<double>(split.n_bad_type2)};
}

}  // namespace

HeadParams::HeadParams(int h, int w) : height(h), width(w) {
    check(h >= 1 && w >= 1, "HeadParams: size must be at least 1x1");
    for (auto& fw : fc_weights) fw.assign(static_cast<std::size_t>(h) * w, 0.0);
}

HeadParams HeadParams::random_init(int h, int w, std::uint64_t seed, double scale) {
    HeadParams p(h, w);
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    auto flat = p.to_flat();
    for (auto& v : flat) v = dist(gen);
    p.from_flat(flat);
    return p;
}

std::size_t HeadParams::param_count() const { return head_param_count(height, width); }

std::size_t head_param_count(int h, int w) {
    return 19 + 30 + 3 * (static_cast<std::size_t>(h) * w + 1);
}

std::vector<double> HeadParams::to_flat() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    flat.insert(flat.end(), unified_weights.begin(), unified_weights.end());
    flat.push_back(unified_bias);
    for (int k = 0; k < 3; ++k) {
        flat.insert(flat.end(), type_weights[k].begin(), type_weights[k].end());
        flat.push_back(type_bias[k]);
    }
    for (int k = 0; k < 3; ++k) {
        flat.insert(flat.end(), fc_weights[k].begin(), fc_weights[k].end());
        flat.push_back(fc_bias[k]);
    }
    return flat;
}

void HeadParams::from_flat(std::span<const double> flat) {
    check(flat.size() == param_count(), "from_flat: wrong length");
    std::size_t i = 0;
    for (auto& v : unified_weights) v = flat[i++];
    unified_bias = flat[i++];
    for (int k = 0; k < 3; ++k) {
        for (auto& v : type_weights[k]) v = flat[i++];
        type_bias[k] = flat[i++];
    }
    for (int k = 0; k < 3; ++k) {
        for (auto& v : fc_weights[k]) v = flat[i++];
        fc_bias[k] = flat[i++];
    }
}

std::vector<double> conv3x3(std::span<const double> input, int channels, int h, int w,
                            std::span<const double> kernel, double bias) {
    check(channels == 1 || channels == 2, "conv3x3: channels must be 1 or 2");
    check(h >= 1 && w >= 1, "conv3x3: empty image");
    check(input.size() == static_cast<std::size_t>(channels) * h * w, "conv3x3: input size");
    check(kernel.size() == static_cast<std::size_t>(channels) * 9, "conv3x3: kernel size");

    std::vector<double> out(static_cast<std::size_t>(h) * w, bias);
    for (int c = 0; c < channels; ++c) {
        const double* in = input.data() + static_cast<std::size_t>(c) * h * w;
        const double* k = kernel.data() + static_cast<std::size_t>(c) * 9;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = y + ky - 1;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int ix = x + kx - 1;
                        if (ix < 0 || ix >= w) continue;
                        acc += in[static_cast<std::size_t>(iy) * w + ix] * k[ky * 3 + kx];
                    }
                }
                out[static_cast<std::size_t>(y) * w + x] += acc;
            }
        }
    }
    return out;
}

std::vector<double> gate(std::span<const double> map, const BinaryMask& split_mask) {
    check(map.size() == split_mask.size(), "gate: dimension mismatch");
    std::vector<double> out(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) out[i] = split_mask.data[i] ? map[i] : 0.0;
    return out;
}

double fc_unit(std::span<const double> map, std::span<const double> weights, double bias) {
    check(map.size() == weights.size(), "fc_unit: length mismatch");
    double acc = bias;
    for (std::size_t i = 0; i < map.size(); ++i) acc += map[i] * weights[i];
    return acc;
}

double sigmoid_ce_loss(std::span<const double> good_map, const BinaryMask& full_gt) {
    check(good_map.size() == full_gt.size(), "sigmoid_ce_loss: dimension mismatch");
    check(!good_map.empty(), "sigmoid_ce_loss: empty map");
    double acc = 0.0;
    for (std::size_t i = 0; i < good_map.size(); ++i) {
        const double s = good_map[i];
        if (!std::isfinite(s)) throw std::invalid_argument("sigmoid_ce_loss: non-finite score");
        const double t = full_gt.data[i];
        // max(s,0) - s*t + log(1 + exp(-|s|))
        acc += std::fmax(s, 0.0) - s * t + std::log1p(std::exp(-std::fabs(s)));
    }
    return acc / static_cast<double>(good_map.size());
}

double euclid_loss(double predicted, double target) {
    const double d = predicted - target;
    return 0.5 * d * d;
}

ForwardCache head_forward(const ScoreMapPair& scores, const SplitResult& split,
                          const HeadParams& params) {
    const int h = params.height;
    const int w = params.width;
    check(scores.height == h && scores.width == w, "head_forward: score dimensions");
    check(split.good_mask.width == w && split.good_mask.height == h,
          "head_forward: split dimensions");
    const std::size_t n = static_cast<std::size_t>(h) * w;

    std::vector<double> input(2 * n);
    std::copy(scores.object_scores.begin(), scores.object_scores.end(), input.begin());
    std::copy(scores.background_scores.begin(), scores.background_scores.end(),
              input.begin() + n);

    ForwardCache cache;
    cache.height = h;
    cache.width = w;
    cache.unified_map = conv3x3(input, 2, h, w, params.unified_weights, params.unified_bias);

    const auto masks = split_mask_refs(split);
    for (int k = 0; k < 3; ++k) {
        cache.type_maps[k] =
            conv3x3(cache.unified_map, 1, h, w, params.type_weights[k], params.type_bias[k]);
        cache.gated_maps[k] = gate(cache.type_maps[k], *masks[k]);
        cache.unit_outputs[k] = fc_unit(cache.gated_maps[k], params.fc_weights[k],
                                        params.fc_bias[k]);
    }
    cache.good_sigmoid.resize(n);
    for (std::size_t i = 0; i < n; ++i) cache.good_sigmoid[i] = sigmoid(cache.type_maps[kGood][i]);
    return cache;
}

LossBreakdown total_loss(const ForwardCache& cache, const LabelMap& gt, const SplitResult& split,
                         BadTargets bad_targets) {
    check(gt.height == cache.height && gt.width == cache.width, "total_loss: gt dimensions");
    const auto targets = count_targets(gt, split, bad_targets);
    LossBreakdown out;
    out.l_gs = sigmoid_ce_loss(cache.type_maps[kGood], mask_union(gt));
    out.l_good = euclid_loss(cache.unit_outputs[kGood], targets[kGood]);
    out.l_badcows = euclid_loss(cache.unit_outputs[kBadType1], targets[kBadType1]);
    out.l_badpreds = euclid_loss(cache.unit_outputs[kBadType2], targets[kBadType2]);
    out.total = out.l_gs + out.l_good + out.l_badcows + out.l_badpreds;
    return out;
}

HeadParams head_backward(const ForwardCache& cache, const ScoreMapPair& scores, const LabelMap& gt,
                         const SplitResult& split, const HeadParams& params,
                         BadTargets bad_targets) {
    const int h = params.height;
    const int w = params.width;
    check(cache.height == h && cache.width == w, "head_backward: stale cache");
    check(gt.height == h && gt.width == w, "head_backward: gt dimensions");
    const std::size_t n = static_cast<std::size_t>(h) * w;
    const auto masks = split_mask_refs(split);
    const auto targets = count_targets(gt, split, bad_targets);
    const BinaryMask gt_union = mask_union(gt);

    HeadParams grads(h, w);
    std::vector<double> d_unified(n, 0.0);

    for (int k = 0; k < 3; ++k) {
        const double d_unit = cache.unit_outputs[k] - targets[k];

        // fc unit
        grads.fc_bias[k] = d_unit;
        for (std::size_t i = 0; i < n; ++i)
            grads.fc_weights[k][i] = d_unit * cache.gated_maps[k][i];

        // through the gate into the type map
        std::vector<double> d_type(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if (masks[k]->data[i]) d_type[i] = d_unit * params.fc_weights[k][i];

        // the good branch also feeds the pixelwise cross-entropy term
        if (k == kGood) {
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
                d_type[i] += (cache.good_sigmoid[i] - gt_union.data[i]) * inv_n;
        }

        // type conv kernel/bias and accumulation into the unified map
        double db = 0.0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double d = d_type[static_cast<std::size_t>(y) * w + x];
                if (d == 0.0) continue;
                db += d;
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = y + ky - 1;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int ix = x + kx - 1;
                        if (ix < 0 || ix >= w) continue;
                        const std::size_t ii = static_cast<std::size_t>(iy) * w + ix;
                        grads.type_weights[k][ky * 3 + kx] += d * cache.unified_map[ii];
                        d_unified[ii] += d * params.type_weights[k][ky * 3 + kx];
                    }
                }
            }
        }
        grads.type_bias[k] = db;
    }

    // unified conv kernel/bias against the two input score maps
    const std::array<const std::vector<double>*, 2> inputs = {&scores.object_scores,
                                                             &scores.background_scores};
    double dbu = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double d = d_unified[static_cast<std::size_t>(y) * w + x];
            if (d == 0.0) continue;
            dbu += d;
            for (int ky = 0; ky < 3; ++ky) {
                const int iy = y + ky - 1;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    const int ix = x + kx - 1;
                    if (ix < 0 || ix >= w) continue;
                    const std::size_t ii = static_cast<std::size_t>(iy) * w + ix;
                    for (int c = 0; c < 2; ++c)
                        grads.unified_weights[c * 9 + ky * 3 + kx] += d * (*inputs[c])[ii];
                }
            }
        }
    }
    grads.unified_bias = dbu;
    return grads;
}

void adam_step(HeadParams& params, const HeadParams& grads, AdamState& state) {
    check(params.height == grads.height && params.width == grads.width,
          "adam_step: shape mismatch");
    auto p = params.to_flat();
    const auto g = grads.to_flat();
    if (state.first_moments.empty()) {
        state.first_moments.assign(p.size(), 0.0);
        state.second_moments.assign(p.size(), 0.0);
    }
    check(state.first_moments.size() == p.size(), "adam_step: state shape mismatch");

    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < p.size(); ++i) {
        double& m = state.first_moments[i];
        double& v = state.second_moments[i];
        m = state.beta1 * m + (1.0 - state.beta1) * g[i];
        v = state.beta2 * v + (1.0 - state.beta2) * g[i] * g[i];
        p[i] -= state.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + state.epsilon);
    }
    params.from_flat(p);
}

}  // namespace masksplitter
