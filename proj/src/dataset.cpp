#include "masksplitter/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace masksplitter {

namespace {

// Thin wrapper over mt19937_64 with fully specified output mapping, so that
// seeded results are identical across platforms and standard libraries.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double u01() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * u01(); }
    int range(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

bool instance_connected(const LabelMap& map, int id) {
    BinaryMask m(map.width, map.height);
    long long area = 0;
    for (std::size_t i = 0; i < map.labels.size(); ++i) {
        m.data[i] = map.labels[i] == id ? 1 : 0;
        area += m.data[i];
    }
    if (area == 0) return false;
    return connected_components(m, Connectivity::Eight).count == 1;
}

}  // namespace

int isodata_threshold(const GrayImage& img) {
    if (img.intensities.empty()) throw std::invalid_argument("isodata_threshold: empty image");
    std::array<long long, 256> hist{};
    for (auto v : img.intensities) ++hist[v];

    int lo = 0, hi = 255;
    while (hist[lo] == 0) ++lo;
    while (hist[hi] == 0) --hi;
    if (lo == hi) throw std::invalid_argument("isodata_threshold: constant image");

    auto class_mean = [&](int from, int to) {
        long long n = 0, sum = 0;
        for (int v = from; v <= to; ++v) {
            n += hist[v];
            sum += hist[v] * v;
        }
        return static_cast<double>(sum) / static_cast<double>(n);
    };

    int t = static_cast<int>(std::lround(class_mean(0, 255)));
    t = std::clamp(t, lo, hi - 1);
    for (int iter = 0; iter < 256; ++iter) {
        int next = static_cast<int>(std::lround((class_mean(0, t) + class_mean(t + 1, 255)) / 2.0));
        next = std::clamp(next, lo, hi - 1);
        if (next == t) return t;
        t = next;
    }
    throw std::runtime_error("isodata_threshold: no convergence in 256 iterations");
}

std::pair<GrayImage, LabelMap> crop_around_instance(const GrayImage& frame, const LabelMap& gt,
                                                    int id, const CropSpec& spec) {
    if (frame.width != gt.width || frame.height != gt.height)
        throw std::invalid_argument("crop_around_instance: dimension mismatch");
    if (id < 1 || id > gt.count) throw std::out_of_range("crop_around_instance: unknown instance");
    if (spec.size < 1 || spec.size > frame.width || spec.size > frame.height)
        throw std::invalid_argument("crop_around_instance: frame smaller than crop");

    long long sx = 0, sy = 0, n = 0;
    for (int y = 0; y < gt.height; ++y)
        for (int x = 0; x < gt.width; ++x)
            if (gt.at(x, y) == id) {
                sx += x;
                sy += y;
                ++n;
            }
    const int cx = static_cast<int>(std::lround(static_cast<double>(sx) / n));
    const int cy = static_cast<int>(std::lround(static_cast<double>(sy) / n));

    const int x0 = std::clamp(cx - spec.size / 2, 0, frame.width - spec.size);
    const int y0 = std::clamp(cy - spec.size / 2, 0, frame.height - spec.size);

    GrayImage img(spec.size, spec.size);
    LabelMap labels(spec.size, spec.size);
    std::vector<int> remap(gt.count + 1, 0);
    int next = 0;
    for (int y = 0; y < spec.size; ++y) {
        for (int x = 0; x < spec.size; ++x) {
            img.at(x, y) = frame.at(x0 + x, y0 + y);
            const int old = gt.at(x0 + x, y0 + y);
            if (old) {
                if (!remap[old]) remap[old] = ++next;
                labels.at(x, y) = remap[old];
            }
        }
    }
    labels.count = next;
    return {std::move(img), std::move(labels)};
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_train_val(
    const std::vector<std::string>& items, double val_fraction, std::uint64_t seed) {
    if (items.empty()) throw std::invalid_argument("split_train_val: empty input");
    if (val_fraction <= 0.0 || val_fraction >= 1.0)
        throw std::invalid_argument("split_train_val: val_fraction outside (0,1)");

    const std::size_t n = items.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i)  // Fisher-Yates
        std::swap(order[i], order[rng.gen() % (i + 1)]);

    const auto n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(n)));
    std::vector<bool> in_val(n, false);
    for (std::size_t i = 0; i < n_val; ++i) in_val[order[i]] = true;

    std::pair<std::vector<std::string>, std::vector<std::string>> out;
    for (std::size_t i = 0; i < n; ++i)
        (in_val[i] ? out.second : out.first).push_back(items[i]);
    return out;
}

SynthScene synth_scene(int width, int height, int n_instances, double occlusion_level,
                       std::uint64_t seed) {
    if (width < 1 || height < 1) throw std::invalid_argument("synth_scene: empty frame");
    if (n_instances < 0) throw std::invalid_argument("synth_scene: negative instance count");
    if (occlusion_level < 0.0 || occlusion_level > 1.0)
        throw std::invalid_argument("synth_scene: occlusion outside [0,1]");

    Rng rng(seed);
    const int short_side = std::min(width, height);
    const int min_axis = std::max(1, short_side / 10);
    const int max_axis = std::max(min_axis, short_side / 5);

    LabelMap labels(width, height);
    for (int placed = 0; placed < n_instances;) {
        bool ok = false;
        for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
            const int a = rng.range(min_axis, max_axis);
            const int b = rng.range(min_axis, max_axis);
            const int cx = rng.range(0, width - 1);
            const int cy = rng.range(0, height - 1);

            std::vector<std::size_t> pixels;
            bool touches_other = false;
            for (int y = std::max(0, cy - b); y <= std::min(height - 1, cy + b); ++y) {
                for (int x = std::max(0, cx - a); x <= std::min(width - 1, cx + a); ++x) {
                    const double u = static_cast<double>(x - cx) / a;
                    const double v = static_cast<double>(y - cy) / b;
                    if (u * u + v * v > 1.0) continue;
                    pixels.push_back(static_cast<std::size_t>(y) * width + x);
                    // separation test, one-pixel margin under 8-connectivity
                    for (int dy = -1; dy <= 1 && !touches_other; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int nx = x + dx, ny = y + dy;
                            if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
                            if (labels.at(nx, ny) != 0) {
                                touches_other = true;
                                break;
                            }
                        }
                }
            }
            if (pixels.empty()) continue;
            if (touches_other && !(occlusion_level > 0.0 && rng.u01() < occlusion_level)) continue;

            for (auto idx : pixels) labels.labels[idx] = placed + 1;
            // overlap may have disconnected or swallowed an earlier instance
            bool valid = true;
            for (int id = 1; id <= placed + 1 && valid; ++id)
                valid = instance_connected(labels, id);
            if (!valid) {
                // undo and resample
                for (auto idx : pixels)
                    if (labels.labels[idx] == placed + 1) labels.labels[idx] = 0;
                // restore any overwritten pixels is not possible; rebuild from scratch
                labels = LabelMap(width, height);
                placed = 0;
                continue;
            }
            ok = true;
        }
        if (!ok) throw std::runtime_error("synth_scene: could not place instances");
        ++placed;
        labels.count = placed;
    }
    labels.count = n_instances;

    SynthScene scene;
    scene.labels = std::move(labels);
    scene.scores = ScoreMapPair(width, height);
    scene.frame = GrayImage(width, height);
    for (std::size_t i = 0; i < scene.labels.labels.size(); ++i) {
        const bool fg = scene.labels.labels[i] != 0;
        scene.scores.object_scores[i] = (fg ? 2.5 : -2.5) + rng.uniform(-0.8, 0.8);
        scene.scores.background_scores[i] = (fg ? -2.5 : 2.5) + rng.uniform(-0.8, 0.8);
        const int base = fg ? 180 : 40;
        scene.frame.intensities[i] =
            static_cast<std::uint8_t>(std::clamp(base + rng.range(-20, 20), 0, 255));
    }
    return scene;
}

}  // namespace masksplitter
