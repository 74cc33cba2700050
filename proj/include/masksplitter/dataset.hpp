#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "masksplitter/mask.hpp"

namespace masksplitter {

/// 8-bit grayscale raster.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> intensities;

    GrayImage() = default;
    GrayImage(int w, int h) : width(w), height(h), intensities(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t at(int x, int y) const { return intensities[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return intensities[static_cast<std::size_t>(y) * width + x]; }
};

struct CropSpec {
    int size = 250;
};

/// Ridler-Calvard iterative threshold: t <- round((mean(<=t) + mean(>t)) / 2),
/// initialized at the global mean. Throws on constant images.
int isodata_threshold(const GrayImage& img);

/// size x size window centered on the instance centroid, translated minimally
/// to stay inside the frame. The label crop keeps every intersecting instance,
/// relabeled contiguously in raster order of first appearance.
std::pair<GrayImage, LabelMap> crop_around_instance(const GrayImage& frame, const LabelMap& gt,
                                                    int id, const CropSpec& spec);

/// Deterministic seeded partition; |val| = round(val_fraction * N). The two
/// lists preserve the input order of their members.
std::pair<std::vector<std::string>, std::vector<std::string>> split_train_val(
    const std::vector<std::string>& items, double val_fraction, std::uint64_t seed);

struct SynthScene {
    ScoreMapPair scores;
    LabelMap labels;
    GrayImage frame;  // gray rendering of the scene, for thresholding/cropping demos
};

/// Random filled ellipses with a noisy score pair whose argmax approximately
/// recovers the union. occlusion_level 0 keeps instances strictly separated
/// (no 8-adjacent pixels between different instances); overlapping pixels
/// otherwise belong to the later-drawn instance. Bit-identical per seed.
SynthScene synth_scene(int width, int height, int n_instances, double occlusion_level,
                       std::uint64_t seed);

}  // namespace masksplitter
