#pragma once

#include <cstdint>
#include <vector>

namespace masksplitter {

/// Row-major binary raster; every element is 0 or 1.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

    std::size_t size() const { return data.size(); }
    long long area() const;
    bool empty_mask() const { return area() == 0; }
};

/// Row-major instance id raster; 0 is background, instance ids are 1..count.
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<int> labels;
    int count = 0;

    LabelMap() = default;
    LabelMap(int w, int h) : width(w), height(h), labels(static_cast<std::size_t>(w) * h, 0) {}

    int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    int& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }
};

/// Paired object/background score grids, as produced by a two-class backbone.
struct ScoreMapPair {
    int width = 0;
    int height = 0;
    std::vector<double> object_scores;
    std::vector<double> background_scores;

    ScoreMapPair() = default;
    ScoreMapPair(int w, int h)
        : width(w), height(h),
          object_scores(static_cast<std::size_t>(w) * h, 0.0),
          background_scores(static_cast<std::size_t>(w) * h, 0.0) {}
};

enum class Connectivity { Four = 4, Eight = 8 };

// Maximum instance count representable in the 16-bit on-disk label format.
inline constexpr int kMaxInstances = 65534;

/// Pixelwise argmax of the score pair; ties go to background.
BinaryMask binarize_scores(const ScoreMapPair& scores);

/// Labels foreground components in raster order of each component's first pixel.
LabelMap connected_components(const BinaryMask& mask, Connectivity conn = Connectivity::Eight);

/// Indicator mask of one instance. Throws std::out_of_range for ids outside 1..count.
BinaryMask extract_instance(const LabelMap& map, int id);

/// Binary OR of all instances.
BinaryMask mask_union(const LabelMap& map);

}  // namespace masksplitter
