#include "masksplitter/mask.hpp"

#include <stdexcept>
#include <string>

namespace masksplitter {

long long BinaryMask::area() const {
    long long n = 0;
    for (auto v : data) n += v;
    return n;
}

BinaryMask binarize_scores(const ScoreMapPair& scores) {
    BinaryMask out(scores.width, scores.height);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data[i] = scores.object_scores[i] > scores.background_scores[i] ? 1 : 0;
    return out;
}

LabelMap connected_components(const BinaryMask& mask, Connectivity conn) {
    LabelMap out(mask.width, mask.height);
    const int w = mask.width;
    const int h = mask.height;

    static constexpr int dx8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
    static constexpr int dy8[] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static constexpr int dx4[] = {0, -1, 1, 0};
    static constexpr int dy4[] = {-1, 0, 0, 1};
    const int* dx = conn == Connectivity::Eight ? dx8 : dx4;
    const int* dy = conn == Connectivity::Eight ? dy8 : dy4;
    const int ndir = conn == Connectivity::Eight ? 8 : 4;

    std::vector<int> stack;
    int next = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y) || out.at(x, y) != 0) continue;
            if (next == kMaxInstances)
                throw std::length_error("connected_components: more than " +
                                        std::to_string(kMaxInstances) + " components");
            ++next;
            out.at(x, y) = next;
            stack.push_back(y * w + x);
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                const int cx = idx % w;
                const int cy = idx / w;
                for (int d = 0; d < ndir; ++d) {
                    const int nx = cx + dx[d];
                    const int ny = cy + dy[d];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    if (!mask.at(nx, ny) || out.at(nx, ny) != 0) continue;
                    out.at(nx, ny) = next;
                    stack.push_back(ny * w + nx);
                }
            }
        }
    }
    out.count = next;
    return out;
}

BinaryMask extract_instance(const LabelMap& map, int id) {
    if (id < 1 || id > map.count)
        throw std::out_of_range("extract_instance: id " + std::to_string(id) +
                                " outside 1.." + std::to_string(map.count));
    BinaryMask out(map.width, map.height);
    for (std::size_t i = 0; i < map.labels.size(); ++i)
        out.data[i] = map.labels[i] == id ? 1 : 0;
    return out;
}

BinaryMask mask_union(const LabelMap& map) {
    BinaryMask out(map.width, map.height);
    for (std::size_t i = 0; i < map.labels.size(); ++i)
        out.data[i] = map.labels[i] != 0 ? 1 : 0;
    return out;
}

}  // namespace masksplitter
