#include "masksplitter/splitter.hpp"

#include <stdexcept>

namespace masksplitter {

namespace {

void check_same_dims(int wa, int ha, int wb, int hb, const char* what) {
    if (wa != wb || ha != hb)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

double iou(const BinaryMask& a, const BinaryMask& b) {
    check_same_dims(a.width, a.height, b.width, b.height, "iou");
    long long inter = 0;
    long long uni = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        inter += a.data[i] & b.data[i];
        uni += a.data[i] | b.data[i];
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

IoUMatrix iou_matrix(const LabelMap& preds, const LabelMap& gt) {
    check_same_dims(preds.width, preds.height, gt.width, gt.height, "iou_matrix");
    const int P = preds.count;
    const int G = gt.count;
    IoUMatrix out(P, G);
    if (P == 0 || G == 0) return out;

    std::vector<long long> pred_area(P, 0), gt_area(G, 0);
    std::vector<long long> inter(static_cast<std::size_t>(P) * G, 0);
    for (std::size_t i = 0; i < preds.labels.size(); ++i) {
        const int p = preds.labels[i];
        const int g = gt.labels[i];
        if (p) ++pred_area[p - 1];
        if (g) ++gt_area[g - 1];
        if (p && g) ++inter[static_cast<std::size_t>(p - 1) * G + (g - 1)];
    }
    for (int p = 0; p < P; ++p) {
        for (int g = 0; g < G; ++g) {
            const long long in = inter[static_cast<std::size_t>(p) * G + g];
            const long long un = pred_area[p] + gt_area[g] - in;
            out.at(p, g) = un == 0 ? 0.0 : static_cast<double>(in) / static_cast<double>(un);
        }
    }
    return out;
}

SplitResult split_masks(const LabelMap& preds, const LabelMap& gt, double overlap_threshold) {
    check_same_dims(preds.width, preds.height, gt.width, gt.height, "split_masks");
    const IoUMatrix m = iou_matrix(preds, gt);

    SplitResult r;
    r.good_mask = BinaryMask(preds.width, preds.height);
    r.bad1_mask = BinaryMask(preds.width, preds.height);
    r.bad2_mask = BinaryMask(preds.width, preds.height);

    // Per-instance count of overlapping predictions.
    std::vector<int> preds_on_gt(gt.count, 0);
    for (int p = 0; p < preds.count; ++p)
        for (int g = 0; g < gt.count; ++g)
            if (m.at(p, g) > overlap_threshold) ++preds_on_gt[g];

    // 0 = ignored, 1 = good, 2 = bad type 1, 3 = bad type 2
    std::vector<int> kind(preds.count, 0);
    for (int p = 0; p < preds.count; ++p) {
        std::vector<int> overlaps;
        for (int g = 0; g < gt.count; ++g)
            if (m.at(p, g) > overlap_threshold) overlaps.push_back(g + 1);

        if (overlaps.empty()) continue;
        if (overlaps.size() >= 2) {
            kind[p] = 2;
            for (int g : overlaps) r.seen_type1.insert(g);
        } else {
            const int g = overlaps.front();
            if (preds_on_gt[g - 1] == 1) {
                kind[p] = 1;
                ++r.n_good;
            } else {
                kind[p] = 3;
                r.seen_type2.insert(g);
            }
        }
    }
    r.n_bad_type1 = static_cast<int>(r.seen_type1.size());
    r.n_bad_type2 = static_cast<int>(r.seen_type2.size());

    for (std::size_t i = 0; i < preds.labels.size(); ++i) {
        const int p = preds.labels[i];
        if (!p) continue;
        switch (kind[p - 1]) {
            case 1: r.good_mask.data[i] = 1; break;
            case 2: r.bad1_mask.data[i] = 1; break;
            case 3: r.bad2_mask.data[i] = 1; break;
            default: break;
        }
    }
    return r;
}

}  // namespace masksplitter
