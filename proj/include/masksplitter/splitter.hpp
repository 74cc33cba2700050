#pragma once

#include <set>
#include <vector>

#include "masksplitter/mask.hpp"

namespace masksplitter {

/// Pairwise IoU between P prediction blobs (rows) and G ground-truth instances (columns).
struct IoUMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // row-major

    IoUMatrix() = default;
    IoUMatrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

    double at(int p, int g) const { return values[static_cast<std::size_t>(p) * cols + g]; }
    double& at(int p, int g) { return values[static_cast<std::size_t>(p) * cols + g]; }
};

/// The six outputs of the mask-splitting classification, plus the seen-instance sets.
struct SplitResult {
    int n_good = 0;
    int n_bad_type1 = 0;
    int n_bad_type2 = 0;
    BinaryMask good_mask;
    BinaryMask bad1_mask;
    BinaryMask bad2_mask;
    std::set<int> seen_type1;
    std::set<int> seen_type2;
};

/// |a ∩ b| / |a ∪ b|; 0 when both masks are empty. Throws on dimension mismatch.
double iou(const BinaryMask& a, const BinaryMask& b);

IoUMatrix iou_matrix(const LabelMap& preds, const LabelMap& gt);

/// Classifies every prediction blob as good, bad Type 1 (one blob over several
/// instances) or bad Type 2 (several blobs over one instance). "Overlap" means
/// IoU strictly greater than overlap_threshold. Blobs overlapping nothing are
/// ignored. Outputs are independent of blob iteration order.
SplitResult split_masks(const LabelMap& preds, const LabelMap& gt, double overlap_threshold = 0.0);

}  // namespace masksplitter
