#pragma once

#include <vector>

#include "masksplitter/mask.hpp"

namespace masksplitter {

/// One scored mask prediction. Score-free pipelines get a default score of
/// normalized mask area (see default_score).
struct Detection {
    BinaryMask mask;
    double score = 0.0;
};

/// AP per IoU threshold over the 0.50:0.05:0.95 sweep, plus the sweep mean.
struct APReport {
    std::vector<std::pair<double, double>> ap_by_threshold;  // (threshold, AP)
    double mean_ap = 0.0;

    double ap_at(double threshold) const;
};

struct MatchResult {
    std::vector<bool> is_tp;  // per detection, in the sorted order given
    int n_fn = 0;
};

/// Normalized mask area, the default confidence for score-free detections.
double default_score(const BinaryMask& mask);

/// Turns prediction blobs into detections, one per instance id, scored by
/// normalized area unless explicit scores are supplied.
std::vector<Detection> detections_from_labels(const LabelMap& preds,
                                              const std::vector<double>* scores = nullptr);

/// Sorts by descending score; ties broken by larger mask area, then raster
/// order of each mask's first foreground pixel.
void sort_detections(std::vector<Detection>& dets);

/// Greedy matching: each detection (already sorted) claims the unmatched
/// instance of highest IoU if that IoU >= threshold.
MatchResult match_detections(const std::vector<Detection>& dets, const LabelMap& gt,
                             double iou_threshold);

/// 101-point interpolated AP from a globally score-sorted TP/FP sequence.
/// With no ground truth: 1.0 if there are no detections, else 0.0.
double average_precision(const std::vector<bool>& tp_flags, long long n_gt);

/// Full sweep over thresholds {0.50, 0.55, ..., 0.95} with detections pooled
/// across images and globally sorted by score.
APReport ap_sweep(const std::vector<std::vector<Detection>>& dets_per_image,
                  const std::vector<LabelMap>& gts_per_image);

}  // namespace masksplitter
