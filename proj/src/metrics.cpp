#include "masksplitter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "masksplitter/splitter.hpp"

namespace masksplitter {

namespace {

std::size_t first_pixel_index(const BinaryMask& m) {
    for (std::size_t i = 0; i < m.data.size(); ++i)
        if (m.data[i]) return i;
    return m.data.size();
}

bool det_before(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto aa = a.mask.area();
    const auto ab = b.mask.area();
    if (aa != ab) return aa > ab;
    return first_pixel_index(a.mask) < first_pixel_index(b.mask);
}

}  // namespace

double APReport::ap_at(double threshold) const {
    for (const auto& [t, ap] : ap_by_threshold)
        if (std::fabs(t - threshold) < 1e-9) return ap;
    throw std::out_of_range("APReport: threshold not in sweep");
}

double default_score(const BinaryMask& mask) {
    if (mask.size() == 0) return 0.0;
    return static_cast<double>(mask.area()) / static_cast<double>(mask.size());
}

std::vector<Detection> detections_from_labels(const LabelMap& preds,
                                              const std::vector<double>* scores) {
    if (scores && scores->size() != static_cast<std::size_t>(preds.count))
        throw std::invalid_argument("detections_from_labels: score count mismatch");
    std::vector<Detection> dets;
    dets.reserve(preds.count);
    for (int id = 1; id <= preds.count; ++id) {
        Detection d;
        d.mask = extract_instance(preds, id);
        d.score = scores ? (*scores)[id - 1] : default_score(d.mask);
        dets.push_back(std::move(d));
    }
    return dets;
}

void sort_detections(std::vector<Detection>& dets) {
    std::stable_sort(dets.begin(), dets.end(), det_before);
}

MatchResult match_detections(const std::vector<Detection>& dets, const LabelMap& gt,
                             double iou_threshold) {
    MatchResult r;
    r.is_tp.assign(dets.size(), false);
    std::vector<bool> claimed(gt.count, false);

    std::vector<BinaryMask> gt_masks;
    gt_masks.reserve(gt.count);
    for (int id = 1; id <= gt.count; ++id) gt_masks.push_back(extract_instance(gt, id));

    for (std::size_t d = 0; d < dets.size(); ++d) {
        if (dets[d].mask.width != gt.width || dets[d].mask.height != gt.height)
            throw std::invalid_argument("match_detections: dimension mismatch");
        int best = -1;
        double best_iou = 0.0;
        for (int g = 0; g < gt.count; ++g) {
            if (claimed[g]) continue;
            const double v = iou(dets[d].mask, gt_masks[g]);
            if (v > best_iou) {
                best_iou = v;
                best = g;
            }
        }
        if (best >= 0 && best_iou >= iou_threshold && best_iou > 0.0) {
            r.is_tp[d] = true;
            claimed[best] = true;
        }
    }
    r.n_fn = static_cast<int>(std::count(claimed.begin(), claimed.end(), false));
    return r;
}

double average_precision(const std::vector<bool>& tp_flags, long long n_gt) {
    if (n_gt == 0) return tp_flags.empty() ? 1.0 : 0.0;

    // Precision/recall after each detection, then the precision envelope
    // sampled on the 101-point recall grid.
    std::vector<double> precision, recall;
    long long tp = 0;
    for (std::size_t i = 0; i < tp_flags.size(); ++i) {
        if (tp_flags[i]) ++tp;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    }
    // max precision at recall >= r, computed right-to-left
    std::vector<double> env(precision.size());
    double running = 0.0;
    for (std::size_t i = precision.size(); i-- > 0;) {
        running = std::max(running, precision[i]);
        env[i] = running;
    }
    double sum = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double r = k / 100.0;
        // first index with recall >= r
        const auto it = std::lower_bound(recall.begin(), recall.end(), r - 1e-12);
        if (it != recall.end()) sum += env[static_cast<std::size_t>(it - recall.begin())];
    }
    return sum / 101.0;
}

APReport ap_sweep(const std::vector<std::vector<Detection>>& dets_per_image,
                  const std::vector<LabelMap>& gts_per_image) {
    if (dets_per_image.size() != gts_per_image.size())
        throw std::invalid_argument("ap_sweep: image count mismatch");

    long long n_gt = 0;
    for (const auto& gt : gts_per_image) n_gt += gt.count;

    std::vector<std::vector<Detection>> sorted = dets_per_image;
    for (auto& dets : sorted) sort_detections(dets);

    APReport report;
    double sum = 0.0;
    for (int step = 0; step < 10; ++step) {
        const double threshold = 0.50 + 0.05 * step;

        // pooled (score, area, image, rank, tp) events in global score order
        struct Event {
            double score;
            long long area;
            std::size_t image;
            std::size_t rank;
            bool tp;
        };
        std::vector<Event> events;
        for (std::size_t im = 0; im < sorted.size(); ++im) {
            const auto match = match_detections(sorted[im], gts_per_image[im], threshold);
            for (std::size_t d = 0; d < sorted[im].size(); ++d)
                events.push_back({sorted[im][d].score, sorted[im][d].mask.area(), im, d,
                                  match.is_tp[d]});
        }
        std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.area != b.area) return a.area > b.area;
            if (a.image != b.image) return a.image < b.image;
            return a.rank < b.rank;
        });
        std::vector<bool> flags;
        flags.reserve(events.size());
        for (const auto& e : events) flags.push_back(e.tp);

        const double ap = average_precision(flags, n_gt);
        report.ap_by_threshold.emplace_back(threshold, ap);
        sum += ap;
    }
    report.mean_ap = sum / 10.0;
    return report;
}

}  // namespace masksplitter
