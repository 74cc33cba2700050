#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "masksplitter/metrics.hpp"
#include "masksplitter/splitter.hpp"
#include "test_util.hpp"

using namespace masksplitter;
using msut::labels_from;
using msut::mask_from;

namespace {

std::vector<Detection> perfect_detections(const LabelMap& gt) {
    return detections_from_labels(gt);
}

/// Random image: gt instances plus detections that are jittered copies.
void random_case(msut::TestRng& rng, int max_dets, int max_insts,
                 std::vector<Detection>& dets, LabelMap& gt) {
    gt = msut::random_label_map(rng, 8, 8, max_insts);
    dets.clear();
    const int n_dets = rng.range(0, max_dets);
    for (int d = 0; d < n_dets; ++d) {
        BinaryMask m(8, 8);
        if (gt.count > 0 && rng.u01() < 0.7) {
            m = extract_instance(gt, rng.range(1, gt.count));
            for (auto& v : m.data)  // jitter
                if (rng.u01() < 0.2) v ^= 1;
        } else {
            for (auto& v : m.data) v = rng.u01() < 0.2 ? 1 : 0;
        }
        if (m.area() == 0) m.at(rng.range(0, 7), rng.range(0, 7)) = 1;
        dets.push_back({std::move(m), rng.u01()});
    }
}

}  // namespace

TEST_CASE("greedy matching") {
    const LabelMap gt = labels_from({"11..", "11..", "..22", "..22"});

    SUBCASE("perfect detections are all TP") {
        auto dets = perfect_detections(gt);
        sort_detections(dets);
        const MatchResult r = match_detections(dets, gt, 0.5);
        CHECK(r.is_tp == std::vector<bool>{true, true});
        CHECK(r.n_fn == 0);
    }
    SUBCASE("detection without ground truth is FP") {
        std::vector<Detection> dets = {{mask_from({"1100", "1100", "0000", "0000"}), 1.0}};
        const MatchResult r = match_detections(dets, LabelMap(4, 4), 0.5);
        CHECK(r.is_tp == std::vector<bool>{false});
    }
    SUBCASE("second detection on a claimed instance is FP") {
        const LabelMap one = labels_from({"11111", "11111"});
        std::vector<Detection> dets = {
            {mask_from({"11110", "11110"}), 0.9},  // IoU 0.8
            {mask_from({"11100", "11100"}), 0.6},  // IoU 0.6
        };
        const MatchResult r = match_detections(dets, one, 0.5);
        CHECK(r.is_tp == std::vector<bool>{true, false});
        CHECK(r.n_fn == 0);
    }
}

TEST_CASE("average_precision edge rules") {
    CHECK(average_precision({}, 0) == 1.0);
    CHECK(average_precision({false}, 0) == 0.0);
    CHECK(average_precision({true, true}, 2) == 1.0);
    CHECK(average_precision({false, false, false}, 2) == 0.0);

    // TP, FP, TP with 2 instances, against the brute PR-curve oracle
    const std::vector<bool> seq = {true, false, true};
    CHECK(average_precision(seq, 2) == doctest::Approx(msut::brute_ap(seq, 2)).epsilon(1e-12));
}

TEST_CASE("average_precision equals the brute-force oracle on random sequences") {
    msut::TestRng rng(404);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = rng.range(0, 8);
        std::vector<bool> flags(n);
        int tp = 0;
        for (int i = 0; i < n; ++i) {
            flags[i] = rng.u01() < 0.5;
            tp += flags[i];
        }
        const long long n_gt = tp + rng.range(0, 3);
        if (n_gt == 0) continue;
        CHECK(average_precision(flags, n_gt) ==
              doctest::Approx(msut::brute_ap(flags, n_gt)).epsilon(1e-12));
    }
}

TEST_CASE("ap_sweep on canonical inputs") {
    const LabelMap gt = labels_from({"11...", "11...", "...22", "...22"});

    SUBCASE("perfect detections give 1.0 everywhere") {
        const APReport r = ap_sweep({perfect_detections(gt)}, {gt});
        for (const auto& [t, ap] : r.ap_by_threshold) CHECK(ap == 1.0);
        CHECK(r.mean_ap == 1.0);
        CHECK(r.ap_at(0.5) == 1.0);
        CHECK(r.ap_at(0.7) == 1.0);
    }
    SUBCASE("uniform IoU 0.72 detections step at the 0.70 threshold") {
        // 18-pixel instance, detection covers 13 of them: IoU = 13/18 = 0.722
        const LabelMap big = labels_from({"111111", "111111", "111111"});
        const BinaryMask det = mask_from({"111111", "111111", "100000"});
        REQUIRE(iou(det, extract_instance(big, 1)) == doctest::Approx(13.0 / 18.0));
        const APReport r = ap_sweep({{{det, 1.0}}}, {big});
        CHECK(r.ap_at(0.5) == 1.0);
        CHECK(r.ap_at(0.7) == 1.0);
        CHECK(r.ap_at(0.75) == 0.0);
        CHECK(r.ap_at(0.95) == 0.0);
        CHECK(r.mean_ap == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("no detections with nonempty gt gives all zeros") {
        const APReport r = ap_sweep({{}}, {gt});
        for (const auto& [t, ap] : r.ap_by_threshold) CHECK(ap == 0.0);
        CHECK(r.mean_ap == 0.0);
    }
}

TEST_CASE("AP is non-increasing in the IoU threshold") {
    msut::TestRng rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        const int n_images = rng.range(1, 3);
        std::vector<std::vector<Detection>> dets(n_images);
        std::vector<LabelMap> gts(n_images);
        for (int i = 0; i < n_images; ++i) random_case(rng, 5, 3, dets[i], gts[i]);
        const APReport r = ap_sweep(dets, gts);
        for (std::size_t i = 1; i < r.ap_by_threshold.size(); ++i)
            CHECK(r.ap_by_threshold[i].second <= r.ap_by_threshold[i - 1].second + 1e-12);
    }
}

TEST_CASE("scaling all scores by a positive constant changes nothing") {
    msut::TestRng rng(31337);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Detection> dets;
        LabelMap gt;
        random_case(rng, 5, 3, dets, gt);
        const APReport base = ap_sweep({dets}, {gt});
        auto scaled = dets;
        const double c = 0.1 + rng.u01() * 10;
        for (auto& d : scaled) d.score *= c;
        const APReport r = ap_sweep({scaled}, {gt});
        for (std::size_t i = 0; i < r.ap_by_threshold.size(); ++i)
            CHECK(r.ap_by_threshold[i].second == base.ap_by_threshold[i].second);
    }
}

TEST_CASE("score-free detections default to normalized area") {
    const LabelMap preds = labels_from({"11..", "11..", "...2"});
    const auto dets = detections_from_labels(preds);
    REQUIRE(dets.size() == 2);
    CHECK(dets[0].score == doctest::Approx(4.0 / 12.0));
    CHECK(dets[1].score == doctest::Approx(1.0 / 12.0));

    const std::vector<double> given = {0.25, 0.75};
    const auto scored = detections_from_labels(preds, &given);
    CHECK(scored[0].score == 0.25);
    CHECK(scored[1].score == 0.75);

    const std::vector<double> wrong = {0.5};
    CHECK_THROWS_AS(detections_from_labels(preds, &wrong), std::invalid_argument);
}
