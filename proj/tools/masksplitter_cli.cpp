#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "masksplitter/dataset.hpp"
#include "masksplitter/head.hpp"
#include "masksplitter/mask.hpp"
#include "masksplitter/metrics.hpp"
#include "masksplitter/pgm_io.hpp"
#include "masksplitter/splitter.hpp"

namespace fs = std::filesystem;
using namespace masksplitter;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::pair<int, int> parse_size(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw std::runtime_error("--size expects H,W");
    const int h = std::stoi(s.substr(0, comma));
    const int w = std::stoi(s.substr(comma + 1));
    if (h < 1 || w < 1) throw std::runtime_error("--size must be positive");
    return {h, w};
}

void write_score_csv(const std::string& path, const std::vector<double>& grid, int width) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << fmt(grid[i]);
        out << ((static_cast<int>(i) % width == width - 1) ? '\n' : ',');
    }
}

int cmd_split(const std::string& pred_path, const std::string& gt_path, double threshold,
              int connectivity, const std::string& out_dir) {
    const BinaryMask pred = read_pgm_mask(pred_path);
    const LabelMap gt = read_pgm_labels(gt_path);
    const auto conn = connectivity == 4 ? Connectivity::Four : Connectivity::Eight;
    const LabelMap blobs = connected_components(pred, conn);
    const SplitResult r = split_masks(blobs, gt, threshold);

    fs::create_directories(out_dir);
    write_pgm(out_dir + "/good.pgm", r.good_mask);
    write_pgm(out_dir + "/bad1.pgm", r.bad1_mask);
    write_pgm(out_dir + "/bad2.pgm", r.bad2_mask);

    nlohmann::json counts = {{"n_good", r.n_good},
                             {"n_bad_type1", r.n_bad_type1},
                             {"n_bad_type2", r.n_bad_type2}};
    std::ofstream out(out_dir + "/counts.json");
    out << counts.dump(2) << "\n";
    std::cout << counts.dump() << "\n";
    return 0;
}

int cmd_eval(const std::string& manifest_path, const std::string& thresholds,
             const std::string& name, const std::string& report_path) {
    const auto records = read_manifest(manifest_path);
    std::vector<std::vector<Detection>> dets;
    std::vector<LabelMap> gts;
    for (const auto& rec : records) {
        const LabelMap blobs = connected_components(read_pgm_mask(rec.pred_path));
        if (!rec.score_path.empty()) {
            const auto scores = read_score_file(rec.score_path);
            dets.push_back(detections_from_labels(blobs, &scores));
        } else {
            dets.push_back(detections_from_labels(blobs));
        }
        gts.push_back(read_pgm_labels(rec.gt_path));
    }
    const APReport report = ap_sweep(dets, gts);

    std::vector<std::pair<std::string, double>> columns;
    std::stringstream ss(thresholds);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "sweep")
            columns.emplace_back("AP@0.5:0.95", report.mean_ap);
        else
            columns.emplace_back("AP@" + tok, report.ap_at(std::stod(tok)));
    }

    std::ofstream csv(report_path);
    if (!csv) throw std::runtime_error(report_path + ": cannot open for writing");
    std::printf("%-16s", "run");
    csv << "run";
    for (const auto& [label, ap] : columns) {
        std::printf("  %-12s", label.c_str());
        csv << "," << label;
    }
    std::printf("\n%-16s", name.c_str());
    csv << "\n" << name;
    for (const auto& [label, ap] : columns) {
        std::printf("  %-12s", fmt3(ap).c_str());
        csv << "," << fmt3(ap);
    }
    std::printf("\n");
    csv << "\n";
    return 0;
}

int cmd_train_toy(std::uint64_t seed, const std::string& size, int n_instances, int iters,
                  double lr, const std::string& out_path, bool grad_check,
                  const std::string& bad_targets_mode) {
    const auto [h, w] = parse_size(size);
    const BadTargets bad_targets =
        bad_targets_mode == "zero" ? BadTargets::Zero : BadTargets::AlgorithmCounts;

    const SynthScene scene = synth_scene(w, h, n_instances, 0.0, seed);
    const LabelMap preds = connected_components(binarize_scores(scene.scores));
    const SplitResult split = split_masks(preds, scene.labels);

    HeadParams params = HeadParams::random_init(h, w, seed ^ 0x9e3779b97f4a7c15ull);

    if (grad_check) {
        const ForwardCache cache = head_forward(scene.scores, split, params);
        const HeadParams analytic =
            head_backward(cache, scene.scores, scene.labels, split, params, bad_targets);
        const auto ga = analytic.to_flat();
        auto flat = params.to_flat();
        const double step = 1e-4;
        double max_rel = 0.0;
        HeadParams probe(h, w);
        for (std::size_t i = 0; i < flat.size(); ++i) {
            const double saved = flat[i];
            flat[i] = saved + step;
            probe.from_flat(flat);
            const double lp =
                total_loss(head_forward(scene.scores, split, probe), scene.labels, split,
                           bad_targets).total;
            flat[i] = saved - step;
            probe.from_flat(flat);
            const double lm =
                total_loss(head_forward(scene.scores, split, probe), scene.labels, split,
                           bad_targets).total;
            flat[i] = saved;
            const double fd = (lp - lm) / (2.0 * step);
            const double rel =
                std::fabs(ga[i] - fd) / std::max({1.0, std::fabs(ga[i]), std::fabs(fd)});
            max_rel = std::max(max_rel, rel);
        }
        std::cout << "max relative gradient error: " << fmt(max_rel) << "\n";
        if (max_rel >= 1e-5) {
            std::cerr << "gradient check failed (tolerance 1e-5)\n";
            return 1;
        }
    }

    AdamState state(params.param_count(), lr);
    std::ofstream curve(out_path);
    if (!curve) throw std::runtime_error(out_path + ": cannot open for writing");
    curve << "step,l_gs,l_good,l_badcows,l_badpreds,total\n";
    for (int step = 1; step <= iters; ++step) {
        const ForwardCache cache = head_forward(scene.scores, split, params);
        const LossBreakdown loss = total_loss(cache, scene.labels, split, bad_targets);
        const HeadParams grads =
            head_backward(cache, scene.scores, scene.labels, split, params, bad_targets);
        adam_step(params, grads, state);
        curve << step << "," << fmt(loss.l_gs) << "," << fmt(loss.l_good) << ","
              << fmt(loss.l_badcows) << "," << fmt(loss.l_badpreds) << "," << fmt(loss.total)
              << "\n";
    }
    return 0;
}

int cmd_crop(const std::string& frame_path, const std::string& labels_path, int size,
             const std::string& out_dir) {
    const GrayImage frame = read_pgm_gray(frame_path);
    const LabelMap gt = read_pgm_labels(labels_path);
    fs::create_directories(out_dir);
    const CropSpec spec{size};
    for (int id = 1; id <= gt.count; ++id) {
        const auto [img, labels] = crop_around_instance(frame, gt, id, spec);
        char base[32];
        std::snprintf(base, sizeof(base), "crop_%03d", id);
        write_pgm(out_dir + "/" + base + ".pgm", img);
        write_pgm(out_dir + "/" + base + "_labels.pgm", labels);
    }
    return 0;
}

int cmd_synth(std::uint64_t seed, int n, double occlusion, const std::string& size,
              const std::string& out_dir) {
    const auto [h, w] = parse_size(size);
    const SynthScene scene = synth_scene(w, h, n, occlusion, seed);
    fs::create_directories(out_dir);
    write_score_csv(out_dir + "/object_scores.csv", scene.scores.object_scores, w);
    write_score_csv(out_dir + "/background_scores.csv", scene.scores.background_scores, w);
    write_pgm(out_dir + "/labels.pgm", scene.labels);
    write_pgm(out_dir + "/pred.pgm", binarize_scores(scene.scores));
    write_pgm(out_dir + "/frame.pgm", scene.frame);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MaskSplitter instance-segmentation refinement toolkit"};
    app.require_subcommand(1);

    // split
    auto* split = app.add_subcommand("split", "Classify prediction blobs against ground truth");
    std::string pred_path, gt_path, split_out;
    double threshold = 0.0;
    int connectivity = 8;
    split->add_option("--pred", pred_path, "Binary prediction mask (PGM)")->required();
    split->add_option("--gt", gt_path, "Ground-truth label map (PGM)")->required();
    split->add_option("--threshold", threshold, "IoU overlap threshold (default 0)");
    split->add_option("--connectivity", connectivity, "Blob connectivity, 4 or 8")
        ->check(CLI::IsMember({4, 8}));
    split->add_option("--out", split_out, "Output directory")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "Average-precision evaluation over a manifest");
    std::string manifest_path, thresholds = "0.5,0.7,sweep", run_name = "run",
                report_path = "report.csv";
    eval->add_option("--manifest", manifest_path, "CSV manifest: image,pred,gt[,scores]")
        ->required();
    eval->add_option("--thresholds", thresholds, "Comma list of IoU thresholds and/or 'sweep'");
    eval->add_option("--name", run_name, "Run name for the report row");
    eval->add_option("--report", report_path, "Report CSV path");

    // train-toy
    auto* train = app.add_subcommand("train-toy", "Train the head on a synthetic scene");
    std::uint64_t train_seed = 0;
    std::string train_size = "16,16", curve_path = "curve.csv", bad_targets_mode = "alg";
    int train_n = 3, iters = 500;
    double lr = 1e-3;
    bool grad_check = false;
    train->add_option("--seed", train_seed, "RNG seed");
    train->add_option("--size", train_size, "Scene size H,W");
    train->add_option("--n", train_n, "Number of synthetic instances");
    train->add_option("--iters", iters, "Adam steps");
    train->add_option("--lr", lr, "Learning rate");
    train->add_option("--out", curve_path, "Loss-curve CSV path");
    train->add_option("--bad-targets", bad_targets_mode, "Bad-count unit targets: alg or zero")
        ->check(CLI::IsMember({"alg", "zero"}));
    train->add_flag("--grad-check", grad_check, "Verify gradients against finite differences");

    // isodata
    auto* isodata = app.add_subcommand("isodata", "Print the ISODATA intensity threshold");
    std::string image_path;
    isodata->add_option("--image", image_path, "8-bit grayscale PGM")->required();

    // crop
    auto* crop = app.add_subcommand("crop", "Instance-centered crops of a frame");
    std::string frame_path, crop_labels_path, crop_out;
    int crop_size = 250;
    crop->add_option("--frame", frame_path, "Grayscale frame (PGM)")->required();
    crop->add_option("--labels", crop_labels_path, "Label map (PGM)")->required();
    crop->add_option("--size", crop_size, "Crop side length");
    crop->add_option("--out", crop_out, "Output directory")->required();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic scene");
    std::uint64_t synth_seed = 0;
    int synth_n = 3;
    double occlusion = 0.0;
    std::string synth_size = "32,32", synth_out;
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_option("--n", synth_n, "Number of instances");
    synth->add_option("--occlusion", occlusion, "Occlusion level in [0,1]");
    synth->add_option("--size", synth_size, "Scene size H,W");
    synth->add_option("--out", synth_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (split->parsed())
            return cmd_split(pred_path, gt_path, threshold, connectivity, split_out);
        if (eval->parsed()) return cmd_eval(manifest_path, thresholds, run_name, report_path);
        if (train->parsed())
            return cmd_train_toy(train_seed, train_size, train_n, iters, lr, curve_path,
                                 grad_check, bad_targets_mode);
        if (isodata->parsed()) {
            std::cout << isodata_threshold(read_pgm_gray(image_path)) << "\n";
            return 0;
        }
        if (crop->parsed()) return cmd_crop(frame_path, crop_labels_path, crop_size, crop_out);
        if (synth->parsed()) return cmd_synth(synth_seed, synth_n, occlusion, synth_size, synth_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
