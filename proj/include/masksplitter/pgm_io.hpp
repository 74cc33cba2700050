#pragma once

#include <string>
#include <vector>

#include "masksplitter/dataset.hpp"
#include "masksplitter/mask.hpp"

namespace masksplitter {

/// Binary "P5" portable graymaps. Images and binary masks use maxval 255
/// (mask foreground stored as 255); label maps use maxval 65535, big-endian.
/// All failures throw std::runtime_error with a diagnostic.
GrayImage read_pgm_gray(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& img);

/// Any nonzero pixel reads as foreground.
BinaryMask read_pgm_mask(const std::string& path);
void write_pgm(const std::string& path, const BinaryMask& mask);

/// Accepts maxval 255 or 65535 payloads; ids are relabeled contiguously in
/// order of first appearance.
LabelMap read_pgm_labels(const std::string& path);
void write_pgm(const std::string& path, const LabelMap& map);

struct ManifestRecord {
    std::string image_path;
    std::string pred_path;
    std::string gt_path;
    std::string score_path;  // optional, may be empty
};

/// Plain CSV, one record per line: image,pred,gt[,scores]. Lines starting
/// with '#' are skipped. Duplicate image paths are rejected.
std::vector<ManifestRecord> read_manifest(const std::string& path);

/// One real per line, one line per prediction blob.
std::vector<double> read_score_file(const std::string& path);

}  // namespace masksplitter
