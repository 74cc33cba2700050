#include "masksplitter/pgm_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace masksplitter {

namespace {

struct PgmData {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::vector<int> values;  // decoded samples
};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

int read_header_token(std::istream& in) {
    // skips whitespace and '#' comments
    while (true) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) return -1;
    return value;
}

PgmData read_pgm_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open for reading");

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5')
        fail(path, std::string("unsupported format, expected P5 got ") + magic[0] + magic[1]);

    PgmData pgm;
    pgm.width = read_header_token(in);
    pgm.height = read_header_token(in);
    pgm.maxval = read_header_token(in);
    if (pgm.width <= 0 || pgm.height <= 0) fail(path, "malformed header dimensions");
    if (pgm.maxval != 255 && pgm.maxval != 65535)
        fail(path, "unsupported maxval " + std::to_string(pgm.maxval));
    in.get();  // single whitespace byte after maxval

    const std::size_t n = static_cast<std::size_t>(pgm.width) * pgm.height;
    const std::size_t bytes = pgm.maxval > 255 ? 2 * n : n;
    std::vector<unsigned char> raw(bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes) fail(path, "truncated payload");

    pgm.values.resize(n);
    if (pgm.maxval > 255) {
        for (std::size_t i = 0; i < n; ++i)
            pgm.values[i] = (raw[2 * i] << 8) | raw[2 * i + 1];  // big-endian
    } else {
        for (std::size_t i = 0; i < n; ++i) pgm.values[i] = raw[i];
    }
    return pgm;
}

void write_pgm_raw(const std::string& path, int width, int height, int maxval,
                   const std::vector<int>& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "P5\n" << width << " " << height << "\n" << maxval << "\n";
    if (maxval > 255) {
        for (int v : values) {
            out.put(static_cast<char>((v >> 8) & 0xff));
            out.put(static_cast<char>(v & 0xff));
        }
    } else {
        for (int v : values) out.put(static_cast<char>(v & 0xff));
    }
    if (!out) fail(path, "write failed");
}

}  // namespace

GrayImage read_pgm_gray(const std::string& path) {
    const PgmData pgm = read_pgm_raw(path);
    if (pgm.maxval != 255) fail(path, "expected 8-bit graymap");
    GrayImage img(pgm.width, pgm.height);
    for (std::size_t i = 0; i < pgm.values.size(); ++i)
        img.intensities[i] = static_cast<std::uint8_t>(pgm.values[i]);
    return img;
}

void write_pgm(const std::string& path, const GrayImage& img) {
    std::vector<int> values(img.intensities.begin(), img.intensities.end());
    write_pgm_raw(path, img.width, img.height, 255, values);
}

BinaryMask read_pgm_mask(const std::string& path) {
    const PgmData pgm = read_pgm_raw(path);
    BinaryMask mask(pgm.width, pgm.height);
    for (std::size_t i = 0; i < pgm.values.size(); ++i) mask.data[i] = pgm.values[i] ? 1 : 0;
    return mask;
}

void write_pgm(const std::string& path, const BinaryMask& mask) {
    std::vector<int> values(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) values[i] = mask.data[i] ? 255 : 0;
    write_pgm_raw(path, mask.width, mask.height, 255, values);
}

LabelMap read_pgm_labels(const std::string& path) {
    const PgmData pgm = read_pgm_raw(path);
    LabelMap map(pgm.width, pgm.height);
    std::vector<int> remap(65536, 0);
    int next = 0;
    for (std::size_t i = 0; i < pgm.values.size(); ++i) {
        const int v = pgm.values[i];
        if (!v) continue;
        if (!remap[v]) remap[v] = ++next;
        map.labels[i] = remap[v];
    }
    map.count = next;
    return map;
}

void write_pgm(const std::string& path, const LabelMap& map) {
    if (map.count > kMaxInstances) fail(path, "too many instances for 16-bit label format");
    write_pgm_raw(path, map.width, map.height, 65535, map.labels);
}

std::vector<ManifestRecord> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open manifest");
    std::vector<ManifestRecord> records;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 3 || fields.size() > 4)
            fail(path, "line " + std::to_string(lineno) + ": expected 3 or 4 fields");
        for (std::size_t i = 0; i < 3; ++i)
            if (fields[i].empty())
                fail(path, "line " + std::to_string(lineno) + ": empty path");
        if (!seen.insert(fields[0]).second)
            fail(path, "line " + std::to_string(lineno) + ": duplicate image path " + fields[0]);
        records.push_back({fields[0], fields[1], fields[2],
                           fields.size() == 4 ? fields[3] : std::string()});
    }
    return records;
}

std::vector<double> read_score_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open score file");
    std::vector<double> scores;
    double v = 0.0;
    while (in >> v) scores.push_back(v);
    return scores;
}

}  // namespace masksplitter
