#include "rebasin/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace rebasin {

Dataset gen_poly(PolyKind kind, std::size_t n, double noise_sd, std::uint64_t seed) {
    if (n < 1) throw InvalidInputError("gen_poly: n must be >= 1");
    if (noise_sd < 0.0) throw InvalidInputError("gen_poly: noise_sd must be >= 0");
    Rng rng(seed);
    Matrix x(n, 1), y(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (kind == PolyKind::pol1) {
            const double xi = rng.uniform(-4.0, -2.0);
            x(i, 0) = xi;
            y(i, 0) = xi + 3.0;
        } else {
            const double xi = rng.uniform(2.0, 4.0);
            x(i, 0) = xi;
            y(i, 0) = (xi - 3.0) * (xi - 3.0) * (xi - 3.0);
        }
        if (noise_sd > 0.0) y(i, 0) += rng.normal(0.0, noise_sd);
    }
    return Dataset{std::move(x), std::move(y), TaskKind::regression};
}

namespace {

std::uint32_t read_u32_be(std::ifstream& in, const std::string& path, const char* field) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4))
        throw FormatError("IDX " + path + ": truncated while reading " + field);
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_u32_be(std::ofstream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(buf), 4);
}

}  // namespace

ImageSet load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("IDX: cannot open image file " + images_path);
    const std::uint32_t img_magic = read_u32_be(img, images_path, "image magic");
    if (img_magic != 0x00000803)
        throw FormatError("IDX " + images_path + ": bad image magic (expected 0x00000803)");
    const std::uint32_t n = read_u32_be(img, images_path, "image count");
    const std::uint32_t rows = read_u32_be(img, images_path, "row count");
    const std::uint32_t cols = read_u32_be(img, images_path, "column count");

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError("IDX: cannot open label file " + labels_path);
    const std::uint32_t lab_magic = read_u32_be(lab, labels_path, "label magic");
    if (lab_magic != 0x00000801)
        throw FormatError("IDX " + labels_path + ": bad label magic (expected 0x00000801)");
    const std::uint32_t nl = read_u32_be(lab, labels_path, "label count");
    if (n != nl)
        throw FormatError("IDX: image count " + std::to_string(n) + " != label count " +
                          std::to_string(nl));

    ImageSet set;
    set.rows = rows;
    set.cols = cols;
    set.images = Matrix(n, std::size_t(rows) * cols);
    set.labels.resize(n);
    std::vector<unsigned char> buf(std::size_t(rows) * cols);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), buf.size()))
            throw FormatError("IDX " + images_path + ": truncated pixel data at image " +
                              std::to_string(i));
        for (std::size_t k = 0; k < buf.size(); ++k)
            set.images(i, k) = static_cast<double>(buf[k]) / 255.0;
        unsigned char l;
        if (!lab.read(reinterpret_cast<char*>(&l), 1))
            throw FormatError("IDX " + labels_path + ": truncated label data at image " +
                              std::to_string(i));
        set.labels[i] = l;
    }
    return set;
}

void save_idx(const ImageSet& set, const std::string& images_path,
              const std::string& labels_path) {
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("IDX: cannot write " + images_path);
    write_u32_be(img, 0x00000803);
    write_u32_be(img, static_cast<std::uint32_t>(set.size()));
    write_u32_be(img, static_cast<std::uint32_t>(set.rows));
    write_u32_be(img, static_cast<std::uint32_t>(set.cols));
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t k = 0; k < set.rows * set.cols; ++k) {
            const double v = std::clamp(set.images(i, k), 0.0, 1.0);
            const unsigned char byte = static_cast<unsigned char>(std::lround(v * 255.0));
            img.put(static_cast<char>(byte));
        }

    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError("IDX: cannot write " + labels_path);
    write_u32_be(lab, 0x00000801);
    write_u32_be(lab, static_cast<std::uint32_t>(set.size()));
    for (std::size_t l : set.labels) lab.put(static_cast<char>(l));
}

ImageSet rotate(const ImageSet& set, double degrees) {
    if (degrees == 0.0) return set;
    const double theta = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const double cy = (static_cast<double>(set.rows) - 1.0) / 2.0;
    const double cx = (static_cast<double>(set.cols) - 1.0) / 2.0;

    ImageSet out = set;
    for (std::size_t n = 0; n < set.size(); ++n) {
        for (std::size_t r = 0; r < set.rows; ++r) {
            for (std::size_t col = 0; col < set.cols; ++col) {
                // Inverse map of a visually clockwise rotation in row-down
                // image coordinates.
                const double x = static_cast<double>(col) - cx;
                const double y = static_cast<double>(r) - cy;
                const double sx = c * x + s * y + cx;
                const double sy = -s * x + c * y + cy;
                double v = 0.0;
                if (sx > -1.0 && sx < static_cast<double>(set.cols) && sy > -1.0 &&
                    sy < static_cast<double>(set.rows)) {
                    const double fr = std::floor(sy), fc = std::floor(sx);
                    const double dy = sy - fr, dx = sx - fc;
                    auto at = [&](double rr, double cc) -> double {
                        if (rr < 0 || cc < 0 || rr >= static_cast<double>(set.rows) ||
                            cc >= static_cast<double>(set.cols))
                            return 0.0;
                        return set.images(n, static_cast<std::size_t>(rr) * set.cols +
                                                 static_cast<std::size_t>(cc));
                    };
                    v = (1 - dy) * ((1 - dx) * at(fr, fc) + dx * at(fr, fc + 1)) +
                        dy * ((1 - dx) * at(fr + 1, fc) + dx * at(fr + 1, fc + 1));
                }
                out.images(n, r * set.cols + col) = v;
            }
        }
    }
    return out;
}

Dataset to_dataset(const ImageSet& set, std::size_t classes) {
    Matrix targets(set.size(), classes);
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.labels[i] >= classes)
            throw InvalidInputError("to_dataset: label out of class range");
        targets(i, set.labels[i]) = 1.0;
    }
    return Dataset{set.images, std::move(targets), TaskKind::classification};
}

namespace {
ImageSet select_rows(const ImageSet& set, const std::vector<std::size_t>& idx) {
    ImageSet out;
    out.rows = set.rows;
    out.cols = set.cols;
    out.images = Matrix(idx.size(), set.rows * set.cols);
    out.labels.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t k = 0; k < set.rows * set.cols; ++k)
            out.images(i, k) = set.images(idx[i], k);
        out.labels[i] = set.labels[idx[i]];
    }
    return out;
}
}  // namespace

std::vector<Episode> make_rotated_stream(const ImageSet& base, std::size_t episodes,
                                         std::size_t train_per_episode,
                                         std::size_t test_per_episode, std::uint64_t seed) {
    if (episodes < 1) throw InvalidInputError("make_rotated_stream: episodes must be >= 1");
    if (train_per_episode + test_per_episode > base.size())
        throw InvalidInputError("make_rotated_stream: train+test exceeds base size");
    Rng rng(seed);
    std::vector<Episode> stream;
    for (std::size_t e = 0; e < episodes; ++e) {
        const double angle =
            episodes == 1 ? 0.0
                          : static_cast<double>(e) * 180.0 / static_cast<double>(episodes - 1);
        std::vector<std::size_t> order = rng.permutation(base.size());
        std::vector<std::size_t> train_idx(order.begin(), order.begin() + train_per_episode);
        std::vector<std::size_t> test_idx(order.begin() + train_per_episode,
                                          order.begin() + train_per_episode + test_per_episode);
        const ImageSet train_imgs = rotate(select_rows(base, train_idx), angle);
        const ImageSet test_imgs = rotate(select_rows(base, test_idx), angle);
        stream.push_back(Episode{e, to_dataset(train_imgs), to_dataset(test_imgs)});
    }
    return stream;
}

TransportPlan sample_plan(const std::vector<std::size_t>& hidden_widths, std::uint64_t seed) {
    Rng rng(seed);
    TransportPlan plan;
    plan.mode = PlanMode::hard;
    for (std::size_t w : hidden_widths) {
        if (w < 1) throw InvalidInputError("sample_plan: widths must be >= 1");
        const std::vector<std::size_t> perm = rng.permutation(w);
        Matrix p(w, w);
        for (std::size_t i = 0; i < w; ++i) p(i, perm[i]) = 1.0;
        plan.mats.push_back(std::move(p));
    }
    return plan;
}

Dataset subsample_per_class(const Dataset& data, std::size_t k, std::uint64_t seed) {
    if (data.task != TaskKind::classification)
        throw ConfigError("subsample_per_class: classification datasets only");
    const std::size_t classes = data.targets.cols();
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t r = 0; r < data.size(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c)
            if (data.targets(r, c) > data.targets(r, best)) best = c;
        by_class[best].push_back(r);
    }
    Rng rng(seed);
    std::vector<std::size_t> chosen;
    for (std::size_t c = 0; c < classes; ++c) {
        auto& rows = by_class[c];
        const std::vector<std::size_t> order = rng.permutation(std::max<std::size_t>(rows.size(), 1));
        const std::size_t take = std::min(k, rows.size());
        for (std::size_t i = 0; i < take; ++i) chosen.push_back(rows[order[i]]);
    }
    if (chosen.empty()) throw InvalidInputError("subsample_per_class: empty selection");
    return data.rows(chosen);
}

ImageSet gen_synthetic_images(std::size_t n, std::uint64_t seed) {
    constexpr std::size_t side = 28, classes = 10, blobs = 3;
    // Class layouts are fixed independent of the sample seed.
    Rng proto_rng(0xb10b5);
    std::vector<std::array<double, 3>> centers;  // (r, c, sigma) per class*blob
    centers.reserve(classes * blobs);
    for (std::size_t c = 0; c < classes * blobs; ++c)
        centers.push_back({proto_rng.uniform(7.0, 21.0), proto_rng.uniform(7.0, 21.0),
                           proto_rng.uniform(1.8, 3.0)});

    Rng rng(seed);
    ImageSet set;
    set.rows = side;
    set.cols = side;
    set.images = Matrix(n, side * side);
    set.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = rng.index(classes);
        set.labels[i] = label;
        const double dr = rng.uniform(-2.0, 2.0);
        const double dc = rng.uniform(-2.0, 2.0);
        const double jitter = rng.uniform(-15.0, 15.0) * std::numbers::pi / 180.0;
        const double cj = std::cos(jitter), sj = std::sin(jitter);
        for (std::size_t r = 0; r < side; ++r) {
            for (std::size_t col = 0; col < side; ++col) {
                double v = 0.0;
                for (std::size_t bidx = 0; bidx < blobs; ++bidx) {
                    const auto& blob = centers[label * blobs + bidx];
                    // jittered blob center
                    const double by = blob[0] - 13.5, bx = blob[1] - 13.5;
                    const double cy = cj * by - sj * bx + 13.5 + dr;
                    const double cx = sj * by + cj * bx + 13.5 + dc;
                    const double dy = static_cast<double>(r) - cy;
                    const double dx = static_cast<double>(col) - cx;
                    v += std::exp(-(dx * dx + dy * dy) / (2.0 * blob[2] * blob[2]));
                }
                v += rng.normal(0.0, 0.05);
                set.images(i, r * side + col) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return set;
}

std::string dataset_csv(const Dataset& data) {
    std::ostringstream out;
    out.precision(17);
    out << "x,y\n";
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t c = 0; c < data.inputs.cols(); ++c)
            out << (c ? ";" : "") << data.inputs(r, c);
        out << ',';
        for (std::size_t c = 0; c < data.targets.cols(); ++c)
            out << (c ? ";" : "") << data.targets(r, c);
        out << "\n";
    }
    return out.str();
}

}  // namespace rebasin
