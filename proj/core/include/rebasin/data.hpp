#pragma once

#include <cstdint>
#include <string>

#include "rebasin/mlp.hpp"
#include "rebasin/plan.hpp"

namespace rebasin {

enum class PolyKind { pol1, pol3 };

// x uniform on the task interval; pol1: y = x + 3 on (-4, -2), pol3:
// y = (x - 3)^3 on (2, 4), plus N(0, noise_sd) target noise.
Dataset gen_poly(PolyKind kind, std::size_t n, double noise_sd, std::uint64_t seed);

struct ImageSet {
    std::size_t rows = 28, cols = 28;
    Matrix images;                 // N x (rows*cols), gray values in [0, 1]
    std::vector<std::size_t> labels;  // class indices 0..9

    std::size_t size() const { return labels.size(); }
};

// Big-endian IDX pair: images magic 0x00000803, labels magic 0x00000801.
// Pixels are scaled to [0, 1] by /255.
ImageSet load_idx(const std::string& images_path, const std::string& labels_path);
void save_idx(const ImageSet& set, const std::string& images_path,
              const std::string& labels_path);

// Clockwise rotation about the image center, bilinear interpolation,
// out-of-frame pixels 0. Labels unchanged.
ImageSet rotate(const ImageSet& set, double degrees);

struct Episode {
    std::size_t id = 0;
    Dataset train;
    Dataset test;
};

Dataset to_dataset(const ImageSet& set, std::size_t classes = 10);

// Episode e rotates by e * 180/(E-1) degrees (0 when E = 1); train and test
// rows are seeded subsamples, disjoint within an episode.
std::vector<Episode> make_rotated_stream(const ImageSet& base, std::size_t episodes,
                                         std::size_t train_per_episode,
                                         std::size_t test_per_episode, std::uint64_t seed);

// Uniformly random permutation matrix per hidden width (seeded Fisher-Yates).
TransportPlan sample_plan(const std::vector<std::size_t>& hidden_widths, std::uint64_t seed);

// min(k, available) rows per class, uniformly without replacement.
Dataset subsample_per_class(const Dataset& data, std::size_t k, std::uint64_t seed);

// Deterministic 10-class stand-in for handwritten-digit data: each class is a
// fixed arrangement of Gaussian blobs, each sample gets a seeded shift, small
// rotation, and pixel noise. Used where the real IDX files are not available.
ImageSet gen_synthetic_images(std::size_t n, std::uint64_t seed);

// x,y columns for regression sets.
std::string dataset_csv(const Dataset& data);

}  // namespace rebasin
