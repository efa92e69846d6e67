// Writes a seeded synthetic 10-class image set as an IDX pair, for use where
// the real handwritten-digit files are not available.
#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rebasin/data.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate a synthetic IDX image/label pair"};
    std::size_t count = 12000;
    std::uint64_t seed = 0;
    std::string images = "images.idx3-ubyte";
    std::string labels = "labels.idx1-ubyte";
    app.add_option("--count", count, "Number of images");
    app.add_option("--seed", seed, "Generator seed");
    app.add_option("--images", images, "Output images path");
    app.add_option("--labels", labels, "Output labels path");
    CLI11_PARSE(app, argc, argv);

    try {
        const rebasin::ImageSet set = rebasin::gen_synthetic_images(count, seed);
        rebasin::save_idx(set, images, labels);
        std::cout << "wrote " << set.size() << " images to " << images << " / " << labels << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
