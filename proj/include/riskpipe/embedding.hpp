#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "riskpipe/matrix.hpp"

namespace riskpipe {

struct TsneParams {
    double perplexity = 30.0;
    double learning_rate = 200.0;
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;

    void validate(std::size_t n) const {
        if (perplexity <= 0.0) throw ArgumentError("perplexity must be > 0");
        if (perplexity >= static_cast<double>(n)) {
            throw ArgumentError("perplexity must be smaller than the sample count");
        }
        if (learning_rate <= 0.0) throw ArgumentError("learning_rate must be > 0");
        if (iterations < 1) throw ArgumentError("iterations must be >= 1");
    }
};

/// N x 2 low-dimensional representation of a dataset.
struct Embedding {
    Matrix points;
    std::string method;  ///< "pca" or "tsne"
    std::optional<TsneParams> tsne_params;
    std::optional<double> final_kl;
};

}  // namespace riskpipe
