#pragma once

#include "net.hpp"
#include "parallel.hpp"
#include "vecmath.hpp"

#include <string>

namespace nsae {

enum class EmbeddingTap { Bottleneck, DecoderOutput };

struct EmbedOptions {
    EmbeddingTap tap = EmbeddingTap::Bottleneck;
    // L2-normalize each embedding. All-zero embeddings (a fully dead ReLU
    // bottleneck) are passed through and rejected later by cosine scoring.
    bool normalize = true;
    unsigned workers = 1;
};

inline Vector extract_embedding(const AutoencoderParams& p, std::span<const double> x,
                                EmbeddingTap tap, bool normalize = false)
{
    auto result = forward(p, x);
    Vector out = tap == EmbeddingTap::Bottleneck ? std::move(result.bottleneck)
                                                 : std::move(result.reconstruction);
    if (normalize && norm(out) >= kZeroNormEpsilon)
        out = l2_normalize(out);
    return out;
}

inline Dataset extract_all(const AutoencoderParams& p, const Dataset& data,
                           const EmbedOptions& opts = {})
{
    Dataset out(data.size());
    parallel_for(data.size(), opts.workers, [&](std::size_t i) {
        try {
            out[i] = extract_embedding(p, data[i], opts.tap, opts.normalize);
        } catch (const Error& e) {
            throw Error(e.code(), "vector " + std::to_string(i) + ": " + e.what());
        }
    });
    return out;
}

} // namespace nsae
