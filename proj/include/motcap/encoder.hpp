#pragma once

#include <array>
#include <string>
#include <vector>

#include "motcap/autodiff.hpp"
#include "motcap/rng.hpp"
#include "motcap/skeleton.hpp"

namespace motcap {

using ParamList = std::vector<std::pair<std::string, Var>>;

inline Tensor uniform_init(Rng& rng, int rows, int cols, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor t(rows, cols);
    for (int i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

inline Var make_param(Tape& tape, ParamList& registry, const std::string& name, Tensor value) {
    Var p = parameter(tape, std::move(value), name);
    registry.emplace_back(name, p);
    return p;
}

struct EncoderConfig {
    int h1 = 32;
    int h2 = 16;
    int h_enc() const { return 2 * h2; }
};

// Two linear layers with tanh; one stack per (part, stream).
struct TwoLayerTanh {
    Var w1, b1, w2, b2;

    static TwoLayerTanh init(Tape& tape, ParamList& reg, const std::string& prefix, int in_dim,
                             const EncoderConfig& cfg, Rng& rng) {
        TwoLayerTanh mlp;
        mlp.w1 = make_param(tape, reg, prefix + ".fc1.w", uniform_init(rng, cfg.h1, in_dim, in_dim));
        mlp.b1 = make_param(tape, reg, prefix + ".fc1.b", Tensor(cfg.h1, 1, 0.0));
        mlp.w2 = make_param(tape, reg, prefix + ".fc2.w", uniform_init(rng, cfg.h2, cfg.h1, cfg.h1));
        mlp.b2 = make_param(tape, reg, prefix + ".fc2.b", Tensor(cfg.h2, 1, 0.0));
        return mlp;
    }

    // x: in_dim x T (columns are frames) -> h2 x T
    Var forward(const Var& x) const {
        auto z1 = motcap::tanh(add(matmul(w1, x), b1));
        return motcap::tanh(add(matmul(w2, z1), b2));
    }
};

// Frame-wise part-based motion encoder. Each part's positions and velocities
// are embedded separately and concatenated, so embeddings mix neither parts
// nor frames.
struct Encoder {
    EncoderConfig cfg;
    std::array<std::array<TwoLayerTanh, 2>, kNumParts> stacks;  // [part][0=pos,1=vel]

    static Encoder init(Tape& tape, ParamList& reg, const SkeletonLayout& layout,
                        const EncoderConfig& cfg, Rng& rng, int dims = 3) {
        Encoder enc;
        enc.cfg = cfg;
        static const char* stream_names[2] = {"pos", "vel"};
        for (int p = 0; p < kNumParts; ++p) {
            const int width = static_cast<int>(layout.joints_of(static_cast<BodyPart>(p)).size()) * dims;
            for (int s = 0; s < 2; ++s) {
                enc.stacks[p][s] = TwoLayerTanh::init(
                    tape, reg, "enc." + part_names()[p] + "." + stream_names[s], width, cfg, rng);
            }
        }
        return enc;
    }

    // Part embedding, columns are frames: h_enc x T_x.
    Var encode_part(Tape& tape, const PartArrays& parts, int part) const {
        auto as_cols = [&tape](const Tensor& t) {
            Tensor tr(t.cols(), t.rows());
            for (int r = 0; r < t.rows(); ++r)
                for (int c = 0; c < t.cols(); ++c) tr(c, r) = t(r, c);
            return constant(tape, std::move(tr));
        };
        auto pe = stacks[part][0].forward(as_cols(parts.positions[part]));
        auto ve = stacks[part][1].forward(as_cols(parts.velocities[part]));
        return concat(pe, ve, 0);
    }

    // P* flattened part-major: h_enc x (a*T_x), column p*T_x + k holds P_{pk}.
    Var encode(Tape& tape, const PartArrays& parts) const {
        std::vector<Var> cols;
        cols.reserve(kNumParts);
        for (int p = 0; p < kNumParts; ++p) cols.push_back(encode_part(tape, parts, p));
        return concat(cols, 1);
    }
};

}  // namespace motcap
