#pragma once

#include <stdexcept>
#include <vector>

#include "motcap/autodiff.hpp"
#include "motcap/supervision.hpp"
#include "motcap/vocab.hpp"

namespace motcap {

inline constexpr double kLogGuard = 1e-12;

struct LossWeights {
    double spat = 0.0;
    double adapt = 0.0;

    void validate() const {
        if (spat < 0.0 || adapt < 0.0) {
            throw std::invalid_argument("loss weights must be non-negative");
        }
    }
};

struct LossBreakdown {
    double lang = 0.0;
    double adapt = 0.0;
    double spat = 0.0;
    double total = 0.0;
};

// -sum_t log p_t(target_t) over non-PAD steps.
inline Var language_loss(const std::vector<Var>& step_probs, const std::vector<int>& targets,
                         int pad_id = Vocabulary::pad_id) {
    if (step_probs.size() != targets.size()) {
        throw std::invalid_argument("language_loss: " + std::to_string(step_probs.size()) +
                                    " prob vectors vs " + std::to_string(targets.size()) + " targets");
    }
    if (step_probs.empty()) throw std::invalid_argument("language_loss: empty sequence");
    Tape& tape = *step_probs[0]->tape;
    Var total = constant(tape, Tensor::scalar(0.0));
    for (size_t t = 0; t < targets.size(); ++t) {
        if (targets[t] == pad_id) continue;
        auto p = slice_rows(step_probs[t], targets[t], targets[t] + 1);
        total = add(total, neg(motcap::log(clamp_min(p, kLogGuard))));
    }
    return total;
}

// Binary cross-entropy of the gate against 0/1 motion-word targets, summed
// over steps.
inline Var adaptive_loss(const std::vector<Var>& betas, const std::vector<double>& targets) {
    if (betas.size() != targets.size()) {
        throw std::invalid_argument("adaptive_loss: " + std::to_string(betas.size()) +
                                    " gates vs " + std::to_string(targets.size()) + " targets");
    }
    if (betas.empty()) throw std::invalid_argument("adaptive_loss: empty sequence");
    Tape& tape = *betas[0]->tape;
    Var total = constant(tape, Tensor::scalar(0.0));
    for (size_t t = 0; t < betas.size(); ++t) {
        auto on = motcap::log(clamp_min(betas[t], kLogGuard));
        auto off = motcap::log(clamp_min(add_scalar(neg(betas[t]), 1.0), kLogGuard));
        total = add(total, add(mul_scalar(on, targets[t]), mul_scalar(off, 1.0 - targets[t])));
    }
    return neg(total);
}

// -(1/N_y) sum over supervised (t, i, k) of
//   alpha_ti log a_hat_tik + (1 - alpha_ti) log(1 - a_hat_tik),
// with the per-word target broadcast across frames.
inline Var spatial_loss(const std::vector<Var>& alphas, const SupervisionTargets& targets) {
    if (targets.n_supervised < 1) {
        throw std::runtime_error("spatial_loss: no supervised words (N_y = 0); caller must skip");
    }
    if (alphas.size() != targets.steps()) {
        throw std::invalid_argument("spatial_loss: " + std::to_string(alphas.size()) +
                                    " alpha maps vs " + std::to_string(targets.steps()) + " steps");
    }
    Tape& tape = *alphas[0]->tape;
    Var total = constant(tape, Tensor::scalar(0.0));
    for (size_t t = 0; t < alphas.size(); ++t) {
        if (!targets.supervised[t]) continue;
        const auto& target = targets.alpha_target[t];
        Tensor col(kNumParts, 1);
        for (int p = 0; p < kNumParts; ++p) col[p] = target[p];
        auto target_col = constant(tape, std::move(col));
        auto on = mul(target_col, motcap::log(clamp_min(alphas[t], kLogGuard)));
        auto off = mul(add_scalar(neg(target_col), 1.0),
                       motcap::log(clamp_min(add_scalar(neg(alphas[t]), 1.0), kLogGuard)));
        total = add(total, reduce_sum(add(on, off)));
    }
    return mul_scalar(total, -1.0 / targets.n_supervised);
}

// total = lang + lambda_spat * spat + lambda_adapt * adapt. Pass nullptr for
// a skipped spatial term (N_y = 0).
inline Var global_loss(const Var& lang, const Var* spat, const Var* adapt, const LossWeights& w) {
    w.validate();
    Var total = lang;
    if (spat != nullptr && w.spat > 0.0) total = add(total, mul_scalar(*spat, w.spat));
    if (adapt != nullptr && w.adapt > 0.0) total = add(total, mul_scalar(*adapt, w.adapt));
    return total;
}

inline LossBreakdown breakdown(const Var& lang, const Var* spat, const Var* adapt,
                               const LossWeights& w) {
    LossBreakdown b;
    b.lang = lang->value.item();
    b.spat = spat ? (*spat)->value.item() : 0.0;
    b.adapt = adapt ? (*adapt)->value.item() : 0.0;
    b.total = b.lang + w.spat * b.spat + w.adapt * b.adapt;
    return b;
}

}  // namespace motcap
