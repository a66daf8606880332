#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "geocot/error.hpp"
#include "geocot/toy_policy.hpp"

namespace geocot {

enum class LossReduction { Sum, MeanPerToken };

inline std::string reduction_name(LossReduction r) { return r == LossReduction::Sum ? "sum" : "mean_per_token"; }

// -sum over records and tokens of log p(o_t | o_<t, context).
inline double sft_loss(const std::vector<std::vector<double>>& per_token_logprobs,
                       LossReduction reduction = LossReduction::Sum) {
    double s = 0;
    std::size_t n = 0;
    for (const auto& seq : per_token_logprobs)
        for (double lp : seq) s -= lp, ++n;
    if (reduction == LossReduction::MeanPerToken) return n ? s / static_cast<double>(n) : 0.0;
    return s;
}

inline std::vector<double> teacher_forced_score(const toy::ToyPolicy& policy, const std::vector<int>& target,
                                                int context) {
    if (context < 0 || context >= policy.context_count())
        throw Error(Errc::TokenOutOfVocabulary, "context id out of range");
    return toy::sequence_logprobs(policy, context, target);
}

struct SftExample {
    int context = 0;
    std::vector<int> tokens;
};

inline double sft_batch_loss(const toy::ToyPolicy& policy, const std::vector<SftExample>& batch,
                             LossReduction reduction = LossReduction::Sum) {
    std::vector<std::vector<double>> lps;
    for (const auto& ex : batch) lps.push_back(teacher_forced_score(policy, ex.tokens, ex.context));
    return sft_loss(lps, reduction);
}

// Gradient of sft_batch_loss w.r.t. the logits: softmax minus one-hot at every
// conditioned slot, accumulated.
inline std::vector<double> sft_gradient(const toy::ToyPolicy& policy, const std::vector<SftExample>& batch,
                                        LossReduction reduction = LossReduction::Sum) {
    std::vector<double> grad(policy.param_count(), 0.0);
    std::size_t n = 0;
    const int V = policy.vocab_size();
    for (const auto& ex : batch) {
        int prev = policy.start_token();
        for (int tok : ex.tokens) {
            if (!policy.in_vocab(tok)) throw Error(Errc::TokenOutOfVocabulary, "token " + std::to_string(tok));
            const auto pr = policy.probs(ex.context, prev);
            const std::size_t base = policy.index(ex.context, prev, 0);
            for (int j = 0; j < V; ++j) grad[base + j] += pr[j];
            grad[base + tok] -= 1.0;
            prev = tok;
            ++n;
        }
    }
    if (reduction == LossReduction::MeanPerToken && n > 0)
        for (double& g : grad) g /= static_cast<double>(n);
    return grad;
}

inline void sft_step(toy::ToyPolicy& policy, const std::vector<SftExample>& batch, double learning_rate,
                     LossReduction reduction = LossReduction::Sum) {
    const auto g = sft_gradient(policy, batch, reduction);
    auto& z = policy.params();
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= learning_rate * g[i];
}

} // namespace geocot
