#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "geocot/error.hpp"

namespace geocot {

struct GrpoConfig {
    int k = 8;
    double epsilon = 0.2;
    double beta = 0.04;
    double std_floor = 1e-8;
    bool length_normalize = false;

    void validate() const {
        if (k < 2) throw Error(Errc::InvalidConfig, "group size k must be >= 2");
        if (!(epsilon > 0 && epsilon < 1)) throw Error(Errc::InvalidConfig, "epsilon must lie in (0,1)");
        if (!(beta >= 0)) throw Error(Errc::InvalidConfig, "beta must be >= 0");
        if (!(std_floor > 0)) throw Error(Errc::InvalidConfig, "std_floor must be positive");
    }
};

struct RolloutSequence {
    std::vector<int> tokens;
    std::vector<double> logprob_new;
    std::vector<double> logprob_old;
    std::vector<double> logprob_ref;
    double reward = 0.0;
};

struct Group {
    std::vector<RolloutSequence> rollouts;
    std::vector<double> advantages;
};

// (R_i - mean) / population std; all zeros when the std is below std_floor.
inline std::vector<double> normalize_advantages(const std::vector<double>& rewards, double std_floor = 1e-8) {
    if (rewards.size() < 2) throw Error(Errc::GroupTooSmall, "advantage normalization needs k >= 2");
    const double n = static_cast<double>(rewards.size());
    double mean = 0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double sd = std::sqrt(var / n);
    std::vector<double> out(rewards.size(), 0.0);
    if (!(sd >= std_floor)) return out;
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
    return out;
}

inline void compute_advantages(Group& g, double std_floor = 1e-8) {
    std::vector<double> r;
    for (const auto& s : g.rollouts) r.push_back(s.reward);
    g.advantages = normalize_advantages(r, std_floor);
}

inline double token_ratio(double logprob_new, double logprob_old) { return std::exp(logprob_new - logprob_old); }

inline double clipped_token_objective(double r, double advantage, double epsilon) {
    const double c = std::clamp(r, 1.0 - epsilon, 1.0 + epsilon);
    return std::min(r * advantage, c * advantage);
}

inline double kl_token_penalty(double logprob_new, double logprob_ref) {
    const double d = logprob_ref - logprob_new;
    return std::exp(d) - d - 1.0;
}

struct GrpoLoss {
    double loss = 0.0;
    double surrogate = 0.0; // sum of clipped objectives (after any normalization)
    double kl = 0.0;        // sum of per-token penalties (after any normalization)
    double clip_fraction = 0.0;
    // d loss / d logprob_new, aligned with rollouts[i].tokens
    std::vector<std::vector<double>> weights;
};

// loss = -sum_i sum_t min(r A, clip(r) A) + beta * sum_i sum_t d_kl
// With length_normalize, each inner sum is divided by |o_i| and the outer by k.
inline GrpoLoss grpo_loss(const Group& g, const GrpoConfig& cfg) {
    if (g.advantages.size() != g.rollouts.size())
        throw Error(Errc::LengthMismatch, "advantages not aligned with rollouts");
    GrpoLoss out;
    out.weights.resize(g.rollouts.size());
    std::size_t n_tokens = 0, n_clipped = 0;
    const double k = static_cast<double>(g.rollouts.size());
    for (std::size_t i = 0; i < g.rollouts.size(); ++i) {
        const auto& s = g.rollouts[i];
        const std::size_t T = s.tokens.size();
        if (s.logprob_new.size() != T || s.logprob_old.size() != T || s.logprob_ref.size() != T)
            throw Error(Errc::LengthMismatch, "log-prob lists not aligned with tokens");
        const double scale = cfg.length_normalize ? (T ? 1.0 / (static_cast<double>(T) * k) : 0.0) : 1.0;
        const double A = g.advantages[i];
        auto& w = out.weights[i];
        w.assign(T, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
            const double r = token_ratio(s.logprob_new[t], s.logprob_old[t]);
            const double clipped = std::clamp(r, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon);
            const double obj = std::min(r * A, clipped * A);
            const bool flat = r * A > clipped * A;
            n_clipped += flat;
            ++n_tokens;
            const double d = s.logprob_ref[t] - s.logprob_new[t];
            const double kl = std::exp(d) - d - 1.0;
            out.surrogate += scale * obj;
            out.kl += scale * kl;
            w[t] = scale * ((flat ? 0.0 : -r * A) + cfg.beta * (1.0 - std::exp(d)));
        }
    }
    out.loss = -out.surrogate + cfg.beta * out.kl;
    out.clip_fraction = n_tokens ? static_cast<double>(n_clipped) / n_tokens : 0.0;
    return out;
}

} // namespace geocot
