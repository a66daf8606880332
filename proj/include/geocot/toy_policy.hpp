#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "geocot/error.hpp"
#include "geocot/grpo.hpp"
#include "geocot/rewards.hpp"
#include "geocot/rng.hpp"
#include "geocot/types.hpp"

namespace geocot::toy {

// First-order Markov categorical policy: logits[c][prev][next].
// Every sequence starts from prev = start_token.
class ToyPolicy {
public:
    ToyPolicy() = default;
    ToyPolicy(int vocab_size, int context_count, int start_token = 0)
        : V_(vocab_size), C_(context_count), start_(start_token),
          logits_(static_cast<std::size_t>(vocab_size) * vocab_size * context_count, 0.0) {
        if (vocab_size < 2 || context_count < 1) throw Error(Errc::InvalidConfig, "bad toy policy shape");
    }

    int vocab_size() const { return V_; }
    int context_count() const { return C_; }
    int start_token() const { return start_; }
    std::size_t param_count() const { return logits_.size(); }

    std::size_t index(int c, int prev, int next) const {
        return (static_cast<std::size_t>(c) * V_ + prev) * V_ + next;
    }
    double& logit(int c, int prev, int next) { return logits_[index(c, prev, next)]; }
    double logit(int c, int prev, int next) const { return logits_[index(c, prev, next)]; }
    std::vector<double>& params() { return logits_; }
    const std::vector<double>& params() const { return logits_; }

    bool in_vocab(int tok) const { return tok >= 0 && tok < V_; }

    std::vector<double> log_probs(int c, int prev) const {
        const double* z = &logits_[index(c, prev, 0)];
        const double m = *std::max_element(z, z + V_);
        double s = 0;
        for (int j = 0; j < V_; ++j) s += std::exp(z[j] - m);
        const double lse = m + std::log(s);
        std::vector<double> out(V_);
        for (int j = 0; j < V_; ++j) out[j] = z[j] - lse;
        return out;
    }

    std::vector<double> probs(int c, int prev) const {
        auto lp = log_probs(c, prev);
        for (double& v : lp) v = std::exp(v);
        return lp;
    }

    double log_prob(int c, int prev, int next) const { return log_probs(c, prev)[next]; }

private:
    int V_ = 0, C_ = 0, start_ = 0;
    std::vector<double> logits_;
};

// Token layout shared by the synthetic tasks.
struct Vocab {
    static constexpr int kBos = 0;
    static constexpr int kEnd = 1;
    static constexpr int kMalformed = 2;
    static constexpr int kSep = 3; // closes the think block
    static constexpr int kFirstValue = 4;

    int grid = 10;   // values 0..grid
    int fillers = 9; // reasoning words

    int value_token(int v) const { return kFirstValue + v; }
    int first_filler() const { return kFirstValue + grid + 1; }
    int filler_token(int i) const { return first_filler() + i; }
    int size() const { return first_filler() + fillers; }
    bool is_value(int t) const { return t >= kFirstValue && t < first_filler(); }
    bool is_filler(int t) const { return t >= first_filler() && t < size(); }
    int value_of(int t) const { return t - kFirstValue; }
};

inline constexpr std::array<const char*, 12> kFillerWords = {
    "scan", "apron", "runway", "edge", "shadow", "roof", "road", "verify", "region", "grid", "north", "south"};

enum class ToyTaskKind { GridGrounding, Counting };

struct SyntheticTask {
    ToyTaskKind kind = ToyTaskKind::GridGrounding;
    int context = 0;
    std::array<int, 4> cells{}; // grounding: x0, y0, x1, y1 in grid units
    int count = 0;              // counting

    TaskKind task_kind() const {
        return kind == ToyTaskKind::GridGrounding ? TaskKind::VisualGrounding : TaskKind::ObjectCounting;
    }

    GroundTruth ground_truth(const Vocab& v) const {
        if (kind == ToyTaskKind::Counting) return static_cast<std::uint64_t>(count);
        const double g = v.grid;
        return BBox{cells[0] / g, cells[1] / g, cells[2] / g, cells[3] / g};
    }

    // Answer tokens that decode to the ground truth.
    std::vector<int> answer_tokens(const Vocab& v) const {
        if (kind == ToyTaskKind::Counting) return {v.value_token(count)};
        return {v.value_token(cells[0]), v.value_token(cells[1]), v.value_token(cells[2]), v.value_token(cells[3])};
    }
};

// Total map from token sequences to candidate output text. A malformed (or
// start) token anywhere yields text with no tags at all.
inline std::string decode_output(const SyntheticTask& task, const Vocab& v, const std::vector<int>& tokens) {
    auto word = [&](int t) -> std::string {
        if (v.is_value(t)) {
            const int val = v.value_of(t);
            return task.kind == ToyTaskKind::GridGrounding ? std::to_string(val * 1000 / v.grid)
                                                           : std::to_string(val);
        }
        if (v.is_filler(t)) return kFillerWords[(t - v.first_filler()) % kFillerWords.size()];
        if (t == Vocab::kSep) return std::string(kThinkClose);
        return "<unk>";
    };

    const bool malformed = std::any_of(tokens.begin(), tokens.end(), [&](int t) {
        return t == Vocab::kMalformed || t == Vocab::kBos || t < 0 || t >= v.size();
    });
    if (malformed) {
        std::string s = "locate the target";
        for (int t : tokens)
            if (t != Vocab::kEnd) s += " " + (t == Vocab::kSep ? std::string("then") : word(t));
        return s;
    }

    std::string think = "locate the target";
    std::vector<std::string> answer;
    bool sep = false, ended = false;
    for (int t : tokens) {
        if (t == Vocab::kEnd) {
            ended = true;
            break;
        }
        if (!sep && t == Vocab::kSep) {
            sep = true;
            continue;
        }
        if (!sep)
            think += " " + word(t);
        else
            answer.push_back(word(t));
    }

    std::string ans;
    if (!answer.empty()) {
        if (task.kind == ToyTaskKind::GridGrounding) {
            ans = "[[";
            for (std::size_t i = 0; i < answer.size(); ++i) ans += (i ? "," : "") + answer[i];
            ans += "]]";
        } else {
            for (std::size_t i = 0; i < answer.size(); ++i) ans += (i ? " " : "") + answer[i];
        }
    }
    std::string out = "<think>" + think;
    if (sep) out += "</think>";
    out += "<answer>" + ans;
    if (ended) out += "</answer>";
    return out;
}

struct Sample {
    std::vector<int> tokens;
    std::vector<double> logprobs;
};

inline Sample sample_sequence(const ToyPolicy& p, int context, Rng& rng, int max_len, int end_token) {
    Sample s;
    int prev = p.start_token();
    for (int t = 0; t < max_len; ++t) {
        const auto lp = p.log_probs(context, prev);
        const double u = rng.uniform();
        double acc = 0;
        int pick = p.vocab_size() - 1;
        for (int j = 0; j < p.vocab_size(); ++j) {
            acc += std::exp(lp[j]);
            if (u < acc) {
                pick = j;
                break;
            }
        }
        s.tokens.push_back(pick);
        s.logprobs.push_back(lp[pick]);
        prev = pick;
        if (pick == end_token) break;
    }
    return s;
}

inline std::vector<double> sequence_logprobs(const ToyPolicy& p, int context, const std::vector<int>& tokens) {
    std::vector<double> out;
    out.reserve(tokens.size());
    int prev = p.start_token();
    for (int t : tokens) {
        if (!p.in_vocab(t)) throw Error(Errc::TokenOutOfVocabulary, "token " + std::to_string(t));
        out.push_back(p.log_prob(context, prev, t));
        prev = t;
    }
    return out;
}

struct SamplingSpec {
    int k = 8;
    int max_len = 16;
    RewardConfig reward;
};

// k rollouts drawn from `old` (the sampling snapshot), scored under all three
// policies, rewarded through the production reward path.
inline Group sample_group(const ToyPolicy& policy, const ToyPolicy& old, const ToyPolicy& ref,
                          const SyntheticTask& task, const Vocab& vocab, const SamplingSpec& spec, Rng& rng) {
    if (spec.k < 2) throw Error(Errc::GroupTooSmall, "k must be >= 2");
    Group g;
    const GroundTruth gt = task.ground_truth(vocab);
    for (int i = 0; i < spec.k; ++i) {
        Sample s = sample_sequence(old, task.context, rng, spec.max_len, Vocab::kEnd);
        RolloutSequence r;
        r.tokens = s.tokens;
        r.logprob_old = s.logprobs;
        r.logprob_new = sequence_logprobs(policy, task.context, s.tokens);
        r.logprob_ref = sequence_logprobs(ref, task.context, s.tokens);
        r.reward = reward(decode_output(task, vocab, s.tokens), task.task_kind(), gt, spec.reward).value;
        g.rollouts.push_back(std::move(r));
    }
    return g;
}

inline Group sample_group(const ToyPolicy& policy, const ToyPolicy& old, const ToyPolicy& ref,
                          const SyntheticTask& task, const Vocab& vocab, const SamplingSpec& spec,
                          std::uint64_t seed) {
    Rng rng(seed);
    return sample_group(policy, old, ref, task, vocab, spec, rng);
}

// d loss / d logits, given per-token weights w = d loss / d logprob_new:
// d logprob(a | prev) / d z[prev][j] = [j == a] - pi(j | prev).
inline void accumulate_policy_gradient(const ToyPolicy& p, int context, const Group& g,
                                       const std::vector<std::vector<double>>& weights, std::vector<double>& grad) {
    if (grad.size() != p.param_count()) grad.assign(p.param_count(), 0.0);
    const int V = p.vocab_size();
    for (std::size_t i = 0; i < g.rollouts.size(); ++i) {
        const auto& toks = g.rollouts[i].tokens;
        int prev = p.start_token();
        for (std::size_t t = 0; t < toks.size(); ++t) {
            const double w = weights[i][t];
            if (w != 0.0) {
                const auto pr = p.probs(context, prev);
                const std::size_t base = p.index(context, prev, 0);
                for (int j = 0; j < V; ++j) grad[base + j] -= w * pr[j];
                grad[base + toks[t]] += w;
            }
            prev = toks[t];
        }
    }
}

struct ContextGroup {
    int context = 0;
    Group group;
    std::vector<std::vector<double>> weights;
};

// One gradient-descent step on the GRPO loss.
inline void apply_grpo_update(ToyPolicy& p, const std::vector<ContextGroup>& groups, double learning_rate) {
    std::vector<double> grad(p.param_count(), 0.0);
    for (const auto& cg : groups) accumulate_policy_gradient(p, cg.context, cg.group, cg.weights, grad);
    auto& z = p.params();
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= learning_rate * grad[i];
}

// Exact KL(pi || ref) over sequences of at most max_len tokens that stop at
// end_token, by propagating the distribution over the previous token.
inline double exact_sequence_kl(const ToyPolicy& pi, const ToyPolicy& ref, int context, int max_len, int end_token) {
    const int V = pi.vocab_size();
    std::vector<double> d(V, 0.0), next(V, 0.0);
    d[pi.start_token()] = 1.0;
    double kl = 0.0;
    for (int t = 0; t < max_len; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        double alive = 0.0;
        for (int p = 0; p < V; ++p) {
            if (d[p] == 0.0) continue;
            const auto lp = pi.log_probs(context, p);
            const auto lr = ref.log_probs(context, p);
            double row = 0.0;
            for (int j = 0; j < V; ++j) {
                const double pj = std::exp(lp[j]);
                if (pj > 0) row += pj * (lp[j] - lr[j]);
                if (j != end_token) next[j] += d[p] * pj;
            }
            kl += d[p] * row;
        }
        std::swap(d, next);
        for (double v : d) alive += v;
        if (alive < 1e-300) break;
    }
    return kl;
}

inline double mean_exact_kl(const ToyPolicy& pi, const ToyPolicy& ref, int max_len, int end_token) {
    double s = 0;
    for (int c = 0; c < pi.context_count(); ++c) s += exact_sequence_kl(pi, ref, c, max_len, end_token);
    return s / pi.context_count();
}

} // namespace geocot::toy
