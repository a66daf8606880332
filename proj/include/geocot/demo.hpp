#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geocot/grpo.hpp"
#include "geocot/rewards.hpp"
#include "geocot/rng.hpp"
#include "geocot/sft.hpp"
#include "geocot/toy_policy.hpp"

namespace geocot::toy {

// Desk-scale grid-grounding environment and its training schedules.
struct DemoConfig {
    int grid = 10;
    int fillers = 9;
    int contexts = 4;
    int max_len = 16;
    int steps = 500;
    double learning_rate = 0.3;
    int inner_updates = 2; // gradient steps per sampled batch
    int eval_samples = 256; // per context, for baseline/final estimates
    double target_reward = 0.8;
    // reference policy = SFT on noisy demonstrations
    int think_min = 1;
    int think_max = 4;
    double demo_label_noise = 0.05;
    int demo_corpus = 512;
    int ref_sft_steps = 4000;
    int ref_sft_batch = 32;
    double ref_sft_learning_rate = 2.0; // mean-per-token reduction

    void validate() const {
        if (grid < 4) throw Error(Errc::InvalidConfig, "demo.grid must be >= 4");
        if (fillers < 1) throw Error(Errc::InvalidConfig, "demo.fillers must be >= 1");
        if (contexts < 1) throw Error(Errc::InvalidConfig, "demo.contexts must be >= 1");
        if (think_min < 0 || think_max < think_min) throw Error(Errc::InvalidConfig, "bad demo think range");
        if (max_len < think_max + 6) throw Error(Errc::InvalidConfig, "demo.max_len too short for a full answer");
        if (steps < 0 || inner_updates < 1 || eval_samples < 1) throw Error(Errc::InvalidConfig, "bad demo schedule");
        if (!(learning_rate > 0) || !(ref_sft_learning_rate > 0)) throw Error(Errc::InvalidConfig, "bad learning rate");
        if (demo_label_noise < 0 || demo_label_noise > 1) throw Error(Errc::InvalidConfig, "bad demo_label_noise");
        if (demo_corpus < 1 || ref_sft_batch < 1 || ref_sft_steps < 0) throw Error(Errc::InvalidConfig, "bad SFT sizes");
    }
};

struct Environment {
    Vocab vocab;
    std::vector<SyntheticTask> tasks; // one per context
};

// Grounding targets with four distinct grid values each, so the answer is
// representable by a first-order chain.
inline Environment make_environment(const DemoConfig& cfg, std::uint64_t seed) {
    Environment env;
    env.vocab.grid = cfg.grid;
    env.vocab.fillers = cfg.fillers;
    Rng rng(seed, 0x7a5c);
    for (int c = 0; c < cfg.contexts; ++c) {
        SyntheticTask t;
        t.kind = ToyTaskKind::GridGrounding;
        t.context = c;
        while (true) {
            int x0 = rng.uniform_int(0, cfg.grid - 1), x1 = rng.uniform_int(0, cfg.grid);
            int y0 = rng.uniform_int(0, cfg.grid - 1), y1 = rng.uniform_int(0, cfg.grid);
            if (x1 <= x0 || y1 <= y0) continue;
            if (std::set<int>{x0, y0, x1, y1}.size() != 4) continue;
            t.cells = {x0, y0, x1, y1};
            break;
        }
        env.tasks.push_back(t);
    }
    return env;
}

inline std::vector<int> canonical_tokens(const Environment& env, const SyntheticTask& t, int think_len) {
    std::vector<int> s(static_cast<std::size_t>(think_len), env.vocab.filler_token(0));
    s.push_back(Vocab::kSep);
    for (int a : t.answer_tokens(env.vocab)) s.push_back(a);
    s.push_back(Vocab::kEnd);
    return s;
}

// Annotated rationales: random reasoning words, then the (occasionally
// mislabelled) answer.
inline std::vector<SftExample> make_demonstrations(const Environment& env, const DemoConfig& cfg, Rng& rng) {
    std::vector<SftExample> out;
    for (int i = 0; i < cfg.demo_corpus; ++i) {
        const auto& t = env.tasks[static_cast<std::size_t>(i) % env.tasks.size()];
        SftExample ex;
        ex.context = t.context;
        const int len = rng.uniform_int(cfg.think_min, cfg.think_max);
        for (int k = 0; k < len; ++k) ex.tokens.push_back(env.vocab.filler_token(rng.uniform_int(0, cfg.fillers - 1)));
        ex.tokens.push_back(Vocab::kSep);
        for (int a : t.answer_tokens(env.vocab)) {
            if (rng.uniform() < cfg.demo_label_noise) a = env.vocab.value_token(rng.uniform_int(0, cfg.grid));
            ex.tokens.push_back(a);
        }
        ex.tokens.push_back(Vocab::kEnd);
        out.push_back(std::move(ex));
    }
    return out;
}

inline ToyPolicy uniform_policy(const Environment& env, int contexts) {
    return ToyPolicy(env.vocab.size(), contexts, Vocab::kBos);
}

// Stage-one stand-in: minibatch SFT from a uniform policy on the demonstrations.
inline ToyPolicy train_reference(const Environment& env, const DemoConfig& cfg, std::uint64_t seed) {
    Rng rng(seed, 0x5f7);
    const auto demos = make_demonstrations(env, cfg, rng);
    ToyPolicy p = uniform_policy(env, cfg.contexts);
    std::vector<SftExample> batch;
    for (int s = 0; s < cfg.ref_sft_steps; ++s) {
        batch.clear();
        for (int b = 0; b < cfg.ref_sft_batch; ++b) batch.push_back(demos[rng.below(demos.size())]);
        sft_step(p, batch, cfg.ref_sft_learning_rate, LossReduction::MeanPerToken);
    }
    return p;
}

inline double evaluate_policy(const ToyPolicy& p, const Environment& env, const DemoConfig& cfg,
                              const RewardConfig& rcfg, Rng& rng) {
    double s = 0;
    std::size_t n = 0;
    for (const auto& t : env.tasks) {
        const GroundTruth gt = t.ground_truth(env.vocab);
        for (int i = 0; i < cfg.eval_samples; ++i) {
            const auto smp = sample_sequence(p, t.context, rng, cfg.max_len, Vocab::kEnd);
            s += reward(decode_output(t, env.vocab, smp.tokens), t.task_kind(), gt, rcfg).value;
            ++n;
        }
    }
    return s / static_cast<double>(n);
}

struct StepLog {
    int step = 0;
    double mean_reward = 0;
    double kl = 0;
    double loss = 0;
};

struct GrpoDemoResult {
    double random_baseline = 0; // uniform policy
    double reference_reward = 0;
    double initial_kl = 0;
    std::vector<StepLog> log;
    double final_reward = 0; // fresh-sample estimate for the final policy
    double final_kl = 0;     // exact
    std::optional<int> first_step_at_target;
    double seconds = 0;
};

inline GrpoDemoResult run_grpo_demo(const DemoConfig& cfg, const GrpoConfig& gcfg, const RewardConfig& rcfg,
                                    std::uint64_t seed, const std::function<void(const StepLog&)>& on_step = {}) {
    cfg.validate();
    gcfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const Environment env = make_environment(cfg, seed);
    const ToyPolicy ref = train_reference(env, cfg, seed);
    ToyPolicy policy = ref;

    GrpoDemoResult res;
    {
        Rng eval(seed, 0xe1);
        res.random_baseline = evaluate_policy(uniform_policy(env, cfg.contexts), env, cfg, rcfg, eval);
        res.reference_reward = evaluate_policy(ref, env, cfg, rcfg, eval);
    }
    res.initial_kl = mean_exact_kl(policy, ref, cfg.max_len, Vocab::kEnd);

    SamplingSpec spec{gcfg.k, cfg.max_len, rcfg};
    Rng rng(seed, 0x9a0);
    for (int step = 1; step <= cfg.steps; ++step) {
        const ToyPolicy old = policy;
        std::vector<ContextGroup> groups;
        double reward_sum = 0;
        std::size_t n = 0;
        for (const auto& t : env.tasks) {
            ContextGroup cg;
            cg.context = t.context;
            cg.group = sample_group(policy, old, ref, t, env.vocab, spec, rng);
            compute_advantages(cg.group, gcfg.std_floor);
            for (const auto& r : cg.group.rollouts) reward_sum += r.reward, ++n;
            groups.push_back(std::move(cg));
        }
        double loss = 0;
        for (int u = 0; u < cfg.inner_updates; ++u) {
            double l = 0;
            for (auto& cg : groups) {
                if (u > 0)
                    for (auto& r : cg.group.rollouts) r.logprob_new = sequence_logprobs(policy, cg.context, r.tokens);
                auto gl = grpo_loss(cg.group, gcfg);
                l += gl.loss;
                cg.weights = std::move(gl.weights);
            }
            if (u == 0) loss = l;
            apply_grpo_update(policy, groups, cfg.learning_rate);
        }
        StepLog row{step, reward_sum / static_cast<double>(n), mean_exact_kl(policy, ref, cfg.max_len, Vocab::kEnd),
                    loss};
        if (!res.first_step_at_target && row.mean_reward >= cfg.target_reward) res.first_step_at_target = step;
        res.log.push_back(row);
        if (on_step) on_step(row);
    }
    Rng eval(seed, 0xe2);
    res.final_reward = evaluate_policy(policy, env, cfg, rcfg, eval);
    res.final_kl = mean_exact_kl(policy, ref, cfg.max_len, Vocab::kEnd);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

struct SftDemoConfig {
    int epochs = 3;
    int batch_size = 32;
    double learning_rate = 1e-5;
    LossReduction reduction = LossReduction::Sum;
};

struct SftCurvePoint {
    int epoch = 0;
    int step = 0;
    double loss = 0; // full-corpus loss after the step
};

// Plain minibatch SFT over the demonstration corpus of the toy environment.
inline std::vector<SftCurvePoint> run_sft_demo(const DemoConfig& cfg, const SftDemoConfig& scfg, std::uint64_t seed) {
    cfg.validate();
    if (scfg.epochs < 0 || scfg.batch_size < 1 || !(scfg.learning_rate > 0))
        throw Error(Errc::InvalidConfig, "bad SFT demo settings");
    const Environment env = make_environment(cfg, seed);
    Rng rng(seed, 0x5f7);
    auto demos = make_demonstrations(env, cfg, rng);
    ToyPolicy p = uniform_policy(env, cfg.contexts);
    std::vector<SftCurvePoint> curve{{0, 0, sft_batch_loss(p, demos, scfg.reduction)}};
    std::vector<std::size_t> order(demos.size());
    int step = 0;
    for (int e = 1; e <= scfg.epochs; ++e) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(scfg.batch_size)) {
            std::vector<SftExample> batch;
            for (std::size_t j = b; j < std::min(order.size(), b + scfg.batch_size); ++j)
                batch.push_back(demos[order[j]]);
            sft_step(p, batch, scfg.learning_rate, scfg.reduction);
            curve.push_back({e, ++step, sft_batch_loss(p, demos, scfg.reduction)});
        }
    }
    return curve;
}

} // namespace geocot::toy
