#pragma once

#include <cstdint>
#include <cstdlib>
#include <set>
#include <string>

#include "json.hpp"

#include "geocot/annotation.hpp"
#include "geocot/demo.hpp"
#include "geocot/error.hpp"
#include "geocot/grpo.hpp"
#include "geocot/rewards.hpp"
#include "geocot/util.hpp"

namespace geocot {

struct TilingConfig {
    int tile = 800;
    double min_retained = 0.3;

    void validate() const {
        if (tile < 1) throw Error(Errc::InvalidConfig, "tiling.tile must be >= 1");
        if (!(min_retained >= 0 && min_retained <= 1))
            throw Error(Errc::InvalidConfig, "tiling.min_retained must lie in [0,1]");
    }
};

struct EngineConfig {
    std::uint64_t seed = 0;
    RewardConfig reward;
    GrpoConfig grpo;
    toy::SftDemoConfig sft;
    toy::DemoConfig demo;
    annotate::AnnotatorConfig annotator;
    TilingConfig tiling;

    void validate() const {
        reward.validate();
        grpo.validate();
        demo.validate();
        annotator.validate();
        tiling.validate();
        if (sft.epochs < 0 || sft.batch_size < 1 || !(sft.learning_rate > 0))
            throw Error(Errc::InvalidConfig, "bad sft section");
    }
};

namespace detail {

using json = nlohmann::json;

// Reads known keys from one object and rejects the rest.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw Error(Errc::InvalidConfig, where() + " must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        known_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw Error(Errc::InvalidConfig, "wrong type for " + where() + key);
        }
    }

    const json* sub(const char* key) {
        known_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!known_.count(k)) throw Error(Errc::InvalidConfig, "unknown key " + where() + k);
    }

    std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string where() const { return path_.empty() ? "" : path_ + "."; }

    const json& j_;
    std::string path_;
    std::set<std::string> known_;
};

} // namespace detail

inline EngineConfig config_from_json(const nlohmann::json& j) {
    EngineConfig c;
    detail::Section top(j, "");
    top.get("seed", c.seed);
    if (const auto* r = top.sub("reward")) {
        detail::Section s(*r, "reward");
        s.get("alpha", c.reward.alpha);
        if (const auto* w = s.sub("caption_weights")) {
            if (!w->is_object()) throw Error(Errc::InvalidConfig, "reward.caption_weights must be an object");
            c.reward.caption_weights.clear();
            for (const auto& [k, v] : w->items()) {
                if (!v.is_number()) throw Error(Errc::InvalidConfig, "caption weight '" + k + "' is not a number");
                c.reward.caption_weights[k] = v.get<double>();
            }
        }
        s.get("partial_credit", c.reward.partial_credit);
        s.get("partial_rule_threshold", c.reward.partial_rule_threshold);
        s.get("cider_normalizer", c.reward.cider_normalizer);
        s.get("format_gate", c.reward.format_gate);
        s.finish();
    }
    if (const auto* g = top.sub("grpo")) {
        detail::Section s(*g, "grpo");
        s.get("k", c.grpo.k);
        s.get("epsilon", c.grpo.epsilon);
        s.get("beta", c.grpo.beta);
        s.get("std_floor", c.grpo.std_floor);
        s.get("length_normalize", c.grpo.length_normalize);
        s.finish();
    }
    if (const auto* f = top.sub("sft")) {
        detail::Section s(*f, "sft");
        s.get("epochs", c.sft.epochs);
        s.get("batch_size", c.sft.batch_size);
        s.get("learning_rate", c.sft.learning_rate);
        std::string red = reduction_name(c.sft.reduction);
        s.get("loss_reduction", red);
        if (red == "sum") c.sft.reduction = LossReduction::Sum;
        else if (red == "mean_per_token") c.sft.reduction = LossReduction::MeanPerToken;
        else throw Error(Errc::InvalidConfig, "sft.loss_reduction must be sum or mean_per_token");
        s.finish();
    }
    if (const auto* d = top.sub("demo")) {
        detail::Section s(*d, "demo");
        auto& m = c.demo;
        s.get("grid", m.grid);
        s.get("fillers", m.fillers);
        s.get("contexts", m.contexts);
        s.get("max_len", m.max_len);
        s.get("steps", m.steps);
        s.get("learning_rate", m.learning_rate);
        s.get("inner_updates", m.inner_updates);
        s.get("eval_samples", m.eval_samples);
        s.get("target_reward", m.target_reward);
        s.get("think_min", m.think_min);
        s.get("think_max", m.think_max);
        s.get("demo_label_noise", m.demo_label_noise);
        s.get("demo_corpus", m.demo_corpus);
        s.get("ref_sft_steps", m.ref_sft_steps);
        s.get("ref_sft_batch", m.ref_sft_batch);
        s.get("ref_sft_learning_rate", m.ref_sft_learning_rate);
        s.finish();
    }
    if (const auto* a = top.sub("annotator")) {
        detail::Section s(*a, "annotator");
        auto& m = c.annotator;
        s.get("url", m.url);
        s.get("token_env", m.token_env);
        s.get("timeout_s", m.timeout_s);
        s.get("max_retries", m.max_retries);
        s.get("initial_backoff_ms", m.initial_backoff_ms);
        s.get("backoff_factor", m.backoff_factor);
        s.get("jitter", m.jitter);
        s.get("max_in_flight", m.max_in_flight);
        s.get("on_invalid", m.on_invalid);
        s.get("max_regenerations", m.max_regenerations);
        s.finish();
    }
    if (const auto* t = top.sub("tiling")) {
        detail::Section s(*t, "tiling");
        s.get("tile", c.tiling.tile);
        s.get("min_retained", c.tiling.min_retained);
        s.finish();
    }
    top.finish();
    c.validate();
    return c;
}

inline nlohmann::json config_to_json(const EngineConfig& c) {
    const auto& d = c.demo;
    const auto& a = c.annotator;
    return {{"seed", c.seed},
            {"reward",
             {{"alpha", c.reward.alpha},
              {"caption_weights", c.reward.caption_weights},
              {"partial_credit", c.reward.partial_credit},
              {"partial_rule_threshold", c.reward.partial_rule_threshold},
              {"cider_normalizer", c.reward.cider_normalizer},
              {"format_gate", c.reward.format_gate}}},
            {"grpo",
             {{"k", c.grpo.k},
              {"epsilon", c.grpo.epsilon},
              {"beta", c.grpo.beta},
              {"std_floor", c.grpo.std_floor},
              {"length_normalize", c.grpo.length_normalize}}},
            {"sft",
             {{"epochs", c.sft.epochs},
              {"batch_size", c.sft.batch_size},
              {"learning_rate", c.sft.learning_rate},
              {"loss_reduction", reduction_name(c.sft.reduction)}}},
            {"demo",
             {{"grid", d.grid},
              {"fillers", d.fillers},
              {"contexts", d.contexts},
              {"max_len", d.max_len},
              {"steps", d.steps},
              {"learning_rate", d.learning_rate},
              {"inner_updates", d.inner_updates},
              {"eval_samples", d.eval_samples},
              {"target_reward", d.target_reward},
              {"think_min", d.think_min},
              {"think_max", d.think_max},
              {"demo_label_noise", d.demo_label_noise},
              {"demo_corpus", d.demo_corpus},
              {"ref_sft_steps", d.ref_sft_steps},
              {"ref_sft_batch", d.ref_sft_batch},
              {"ref_sft_learning_rate", d.ref_sft_learning_rate}}},
            {"annotator",
             {{"url", a.url},
              {"token_env", a.token_env},
              {"timeout_s", a.timeout_s},
              {"max_retries", a.max_retries},
              {"initial_backoff_ms", a.initial_backoff_ms},
              {"backoff_factor", a.backoff_factor},
              {"jitter", a.jitter},
              {"max_in_flight", a.max_in_flight},
              {"on_invalid", a.on_invalid},
              {"max_regenerations", a.max_regenerations}}},
            {"tiling", {{"tile", c.tiling.tile}, {"min_retained", c.tiling.min_retained}}}};
}

inline EngineConfig load_config(const std::string& path) {
    const std::string text = util::read_file(path);
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::InvalidConfig, path + " is not valid JSON");
    return config_from_json(j);
}

// The bearer token is the only value taken from the environment.
inline std::string annotator_token(const annotate::AnnotatorConfig& a) {
    if (a.token_env.empty()) return "";
    const char* v = std::getenv(a.token_env.c_str());
    return v ? v : "";
}

} // namespace geocot
