#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "cppo/checkpoint.hpp"
#include "cppo/config.hpp"
#include "cppo/rng.hpp"

using namespace cppo;

namespace {

std::string temp_path(const char* stem) {
    return (std::filesystem::temp_directory_path() / stem).string();
}

ParamVector sample_params(std::uint64_t seed) {
    ParamVector pv;
    pv.add_segment("policy.w1", {3, 4});
    pv.add_segment("policy.b1", {4});
    pv.add_segment("policy.log_std", {2});
    Rng rng(seed);
    for (double& v : pv.values()) v = rng.normal() * std::pow(10.0, rng.uniform(-8.0, 8.0));
    return pv;
}

} // namespace

TEST_CASE("checkpoint: decimal-exact round trip") {
    const std::string path = temp_path("cppo_ck_roundtrip.txt");
    ParamVector pv = sample_params(1);
    // awkward values that expose lossy formatting
    pv.values()[0] = 0.1;
    pv.values()[1] = 1.0 / 3.0;
    pv.values()[2] = -1e-300;
    pv.values()[3] = 12345678901234567.0;
    save_checkpoint(path, pv, {{"env", "gridharvest"}, {"obs_dim", "148"}});
    const Checkpoint ck = load_checkpoint(path);
    CHECK(ck.params.values() == pv.values());
    CHECK(ck.params.same_layout(pv));
    CHECK(ck.meta.at("env") == "gridharvest");
    CHECK(ck.meta.at("obs_dim") == "148");
    std::remove(path.c_str());
}

TEST_CASE("checkpoint: segment layout survives the round trip") {
    const std::string path = temp_path("cppo_ck_layout.txt");
    ParamVector pv = sample_params(2);
    save_checkpoint(path, pv);
    const Checkpoint ck = load_checkpoint(path);
    REQUIRE(ck.params.segments().size() == 3);
    CHECK(ck.params.segments()[0].name == "policy.w1");
    CHECK(ck.params.segments()[0].shape == std::vector<std::size_t>{3, 4});
    CHECK(ck.params.segment_offset("policy.log_std") == pv.segment_offset("policy.log_std"));
    std::remove(path.c_str());
}

TEST_CASE("checkpoint: malformed files are rejected") {
    const std::string path = temp_path("cppo_ck_bad.txt");
    SECTION("missing file") { CHECK_THROWS(load_checkpoint(temp_path("cppo_nonexistent"))); }
    SECTION("bad header") {
        std::ofstream(path) << "other-format 1\nend\n";
        CHECK_THROWS(load_checkpoint(path));
    }
    SECTION("wrong version") {
        std::ofstream(path) << "compound-ppo-checkpoint 99\nend\n";
        CHECK_THROWS(load_checkpoint(path));
    }
    SECTION("truncated values") {
        ParamVector pv = sample_params(3);
        save_checkpoint(path, pv);
        std::ifstream in(path);
        std::string text((std::istreambuf_iterator<char>(in)), {});
        in.close();
        std::ofstream(path) << text.substr(0, text.size() / 2);
        CHECK_THROWS(load_checkpoint(path));
    }
    std::remove(path.c_str());
}

TEST_CASE("config: snapshot round trip preserves every field") {
    TrainConfig c;
    c.env = "chainreach";
    c.env_params = {{"k", 4.0}, {"max_steps", 150.0}};
    c.loss = "mix-ratio";
    c.w = 0.375;
    c.sub_agg_sum = true;
    c.gamma = 0.987654321;
    c.lam = 0.9;
    c.clip_eps = 0.1;
    c.c1 = 0.25;
    c.c2 = 0.0075;
    c.lr = 3e-4;
    c.rollout_len = 64;
    c.num_envs = 3;
    c.minibatch = 48;
    c.epochs = 2;
    c.total_steps = 12345;
    c.seed = 987654321;
    c.mode = "async";
    c.samplers = 2;
    c.trainers = 2;
    c.queue_capacity = 7;
    c.adv_norm = false;
    c.grad_clip = false;
    c.max_grad_norm = 1.5;
    c.value_clip = true;
    c.value_clip_eps = 0.3;
    c.obs_norm = false;
    c.reward_scale = false;
    c.checkpoint_interval = 10;
    c.out_dir = "/tmp/run";

    const TrainConfig r = config_from_text(config_to_text(c));
    CHECK(r.env == c.env);
    CHECK(r.env_params == c.env_params);
    CHECK(r.loss == c.loss);
    CHECK(r.w == c.w);
    CHECK(r.sub_agg_sum == c.sub_agg_sum);
    CHECK(r.gamma == c.gamma);
    CHECK(r.lam == c.lam);
    CHECK(r.clip_eps == c.clip_eps);
    CHECK(r.c1 == c.c1);
    CHECK(r.c2 == c.c2);
    CHECK(r.lr == c.lr);
    CHECK(r.rollout_len == c.rollout_len);
    CHECK(r.num_envs == c.num_envs);
    CHECK(r.minibatch == c.minibatch);
    CHECK(r.epochs == c.epochs);
    CHECK(r.total_steps == c.total_steps);
    CHECK(r.seed == c.seed);
    CHECK(r.mode == c.mode);
    CHECK(r.samplers == c.samplers);
    CHECK(r.trainers == c.trainers);
    CHECK(r.queue_capacity == c.queue_capacity);
    CHECK(r.adv_norm == c.adv_norm);
    CHECK(r.grad_clip == c.grad_clip);
    CHECK(r.max_grad_norm == c.max_grad_norm);
    CHECK(r.value_clip == c.value_clip);
    CHECK(r.value_clip_eps == c.value_clip_eps);
    CHECK(r.obs_norm == c.obs_norm);
    CHECK(r.reward_scale == c.reward_scale);
    CHECK(r.checkpoint_interval == c.checkpoint_interval);
    CHECK(r.out_dir == c.out_dir);
    // idempotent serialization
    CHECK(config_to_text(r) == config_to_text(c));
}

TEST_CASE("config: unknown keys and bad values are hard errors") {
    CHECK_THROWS(config_from_text("bogus_key = 1\n"));
    CHECK_THROWS(config_from_text("no equals sign here\n"));
    CHECK_THROWS(config_from_text("adv_norm = maybe\n"));
}

TEST_CASE("config: comments and blank lines are ignored") {
    const TrainConfig c = config_from_text("# a comment\n\nseed = 42\n");
    CHECK(c.seed == 42);
}

TEST_CASE("config: validation") {
    TrainConfig c;
    c.validate();
    SECTION("bad loss") {
        c.loss = "nope";
        CHECK_THROWS(c.validate());
    }
    SECTION("bad mode") {
        c.mode = "parallel";
        CHECK_THROWS(c.validate());
    }
    SECTION("gamma out of range") {
        c.gamma = 1.5;
        CHECK_THROWS(c.validate());
    }
    SECTION("zero minibatch") {
        c.minibatch = 0;
        CHECK_THROWS(c.validate());
    }
    SECTION("async without workers") {
        c.mode = "async";
        c.samplers = 0;
        CHECK_THROWS(c.validate());
    }
}

TEST_CASE("config: clip_eps <= 0 disables clipping") {
    TrainConfig c;
    c.clip_eps = 0.0;
    CHECK(std::isinf(c.effective_clip_eps()));
    c.clip_eps = -1.0;
    CHECK(std::isinf(c.effective_clip_eps()));
    c.clip_eps = 0.2;
    CHECK(c.effective_clip_eps() == 0.2);
}

TEST_CASE("presets") {
    SECTION("mujoco-analogue") {
        TrainConfig c;
        apply_preset(c, "mujoco-analogue");
        CHECK(c.env == "chainreach");
        CHECK(c.mode == "serial");
        CHECK(c.c2 == 0.001);
        CHECK(c.c1 == 1.0);
        CHECK(c.value_clip);
        CHECK(c.adv_norm);
        c.validate();
    }
    SECTION("urts-analogue") {
        TrainConfig c;
        apply_preset(c, "urts-analogue");
        CHECK(c.env == "gridharvest");
        CHECK(c.mode == "async");
        CHECK(c.c2 == 0.01);
        CHECK(c.c1 == 0.5);
        CHECK(c.rollout_len == 512);
        CHECK(c.epochs == 1);
        CHECK(c.samplers == 4);
        CHECK(c.trainers == 3);
        CHECK_FALSE(c.adv_norm);
        CHECK_FALSE(c.obs_norm);
        c.validate();
    }
    SECTION("unknown preset") {
        TrainConfig c;
        CHECK_THROWS(apply_preset(c, "atari"));
    }
}

TEST_CASE("loss variant parsing") {
    CHECK(LossVariant::parse("compound").tag == LossVariant::Tag::Compound);
    CHECK(LossVariant::parse("sub-action").tag == LossVariant::Tag::SubAction);
    CHECK(LossVariant::parse("mix-ratio").tag == LossVariant::Tag::MixRatio);
    CHECK(LossVariant::parse("mix-loss").tag == LossVariant::Tag::MixLoss);
    CHECK(LossVariant::parse("mix-loss", 0.25).w == 0.25);
    CHECK_THROWS(LossVariant::parse("joint"));
    CHECK_THROWS(LossVariant::parse("mix-ratio", -0.1));
    CHECK_THROWS(LossVariant::parse("mix-ratio", 1.1));
    for (const char* name : {"compound", "sub-action", "mix-ratio", "mix-loss"})
        CHECK(LossVariant::parse(name).name() == name);
}
