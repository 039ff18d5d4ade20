#include <catch_amalgamated.hpp>

#include "cppo/rollout.hpp"
#include "cppo/running_norm.hpp"

using namespace cppo;

namespace {

// Independent brute-force oracle: A_t = sum_k (gamma*lam)^k * delta_{t+k},
// truncating the sum at episode boundaries.
void gae_oracle(const std::vector<double>& rewards, const std::vector<double>& values,
                const std::vector<std::uint8_t>& dones, double bootstrap, double gamma,
                double lam, std::vector<double>& adv) {
    const std::size_t T = rewards.size();
    adv.assign(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        double coeff = 1.0;
        for (std::size_t k = t; k < T; ++k) {
            const double next_v = (k + 1 < T) ? values[k + 1] : bootstrap;
            const double not_done = dones[k] ? 0.0 : 1.0;
            const double delta = rewards[k] + gamma * next_v * not_done - values[k];
            adv[t] += coeff * delta;
            if (dones[k]) break;
            coeff *= gamma * lam;
        }
    }
}

} // namespace

TEST_CASE("gae: terminal single step") {
    std::vector<double> adv, ret;
    compute_gae({1.0}, {0.0}, {1}, 0.0, 0.99, 0.95, adv, ret);
    CHECK(adv == std::vector<double>{1.0});
    CHECK(ret == std::vector<double>{1.0});
}

TEST_CASE("gae: two-step hand-computed case") {
    std::vector<double> adv, ret;
    compute_gae({0.0, 1.0}, {0.0, 0.0}, {0, 1}, 0.0, 0.99, 0.95, adv, ret);
    CHECK_THAT(adv[0], Catch::Matchers::WithinAbs(0.9405, 1e-12));
    CHECK_THAT(adv[1], Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("gae: TD-consistent values give zero advantages") {
    // choose V so that r + gamma*V' = V everywhere, no dones
    const double gamma = 0.9;
    std::vector<double> values{10.0, 0.0, 0.0, 0.0};
    std::vector<double> rewards(4);
    const double bootstrap = 5.0;
    for (std::size_t t = 0; t < 4; ++t) {
        values[t] = 1.0 + 0.5 * t;
        const double next = (t + 1 < 4) ? 1.0 + 0.5 * (t + 1) : bootstrap;
        rewards[t] = values[t] - gamma * next;
    }
    std::vector<double> adv, ret;
    compute_gae(rewards, values, {0, 0, 0, 0}, bootstrap, gamma, 0.95, adv, ret);
    for (double a : adv) CHECK_THAT(a, Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("gae: recursion equals the brute-force oracle (property)") {
    Rng rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t T = 1 + rng.uniform_int(64);
        std::vector<double> rewards(T), values(T);
        std::vector<std::uint8_t> dones(T);
        for (std::size_t t = 0; t < T; ++t) {
            rewards[t] = rng.normal();
            values[t] = rng.normal();
            dones[t] = rng.uniform() < 0.15 ? 1 : 0;
        }
        const double bootstrap = rng.normal();
        const double gamma = rng.uniform(0.8, 1.0);
        const double lam = rng.uniform(0.8, 1.0);
        std::vector<double> adv, ret, oracle;
        compute_gae(rewards, values, dones, bootstrap, gamma, lam, adv, ret);
        gae_oracle(rewards, values, dones, bootstrap, gamma, lam, oracle);
        for (std::size_t t = 0; t < T; ++t) {
            CHECK_THAT(adv[t], Catch::Matchers::WithinAbs(oracle[t], 1e-10));
            CHECK_THAT(ret[t], Catch::Matchers::WithinAbs(oracle[t] + values[t], 1e-10));
        }
    }
}

TEST_CASE("gae: lambda=1 without dones equals discounted return minus baseline") {
    Rng rng(7);
    const std::size_t T = 16;
    std::vector<double> rewards(T), values(T);
    std::vector<std::uint8_t> dones(T, 0);
    for (std::size_t t = 0; t < T; ++t) {
        rewards[t] = rng.normal();
        values[t] = rng.normal();
    }
    const double gamma = 0.97, bootstrap = rng.normal();
    std::vector<double> adv, ret;
    compute_gae(rewards, values, dones, bootstrap, gamma, 1.0, adv, ret);
    for (std::size_t t = 0; t < T; ++t) {
        double g = 0.0, c = 1.0;
        for (std::size_t k = t; k < T; ++k) {
            g += c * rewards[k];
            c *= gamma;
        }
        g += c * bootstrap;
        CHECK_THAT(adv[t], Catch::Matchers::WithinAbs(g - values[t], 1e-10));
    }
}

TEST_CASE("gae: advantage at a terminal step is exactly r - V") {
    std::vector<double> adv, ret;
    compute_gae({2.0, -1.0, 3.0}, {0.5, 0.25, 0.75}, {0, 1, 0}, 9.0, 0.99, 0.95, adv, ret);
    CHECK(adv[1] == -1.0 - 0.25);
}

TEST_CASE("gae: empty arrays are a hard error") {
    std::vector<double> adv, ret;
    CHECK_THROWS(compute_gae({}, {}, {}, 0.0, 0.99, 0.95, adv, ret));
}

TEST_CASE("advantage normalization") {
    SECTION("constant advantages go to zero") {
        std::vector<double> a{3.0, 3.0, 3.0};
        normalize_advantages(a);
        for (double v : a) CHECK_THAT(v, Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
    SECTION("already standardized stays put") {
        std::vector<double> a{1.0, -1.0};
        normalize_advantages(a);
        CHECK_THAT(a[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK_THAT(a[1], Catch::Matchers::WithinAbs(-1.0, 1e-12));
    }
    SECTION("[2,4,6]") {
        std::vector<double> a{2.0, 4.0, 6.0};
        normalize_advantages(a);
        CHECK_THAT(a[0], Catch::Matchers::WithinAbs(-1.2247448713915890, 1e-10));
        CHECK_THAT(a[1], Catch::Matchers::WithinAbs(0.0, 1e-10));
        CHECK_THAT(a[2], Catch::Matchers::WithinAbs(1.2247448713915890, 1e-10));
    }
    SECTION("result has mean ~0 and std ~1") {
        Rng rng(9);
        std::vector<double> a(257);
        for (double& v : a) v = 3.0 + 2.0 * rng.normal();
        normalize_advantages(a);
        double mean = 0.0;
        for (double v : a) mean += v / a.size();
        double var = 0.0;
        for (double v : a) var += (v - mean) * (v - mean) / a.size();
        CHECK(std::fabs(mean) < 1e-10);
        CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-8);
    }
}

TEST_CASE("minibatches") {
    Rng rng(1);
    SECTION("size = batch is a single chunk") {
        const auto mb = minibatches(8, 8, rng);
        REQUIRE(mb.size() == 1);
        CHECK(mb[0].size() == 8);
    }
    SECTION("disjoint cover") {
        const auto mb = minibatches(8, 4, rng);
        REQUIRE(mb.size() == 2);
        std::vector<bool> seen(8, false);
        for (const auto& chunk : mb)
            for (std::size_t i : chunk) {
                CHECK_FALSE(seen[i]);
                seen[i] = true;
            }
        for (bool s : seen) CHECK(s);
    }
    SECTION("deterministic per seed") {
        Rng a(5), b(5);
        CHECK(minibatches(32, 8, a) == minibatches(32, 8, b));
    }
    SECTION("size 0 is a hard error") {
        CHECK_THROWS(minibatches(8, 0, rng));
    }
}

TEST_CASE("running norm") {
    SECTION("first observation normalizes to zero") {
        RunningNorm n(3);
        n.update({1.0, -2.0, 5.0});
        for (double v : n.apply({1.0, -2.0, 5.0}))
            CHECK_THAT(v, Catch::Matchers::WithinAbs(0.0, 1e-6));
    }
    SECTION("constant stream goes to zero") {
        RunningNorm n(1);
        for (int i = 0; i < 100; ++i) n.update({7.0});
        CHECK_THAT(n.apply({7.0})[0], Catch::Matchers::WithinAbs(0.0, 1e-6));
    }
    SECTION("unit gaussian stream is estimated accurately") {
        RunningNorm n(1);
        Rng rng(11);
        for (int i = 0; i < 100000; ++i) n.update({rng.normal()});
        CHECK(std::fabs(n.mean[0]) < 0.02);
        CHECK(std::fabs(n.variance(0) - 1.0) < 0.05);
    }
    SECTION("output is clipped to [-10, 10]") {
        RunningNorm n(1);
        n.update({0.0});
        n.update({1.0});
        CHECK(n.apply({1e9})[0] == 10.0);
    }
}

TEST_CASE("experience frame round-trip") {
    ExperienceFrame f;
    f.policy_version = 42;
    f.obs_dim = 3;
    f.n_sub = 2;
    f.discrete = true;
    f.states = Matrix(2, 3);
    f.old_logps = Matrix(2, 2);
    Rng rng(13);
    for (double& v : f.states.data()) v = rng.normal();
    for (double& v : f.old_logps.data()) v = rng.normal();
    f.actions.resize(2);
    f.actions[0].indices = {1, 0};
    f.actions[1].indices = {4, 2};
    f.rewards = {0.5, -0.25};
    f.values = {1.5, 2.5};
    f.dones = {0, 1};
    f.bootstrap_value = 3.25;

    const auto bytes = serialize_frame(f);
    const ExperienceFrame g = deserialize_frame(bytes);
    CHECK(g.policy_version == 42);
    CHECK(g.states.data() == f.states.data());
    CHECK(g.old_logps.data() == f.old_logps.data());
    CHECK(g.actions[1].indices == f.actions[1].indices);
    CHECK(g.rewards == f.rewards);
    CHECK(g.values == f.values);
    CHECK(g.dones == f.dones);
    CHECK(g.bootstrap_value == 3.25);

    SECTION("corrupt length prefix is rejected") {
        auto bad = bytes;
        bad[0] ^= 0xff;
        CHECK_THROWS(deserialize_frame(bad));
    }
    SECTION("truncated frame is rejected") {
        auto bad = bytes;
        bad.resize(bad.size() - 4);
        CHECK_THROWS(deserialize_frame(bad));
    }
}
