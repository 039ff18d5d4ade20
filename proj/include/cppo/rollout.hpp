#pragma once

#include <cstdint>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cppo/distributions.hpp"
#include "cppo/matrix.hpp"
#include "cppo/rng.hpp"

namespace cppo {

struct Transition {
    std::vector<double> state;
    CompoundAction action;
    std::vector<double> old_logps;
    double reward = 0.0;
    double value = 0.0;
    bool done = false;
};

// Contiguous rollout storage. Transitions from one environment are stored as
// one segment; advantages/returns are filled per segment before minibatching.
struct RolloutBatch {
    Matrix states;      // [T x obs_dim]
    Matrix old_logps;   // [T x n_sub]
    std::vector<CompoundAction> actions;
    std::vector<double> rewards, values, advantages, returns;
    std::vector<std::uint8_t> dones;
    // segment boundaries: segment s covers [starts[s], starts[s+1]) with
    // bootstrap_values[s] for a truncated final step
    std::vector<std::size_t> starts;
    std::vector<double> bootstrap_values;

    std::size_t size() const { return rewards.size(); }
};

// GAE recursion: delta_t = r_t + gamma*V_{t+1}*(1-done_t) - V_t,
// A_t = delta_t + gamma*lambda*(1-done_t)*A_{t+1}; returns = A + V.
// `bootstrap_value` stands in for V_{T} when the last step is truncated.
inline void compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                        const std::vector<std::uint8_t>& dones, double bootstrap_value,
                        double gamma, double lam,
                        std::vector<double>& advantages, std::vector<double>& returns) {
    const std::size_t T = rewards.size();
    if (T == 0) throw std::invalid_argument("compute_gae: empty arrays");
    if (values.size() != T || dones.size() != T)
        throw std::invalid_argument("compute_gae: length mismatch");
    if (gamma < 0.0 || gamma > 1.0 || lam < 0.0 || lam > 1.0)
        throw std::invalid_argument("compute_gae: gamma/lam out of [0,1]");
    advantages.assign(T, 0.0);
    returns.assign(T, 0.0);
    double next_adv = 0.0;
    for (std::size_t i = T; i-- > 0;) {
        const double not_done = dones[i] ? 0.0 : 1.0;
        const double next_value = (i + 1 < T) ? values[i + 1] : bootstrap_value;
        const double delta = rewards[i] + gamma * next_value * not_done - values[i];
        next_adv = delta + gamma * lam * not_done * next_adv;
        advantages[i] = next_adv;
        returns[i] = advantages[i] + values[i];
    }
}

inline void compute_gae(RolloutBatch& batch, double gamma, double lam) {
    batch.advantages.assign(batch.size(), 0.0);
    batch.returns.assign(batch.size(), 0.0);
    for (std::size_t s = 0; s + 1 < batch.starts.size(); ++s) {
        const std::size_t lo = batch.starts[s], hi = batch.starts[s + 1];
        std::vector<double> r(batch.rewards.begin() + lo, batch.rewards.begin() + hi);
        std::vector<double> v(batch.values.begin() + lo, batch.values.begin() + hi);
        std::vector<std::uint8_t> d(batch.dones.begin() + lo, batch.dones.begin() + hi);
        std::vector<double> adv, ret;
        compute_gae(r, v, d, batch.bootstrap_values[s], gamma, lam, adv, ret);
        std::copy(adv.begin(), adv.end(), batch.advantages.begin() + lo);
        std::copy(ret.begin(), ret.end(), batch.returns.begin() + lo);
    }
}

// Per-update advantage standardization (population std, guard 1e-8).
inline void normalize_advantages(std::vector<double>& adv) {
    if (adv.empty()) return;
    const double n = static_cast<double>(adv.size());
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= n;
    const double std_ = std::max(std::sqrt(var), 1e-8);
    for (double& a : adv) a = (a - mean) / std_;
}

// Random permutation partitioned into contiguous chunks of `size`
// (last chunk may be short). Union covers the batch exactly once.
inline std::vector<std::vector<std::size_t>> minibatches(std::size_t batch_len,
                                                         std::size_t size, Rng& rng) {
    if (size == 0) throw std::invalid_argument("minibatches: size 0");
    if (size > batch_len) throw std::invalid_argument("minibatches: size > batch length");
    std::vector<std::size_t> perm(batch_len);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = batch_len; i > 1; --i)
        std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t off = 0; off < batch_len; off += size) {
        const std::size_t hi = std::min(off + size, batch_len);
        out.emplace_back(perm.begin() + off, perm.begin() + hi);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experience interchange frames (async mode): length-prefixed binary records
// carrying a format version, the producing policy version, and one rollout
// segment's transition arrays.

constexpr std::uint32_t kFrameFormatVersion = 1;

struct ExperienceFrame {
    std::uint64_t policy_version = 0;
    std::uint32_t obs_dim = 0;
    std::uint32_t n_sub = 0;
    bool discrete = true;
    Matrix states;    // [T x obs_dim]
    Matrix old_logps; // [T x n_sub]
    std::vector<CompoundAction> actions;
    std::vector<double> rewards, values;
    std::vector<std::uint8_t> dones;
    double bootstrap_value = 0.0;

    std::size_t size() const { return rewards.size(); }
};

namespace detail {
template <typename T>
inline void put(std::vector<std::uint8_t>& buf, const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}
template <typename T>
inline T get(const std::uint8_t*& p, const std::uint8_t* end) {
    if (p + sizeof(T) > end) throw std::runtime_error("frame: truncated");
    T v;
    std::memcpy(&v, p, sizeof(T));
    p += sizeof(T);
    return v;
}
} // namespace detail

inline std::vector<std::uint8_t> serialize_frame(const ExperienceFrame& f) {
    using detail::put;
    std::vector<std::uint8_t> body;
    const std::uint32_t T = static_cast<std::uint32_t>(f.size());
    put(body, kFrameFormatVersion);
    put(body, f.policy_version);
    put(body, T);
    put(body, f.obs_dim);
    put(body, f.n_sub);
    put(body, static_cast<std::uint8_t>(f.discrete ? 1 : 0));
    for (double v : f.states.data()) put(body, v);
    for (double v : f.old_logps.data()) put(body, v);
    for (const auto& a : f.actions) {
        if (f.discrete)
            for (std::size_t i : a.indices) put(body, static_cast<std::uint32_t>(i));
        else
            for (double v : a.values) put(body, v);
    }
    for (double v : f.rewards) put(body, v);
    for (double v : f.values) put(body, v);
    for (std::uint8_t d : f.dones) put(body, d);
    put(body, f.bootstrap_value);

    std::vector<std::uint8_t> out;
    put(out, static_cast<std::uint32_t>(body.size())); // length prefix
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

inline ExperienceFrame deserialize_frame(const std::vector<std::uint8_t>& bytes) {
    using detail::get;
    const std::uint8_t* p = bytes.data();
    const std::uint8_t* end = p + bytes.size();
    const std::uint32_t len = get<std::uint32_t>(p, end);
    if (len != bytes.size() - sizeof(std::uint32_t))
        throw std::runtime_error("frame: length prefix mismatch");
    const std::uint32_t ver = get<std::uint32_t>(p, end);
    if (ver != kFrameFormatVersion) throw std::runtime_error("frame: unknown format version");
    ExperienceFrame f;
    f.policy_version = get<std::uint64_t>(p, end);
    const std::uint32_t T = get<std::uint32_t>(p, end);
    f.obs_dim = get<std::uint32_t>(p, end);
    f.n_sub = get<std::uint32_t>(p, end);
    f.discrete = get<std::uint8_t>(p, end) != 0;
    f.states = Matrix(T, f.obs_dim);
    for (double& v : f.states.data()) v = get<double>(p, end);
    f.old_logps = Matrix(T, f.n_sub);
    for (double& v : f.old_logps.data()) v = get<double>(p, end);
    f.actions.resize(T);
    for (auto& a : f.actions) {
        if (f.discrete)
            for (std::uint32_t i = 0; i < f.n_sub; ++i)
                a.indices.push_back(get<std::uint32_t>(p, end));
        else
            for (std::uint32_t i = 0; i < f.n_sub; ++i)
                a.values.push_back(get<double>(p, end));
    }
    f.rewards.resize(T);
    for (double& v : f.rewards) v = get<double>(p, end);
    f.values.resize(T);
    for (double& v : f.values) v = get<double>(p, end);
    f.dones.resize(T);
    for (std::uint8_t& d : f.dones) d = get<std::uint8_t>(p, end);
    f.bootstrap_value = get<double>(p, end);
    if (p != end) throw std::runtime_error("frame: trailing bytes");
    return f;
}

} // namespace cppo
