#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cppo/params.hpp"

namespace cppo {

constexpr int kCheckpointFormatVersion = 1;

// Text checkpoint: format version, free-form meta key/values, the (name,
// shape) segment layout, then one parameter per line at full decimal
// precision (%.17g round-trips doubles exactly).
inline void save_checkpoint(const std::string& path, const ParamVector& params,
                            const std::map<std::string, std::string>& meta = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << "compound-ppo-checkpoint " << kCheckpointFormatVersion << "\n";
    for (const auto& [k, v] : meta) out << "meta " << k << " " << v << "\n";
    out << "segments " << params.segments().size() << "\n";
    for (const auto& s : params.segments()) {
        out << "seg " << s.name << " " << s.shape.size();
        for (std::size_t d : s.shape) out << " " << d;
        out << "\n";
    }
    out << "values " << params.size() << "\n";
    char buf[64];
    for (double v : params.values()) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << "\n";
    }
    out << "end\n";
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

struct Checkpoint {
    ParamVector params;
    std::map<std::string, std::string> meta;
};

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "compound-ppo-checkpoint" || version != kCheckpointFormatVersion)
        throw std::runtime_error("bad checkpoint header in " + path);
    Checkpoint ck;
    std::size_t n_seg = 0;
    while (in >> tag) {
        if (tag == "meta") {
            std::string k, v;
            in >> k >> v;
            ck.meta[k] = v;
        } else if (tag == "segments") {
            in >> n_seg;
        } else if (tag == "seg") {
            std::string name;
            std::size_t ndims;
            in >> name >> ndims;
            std::vector<std::size_t> shape(ndims);
            for (auto& d : shape) in >> d;
            ck.params.add_segment(name, shape);
        } else if (tag == "values") {
            std::size_t n = 0;
            in >> n;
            if (n != ck.params.size())
                throw std::runtime_error("checkpoint value count mismatch in " + path);
            for (double& v : ck.params.values())
                if (!(in >> v)) throw std::runtime_error("truncated checkpoint: " + path);
        } else if (tag == "end") {
            if (ck.params.segments().size() != n_seg)
                throw std::runtime_error("checkpoint segment count mismatch in " + path);
            return ck;
        } else {
            throw std::runtime_error("unknown checkpoint token '" + tag + "' in " + path);
        }
    }
    throw std::runtime_error("checkpoint missing 'end': " + path);
}

} // namespace cppo
