#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace cppo {

// Flat trainable parameter vector with a named segment layout.
// Segment names must be unique; total length equals the sum of segment sizes.
struct ParamSegment {
    std::string name;
    std::vector<std::size_t> shape;

    std::size_t size() const {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }
};

class ParamVector {
public:
    ParamVector() = default;

    void add_segment(const std::string& name, std::vector<std::size_t> shape) {
        for (const auto& s : segments_)
            if (s.name == name) throw std::invalid_argument("duplicate segment: " + name);
        ParamSegment seg{name, std::move(shape)};
        offsets_.push_back(values_.size());
        values_.resize(values_.size() + seg.size(), 0.0);
        segments_.push_back(std::move(seg));
    }

    std::size_t size() const { return values_.size(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<ParamSegment>& segments() const { return segments_; }

    std::size_t segment_offset(const std::string& name) const {
        return offsets_[segment_index(name)];
    }
    std::size_t segment_size(const std::string& name) const {
        return segments_[segment_index(name)].size();
    }
    double* segment(const std::string& name) {
        return values_.data() + segment_offset(name);
    }
    const double* segment(const std::string& name) const {
        return values_.data() + segment_offset(name);
    }

    bool has_segment(const std::string& name) const {
        for (const auto& s : segments_)
            if (s.name == name) return true;
        return false;
    }

    // Same layout, zero values. Used for gradients.
    ParamVector zeros_like() const {
        ParamVector z = *this;
        std::fill(z.values_.begin(), z.values_.end(), 0.0);
        return z;
    }

    bool same_layout(const ParamVector& other) const {
        if (segments_.size() != other.segments_.size()) return false;
        for (std::size_t i = 0; i < segments_.size(); ++i)
            if (segments_[i].name != other.segments_[i].name ||
                segments_[i].shape != other.segments_[i].shape)
                return false;
        return true;
    }

private:
    std::size_t segment_index(const std::string& name) const {
        for (std::size_t i = 0; i < segments_.size(); ++i)
            if (segments_[i].name == name) return i;
        throw std::invalid_argument("no such segment: " + name);
    }

    std::vector<ParamSegment> segments_;
    std::vector<std::size_t> offsets_;
    std::vector<double> values_;
};

inline double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// FNV-1a over the raw bytes of the parameter values plus a version tag.
// Used by the parameter store to detect torn snapshots.
inline std::uint64_t param_checksum(const std::vector<double>& values, std::uint64_t version) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const unsigned char* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    mix(reinterpret_cast<const unsigned char*>(values.data()), values.size() * sizeof(double));
    mix(reinterpret_cast<const unsigned char*>(&version), sizeof(version));
    return h;
}

} // namespace cppo
