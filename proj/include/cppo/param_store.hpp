#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "cppo/params.hpp"

namespace cppo {

// Single-writer, multi-reader parameter database. Readers get an immutable
// snapshot; a checksum over (values, version) lets them verify the snapshot
// was not torn.
class ParamStore {
public:
    struct Snapshot {
        std::uint64_t version = 0;
        ParamVector params;
        std::uint64_t checksum = 0;

        bool valid() const { return checksum == param_checksum(params.values(), version); }
    };

    void publish(const ParamVector& params) {
        auto snap = std::make_shared<Snapshot>();
        {
            std::lock_guard<std::mutex> lock(m_);
            const std::uint64_t next = snap_ ? snap_->version + 1 : 1;
            snap->version = next;
            snap->params = params;
            snap->checksum = param_checksum(params.values(), next);
            snap_ = std::move(snap);
        }
    }

    std::shared_ptr<const Snapshot> read() const {
        std::lock_guard<std::mutex> lock(m_);
        if (!snap_) throw std::runtime_error("ParamStore: empty");
        return snap_;
    }

    std::uint64_t version() const {
        std::lock_guard<std::mutex> lock(m_);
        return snap_ ? snap_->version : 0;
    }

private:
    mutable std::mutex m_;
    std::shared_ptr<const Snapshot> snap_;
};

} // namespace cppo
