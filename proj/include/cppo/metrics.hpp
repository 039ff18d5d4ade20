#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "cppo/losses.hpp"

namespace cppo {

struct MetricsRow {
    std::uint64_t step = 0;
    std::uint64_t update = 0;
    std::string loss_variant;
    double eps = 0.2;
    double policy_obj = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double total_obj = 0.0;
    double mean_ep_return = 0.0;
    std::uint64_t unclipped_samples = 0;
    std::uint64_t total_samples = 0;
    std::uint64_t unclipped_sub_entries = 0;
    std::uint64_t total_sub_entries = 0;
    double staleness_mean = 0.0;
};

// metrics.csv writer. Column set and order are part of the external contract;
// doubles are printed with %.17g so serial reruns are byte-identical.
class MetricsWriter {
public:
    static constexpr const char* kHeader =
        "step,update,loss_variant,eps,policy_obj,value_loss,entropy,total_obj,"
        "mean_ep_return,unclipped_samples,total_samples,unclipped_sub_entries,"
        "total_sub_entries,staleness_mean";

    explicit MetricsWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write metrics: " + path);
        out_ << kHeader << "\n";
    }

    static std::string format(const MetricsRow& r) {
        char buf[512];
        std::snprintf(buf, sizeof(buf),
                      "%llu,%llu,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%llu,%llu,%llu,%llu,%.17g",
                      static_cast<unsigned long long>(r.step),
                      static_cast<unsigned long long>(r.update), r.loss_variant.c_str(), r.eps,
                      r.policy_obj, r.value_loss, r.entropy, r.total_obj, r.mean_ep_return,
                      static_cast<unsigned long long>(r.unclipped_samples),
                      static_cast<unsigned long long>(r.total_samples),
                      static_cast<unsigned long long>(r.unclipped_sub_entries),
                      static_cast<unsigned long long>(r.total_sub_entries), r.staleness_mean);
        return buf;
    }

    void write(const MetricsRow& r) {
        out_ << format(r) << "\n";
        out_.flush();
    }

private:
    std::ofstream out_;
};

} // namespace cppo
