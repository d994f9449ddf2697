#pragma once

#include <deque>
#include <vector>

#include "dragsim/errors.hpp"
#include "dragsim/traffic.hpp"

namespace dragsim {

// Sliding window of the last h arrival vectors, zero-padded before the
// first h observations so decisions never have to wait for warm-up.
class ArHistory {
public:
    ArHistory(int h, int n_bs) : h_(h), n_bs_(n_bs) {
        if (h <= 0 || n_bs <= 0) throw ConfigError("history length and width must be positive");
        for (int i = 0; i < h; ++i) buf_.emplace_back(n_bs, 0.0);
    }

    void push(const ArrivalVector& arrivals) {
        if (static_cast<int>(arrivals.size()) != n_bs_)
            throw DimensionMismatch("history push: arrival vector size mismatch");
        buf_.pop_front();
        buf_.push_back(arrivals);
    }

    // Oldest slot first, each slot's vector contiguous. Length h * n_bs.
    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(static_cast<size_t>(h_) * n_bs_);
        for (const auto& v : buf_) out.insert(out.end(), v.begin(), v.end());
        return out;
    }

    int history_len() const { return h_; }
    int width() const { return n_bs_; }

private:
    int h_;
    int n_bs_;
    std::deque<ArrivalVector> buf_;
};

}  // namespace dragsim
