#pragma once

#include <deque>
#include <string>
#include <vector>

#include "dragsim/errors.hpp"
#include "dragsim/rng.hpp"

namespace dragsim {

// Bounded FIFO experience store. Pushing beyond capacity evicts the
// oldest record; sampling is uniform with replacement.
template <typename T>
class ReplayMemory {
public:
    explicit ReplayMemory(size_t capacity) : cap_(capacity) {
        if (capacity == 0) throw ConfigError("replay capacity must be positive");
    }

    void push(T item) {
        if (buf_.size() == cap_) buf_.pop_front();
        buf_.push_back(std::move(item));
    }

    size_t size() const { return buf_.size(); }
    size_t capacity() const { return cap_; }

    // Oldest record first.
    const T& operator[](size_t i) const { return buf_[i]; }

    std::vector<const T*> sample(size_t n, Rng& rng) const {
        if (buf_.size() < n)
            throw InsufficientSamples("replay holds " + std::to_string(buf_.size()) +
                                      " records, need " + std::to_string(n));
        std::uniform_int_distribution<size_t> pick(0, buf_.size() - 1);
        std::vector<const T*> out;
        out.reserve(n);
        for (size_t k = 0; k < n; ++k) out.push_back(&buf_[pick(rng)]);
        return out;
    }

private:
    size_t cap_;
    std::deque<T> buf_;
};

}  // namespace dragsim
