#pragma once

#include <cstdint>
#include <vector>

namespace vdbelief {

// Mixed-radix codec over the declared variable order. The first declared
// variable is the most significant digit, so index 0 is the assignment
// taking the first domain value of every variable.
class StateSpace {
public:
    StateSpace() = default;
    explicit StateSpace(std::vector<int> radices) : radices_(std::move(radices)) {
        strides_.assign(radices_.size(), 1);
        std::int64_t n = 1;
        for (int i = static_cast<int>(radices_.size()) - 1; i >= 0; --i) {
            strides_[i] = n;
            n *= radices_[i];
        }
        size_ = n;
    }

    std::int64_t size() const { return size_; }
    int num_vars() const { return static_cast<int>(radices_.size()); }
    int radix(int var) const { return radices_[var]; }

    int digit(std::int64_t state, int var) const {
        return static_cast<int>((state / strides_[var]) % radices_[var]);
    }

    std::int64_t encode(const std::vector<int>& assignment) const {
        std::int64_t s = 0;
        for (std::size_t v = 0; v < radices_.size(); ++v) s += assignment[v] * strides_[v];
        return s;
    }

    std::vector<int> decode(std::int64_t state) const {
        std::vector<int> a(radices_.size());
        for (std::size_t v = 0; v < radices_.size(); ++v) a[v] = digit(state, v);
        return a;
    }

    // Mixed-radix codec restricted to a subset of variables (used for
    // marginal tables and CPT parent rows; subset order is as given).
    std::int64_t sub_size(const std::vector<int>& vars) const {
        std::int64_t n = 1;
        for (int v : vars) n *= radices_[v];
        return n;
    }

    std::int64_t sub_index(std::int64_t state, const std::vector<int>& vars) const {
        std::int64_t idx = 0;
        for (int v : vars) idx = idx * radices_[v] + digit(state, v);
        return idx;
    }

private:
    std::vector<int> radices_;
    std::vector<std::int64_t> strides_;
    std::int64_t size_ = 1;
};

} // namespace vdbelief
