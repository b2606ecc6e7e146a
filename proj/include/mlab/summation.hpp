#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mlab {

/// Terms are summed in fixed blocks of this many consecutive indices; block
/// totals are then combined by a fixed pairwise tree. The grouping depends
/// only on the index range, never on how work is split across threads.
inline constexpr std::size_t kSumBlock = 4096;

/// Neumaier-compensated running sum.
template <class T>
struct CompensatedSum {
    T sum{};
    T comp{};

    void add(T x) {
        T t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    T value() const { return sum + comp; }
};

template <class T>
struct CompensatedSum<std::complex<T>> {
    CompensatedSum<T> re;
    CompensatedSum<T> im;

    void add(std::complex<T> x) {
        re.add(x.real());
        im.add(x.imag());
    }
    std::complex<T> value() const { return {re.value(), im.value()}; }
};

template <class T>
T pairwise_reduce(std::span<const T> parts) {
    if (parts.empty())
        return T{};
    if (parts.size() == 1)
        return parts[0];
    std::size_t mid = parts.size() / 2;
    return pairwise_reduce(parts.first(mid)) + pairwise_reduce(parts.subspan(mid));
}

/// Reference summation of an in-memory term sequence (index 0 is the first
/// term of the first block). Any fast path that claims bit-exact agreement
/// must reproduce this grouping.
template <class T>
T deterministic_sum(std::span<const T> terms) {
    std::vector<T> blocks;
    blocks.reserve(terms.size() / kSumBlock + 1);
    for (std::size_t start = 0; start < terms.size(); start += kSumBlock) {
        CompensatedSum<T> acc;
        std::size_t stop = std::min(terms.size(), start + kSumBlock);
        for (std::size_t i = start; i < stop; ++i)
            acc.add(terms[i]);
        blocks.push_back(acc.value());
    }
    return pairwise_reduce(std::span<const T>(blocks));
}

template <class T>
T deterministic_sum(const std::vector<T>& terms) {
    return deterministic_sum(std::span<const T>(terms));
}

/// Feeds consecutive terms and emits one compensated total per kSumBlock
/// terms. Used by chunked producers; `first_block` is the global index of
/// the block that the first fed term opens.
template <class T>
class BlockAccumulator {
  public:
    BlockAccumulator(std::span<T> out, std::size_t first_block) : out_(out), block_(first_block) {}

    void add(T x) {
        acc_.add(x);
        if (++fill_ == kSumBlock)
            flush();
    }
    void finish() {
        if (fill_ != 0)
            flush();
    }

  private:
    void flush() {
        out_[block_++] = acc_.value();
        acc_ = {};
        fill_ = 0;
    }

    std::span<T> out_;
    std::size_t block_;
    CompensatedSum<T> acc_;
    std::size_t fill_ = 0;
};

} // namespace mlab
