#pragma once

#include <cstdint>
#include <vector>

#include "mlab/phase/poly_phase.hpp"

namespace mlab::phase {

/// Cursor over {P(n)}, {P(n+1)}, ...: holds the d+1 forward differences of P
/// at the current index, so each step is d additions mod M.
class DiffTable {
  public:
    DiffTable(const PolyPhase& p, std::int64_t n0) : ring_(p.ring()), index_(n0) {
        int d = p.degree();
        diffs_.resize(d + 1);
        std::vector<u128> vals(d + 1);
        for (int k = 0; k <= d; ++k)
            vals[k] = p.eval_residue(n0 + k);
        // Newton forward differences at n0.
        for (int k = 0; k <= d; ++k) {
            diffs_[k] = vals[0];
            for (int i = 0; i + 1 < static_cast<int>(vals.size()); ++i)
                vals[i] = ring_.sub(vals[i + 1], vals[i]);
            vals.pop_back();
        }
    }

    std::int64_t index() const { return index_; }
    /// Residue of P(index()).
    u128 value() const { return diffs_[0]; }
    const Mod1Ring& ring() const { return ring_; }

    /// Advances to index()+1 and returns the new value.
    u128 step() {
        std::size_t d = diffs_.size() - 1;
        for (std::size_t k = 0; k < d; ++k)
            diffs_[k] = ring_.add(diffs_[k], diffs_[k + 1]);
        ++index_;
        return diffs_[0];
    }

  private:
    Mod1Ring ring_;
    std::int64_t index_;
    std::vector<u128> diffs_;
};

inline DiffTable make_diff_table(const PolyPhase& p, std::int64_t n0) { return DiffTable(p, n0); }

} // namespace mlab::phase
