#pragma once

// Concentration-factor vectors: exact dyadic fractions, one component per
// reagent, summing to exactly one.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmfv {

class ReagentUniverseMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class CFVector {
public:
    CFVector() = default;

    /// Pure reagent `index` in a universe of `size` reagents.
    static CFVector unit(std::size_t index, std::size_t size);
    /// Builds num[k] / 2^exp. Throws std::invalid_argument unless the
    /// numerators sum to 2^exp.
    static CFVector from_numerators(std::vector<std::uint64_t> num, int exp);

    std::size_t size() const { return num_.size(); }
    bool empty() const { return num_.empty(); }
    /// Denominator exponent after reduction (component k is num(k) / 2^exp()).
    int exp() const { return exp_; }
    std::uint64_t num(std::size_t k) const { return num_[k]; }
    const std::vector<std::uint64_t>& numerators() const { return num_; }

    /// Numerator of component k when expressed over 2^n (n >= exp()).
    std::uint64_t num_at(std::size_t k, int n) const;
    bool sums_to_one() const;
    double value(std::size_t k) const;

    bool operator==(const CFVector&) const = default;
    auto operator<=>(const CFVector&) const = default;

private:
    void normalize();

    std::vector<std::uint64_t> num_;
    int exp_ = 0;
};

/// One (1:1) mix-split step: component-wise average.
CFVector cf_mix(const CFVector& a, const CFVector& b);

/// Rounds every component to the nearest multiple of 2^-n (ties away from
/// zero) and pushes the residual onto the largest component so the sum stays
/// exactly one. The result has exp() <= n.
CFVector round_cf(const CFVector& cf, int n);

/// "16/32" for a single component at accuracy n.
std::string cf_component_text(const CFVector& cf, std::size_t k, int n);
/// Reduced integer ratio of the components at accuracy n, e.g. "(1:2:1)".
std::string cf_ratio_text(const CFVector& cf, int n);
/// "S=16/32 B=16/32"
std::string cf_text(const CFVector& cf, std::span<const std::string> names, int n);

/// Re-indexes `cf` (over `from`) into the reagent order `to`. Reagents missing
/// from `to` raise ReagentUniverseMismatch.
CFVector cf_reindex(const CFVector& cf, std::span<const std::string> from, std::span<const std::string> to);

}  // namespace dmfv
