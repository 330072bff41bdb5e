#include "dmfv/cf.hpp"

#include <algorithm>
#include <numeric>

namespace dmfv {

namespace {

constexpr int kMaxExp = 62;

}  // namespace

CFVector CFVector::unit(std::size_t index, std::size_t size)
{
    if (index >= size) throw std::out_of_range("reagent index outside universe");
    CFVector v;
    v.num_.assign(size, 0);
    v.num_[index] = 1;
    v.exp_ = 0;
    return v;
}

CFVector CFVector::from_numerators(std::vector<std::uint64_t> num, int exp)
{
    if (exp < 0 || exp > kMaxExp) throw std::invalid_argument("CF exponent out of range");
    std::uint64_t sum = 0;
    for (auto n : num) {
        if (n > (std::uint64_t{1} << exp) || sum + n < sum) throw std::invalid_argument("CF numerator too large");
        sum += n;
    }
    if (sum != (std::uint64_t{1} << exp)) throw std::invalid_argument("CF components must sum to one");
    CFVector v;
    v.num_ = std::move(num);
    v.exp_ = exp;
    v.normalize();
    return v;
}

void CFVector::normalize()
{
    while (exp_ > 0 && std::all_of(num_.begin(), num_.end(), [](std::uint64_t n) { return n % 2 == 0; })) {
        for (auto& n : num_) n /= 2;
        --exp_;
    }
}

std::uint64_t CFVector::num_at(std::size_t k, int n) const
{
    if (n < exp_) throw std::invalid_argument("accuracy below exact exponent; round first");
    return num_[k] << (n - exp_);
}

bool CFVector::sums_to_one() const
{
    if (num_.empty()) return false;
    std::uint64_t sum = 0;
    for (auto n : num_) sum += n;
    return sum == (std::uint64_t{1} << exp_);
}

double CFVector::value(std::size_t k) const
{
    return static_cast<double>(num_[k]) / static_cast<double>(std::uint64_t{1} << exp_);
}

CFVector cf_mix(const CFVector& a, const CFVector& b)
{
    if (a.size() != b.size() || a.empty()) throw ReagentUniverseMismatch("mixing vectors over different reagent sets");
    const int e = std::max(a.exp(), b.exp());
    if (e + 1 > kMaxExp) throw std::overflow_error("mix tree too deep for exact CF arithmetic");
    std::vector<std::uint64_t> num(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) num[k] = a.num_at(k, e) + b.num_at(k, e);
    return CFVector::from_numerators(std::move(num), e + 1);
}

CFVector round_cf(const CFVector& cf, int n)
{
    if (cf.exp() <= n) return cf;
    const int shift = cf.exp() - n;
    const std::uint64_t half = std::uint64_t{1} << (shift - 1);
    std::vector<std::uint64_t> num(cf.size());
    std::int64_t total = 0;
    for (std::size_t k = 0; k < cf.size(); ++k) {
        num[k] = (cf.num(k) + half) >> shift;
        total += static_cast<std::int64_t>(num[k]);
    }
    const std::int64_t target = std::int64_t{1} << n;
    // The residual goes to the largest component; only when that would drive
    // it negative does the remainder spill onto the next largest.
    std::int64_t residual = target - total;
    while (residual != 0) {
        auto largest = std::max_element(num.begin(), num.end());
        std::int64_t v = static_cast<std::int64_t>(*largest) + residual;
        if (v >= 0) {
            *largest = static_cast<std::uint64_t>(v);
            residual = 0;
        } else {
            residual = v;
            *largest = 0;
        }
    }
    return CFVector::from_numerators(std::move(num), n);
}

std::string cf_component_text(const CFVector& cf, std::size_t k, int n)
{
    CFVector r = round_cf(cf, n);
    return std::to_string(r.num_at(k, n)) + "/" + std::to_string(std::uint64_t{1} << n);
}

std::string cf_ratio_text(const CFVector& cf, int n)
{
    CFVector r = round_cf(cf, n);
    std::uint64_t g = 0;
    for (std::size_t k = 0; k < r.size(); ++k) g = std::gcd(g, r.num_at(k, n));
    if (g == 0) g = 1;
    std::string out = "(";
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (k) out += ":";
        out += std::to_string(r.num_at(k, n) / g);
    }
    return out + ")";
}

std::string cf_text(const CFVector& cf, std::span<const std::string> names, int n)
{
    std::string out;
    for (std::size_t k = 0; k < cf.size(); ++k) {
        if (!out.empty()) out += ' ';
        out += (k < names.size() ? names[k] : "#" + std::to_string(k)) + "=" + cf_component_text(cf, k, n);
    }
    return out;
}

CFVector cf_reindex(const CFVector& cf, std::span<const std::string> from, std::span<const std::string> to)
{
    if (from.size() != cf.size()) throw ReagentUniverseMismatch("CF size does not match its reagent list");
    std::vector<std::uint64_t> num(to.size(), 0);
    for (std::size_t k = 0; k < from.size(); ++k) {
        auto it = std::find(to.begin(), to.end(), from[k]);
        if (it == to.end()) {
            if (cf.num(k) == 0) continue;
            throw ReagentUniverseMismatch("reagent '" + from[k] + "' not in target universe");
        }
        num[static_cast<std::size_t>(it - to.begin())] += cf.num(k);
    }
    return CFVector::from_numerators(std::move(num), cf.exp());
}

}  // namespace dmfv
