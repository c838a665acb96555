#include "maskopt/lmo.hpp"

#include <string>

#include "maskopt/error.hpp"
#include "maskopt/selection.hpp"

namespace maskopt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Every group must offer at least `budget` selectable coordinates.
void require_capacity(const LmoRequest& req, const GroupLayout& layout) {
    const auto* frozen = req.frozen ? req.frozen->values().data().data() : nullptr;
    for (std::size_t g = 0; g < layout.group_count; ++g) {
        std::size_t open = layout.group_size;
        if (frozen) {
            const std::size_t b = layout.begin(g);
            for (std::size_t i = b; i < b + layout.group_size; ++i)
                if (frozen[i] != 0.0) --open;
        }
        if (layout.budget > open) {
            throw BudgetError("LMO budget " + std::to_string(layout.budget) + " exceeds the " +
                              std::to_string(open) + " free coordinates of group " + std::to_string(g));
        }
    }
}

BinaryMask solve(const LmoRequest& req, const SparsityPattern& pattern) {
    if (req.frozen) require_same_shape(req.grad, req.frozen->values(), "LMO frozen mask");
    GroupLayout layout;
    try {
        layout = pattern.layout(req.grad.rows(), req.grad.cols());
    } catch (const PatternError& e) {
        // An oversized count is a budget problem; a bad n:m shape is not.
        if (pattern.is_nm()) throw;
        throw BudgetError(e.what());
    }
    require_capacity(req, layout);
    SelectionOptions options;
    options.rank = Rank::Smallest;
    options.strictly_negative = true;
    options.excluded = req.frozen ? &req.frozen->values() : nullptr;
    return BinaryMask(select_per_group(req.grad, layout, options), pattern);
}

} // namespace

BinaryMask lmo_unstructured(const LmoRequest& req, std::size_t k) {
    return solve(req, SparsityPattern::unstructured(k));
}

BinaryMask lmo_per_row(const LmoRequest& req, std::size_t k_row) {
    return solve(req, SparsityPattern::per_row(k_row));
}

BinaryMask lmo_nm(const LmoRequest& req, std::size_t n, std::size_t m) {
    return solve(req, SparsityPattern::nm(n, m));
}

BinaryMask lmo(const LmoRequest& req) {
    return std::visit(overloaded{
                          [&](const Unstructured& p) { return lmo_unstructured(req, p.k); },
                          [&](const PerRow& p) { return lmo_per_row(req, p.k_row); },
                          [&](const NM& p) { return lmo_nm(req, p.n, p.m); },
                      },
                      req.pattern.variant());
}

} // namespace maskopt
