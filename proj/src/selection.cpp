#include "maskopt/selection.hpp"

#include <algorithm>
#include <vector>

#include "maskopt/error.hpp"

namespace maskopt {

DenseMatrix select_per_group(const DenseMatrix& values, const GroupLayout& layout,
                             const SelectionOptions& options) {
    if (options.excluded) require_same_shape(values, *options.excluded, "selection exclusion mask");
    if (layout.group_size * layout.group_count != values.size()) {
        throw ShapeError("group layout does not cover the matrix");
    }
    DenseMatrix out(values.rows(), values.cols());
    const auto v = values.data();
    auto o = out.data();

    // Strict total order: better value first, then lower index.
    auto before = [&](std::size_t a, std::size_t b) {
        if (v[a] != v[b]) return options.rank == Rank::Largest ? v[a] > v[b] : v[a] < v[b];
        return a < b;
    };

    std::vector<std::size_t> candidates;
    candidates.reserve(layout.group_size);
    for (std::size_t g = 0; g < layout.group_count; ++g) {
        candidates.clear();
        const std::size_t b = layout.begin(g);
        for (std::size_t i = b; i < b + layout.group_size; ++i) {
            if (options.excluded && options.excluded->data()[i] != 0.0) continue;
            if (options.strictly_negative && !(v[i] < 0.0)) continue;
            candidates.push_back(i);
        }
        std::size_t take = std::min(layout.budget, candidates.size());
        if (take < candidates.size()) {
            std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                             candidates.end(), before);
        }
        for (std::size_t c = 0; c < take; ++c) o[candidates[c]] = 1.0;
    }
    return out;
}

} // namespace maskopt
