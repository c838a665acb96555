#pragma once

#include <cstddef>

#include "maskopt/matrix.hpp"
#include "maskopt/pattern.hpp"

namespace maskopt {

enum class Rank { Largest, Smallest };

struct SelectionOptions {
    Rank rank = Rank::Largest;
    // Entries where this matrix is nonzero are never selected.
    const DenseMatrix* excluded = nullptr;
    // Only entries strictly below zero are eligible.
    bool strictly_negative = false;
};

// Exact per-group top-`layout.budget` selection. Within a group, entries are
// ranked by value and ties go to the lowest row-major index. Returns a 0/1
// matrix of the same shape as `values`. Groups with fewer eligible entries
// than the budget select all of them.
DenseMatrix select_per_group(const DenseMatrix& values, const GroupLayout& layout,
                             const SelectionOptions& options = {});

} // namespace maskopt
