#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>

namespace maskopt {

struct Unstructured {
    std::size_t k = 0;
    friend bool operator==(const Unstructured&, const Unstructured&) = default;
};

struct PerRow {
    std::size_t k_row = 0;
    friend bool operator==(const PerRow&, const PerRow&) = default;
};

// At most `m` nonzeros in every block of `n` consecutive entries of a row.
struct NM {
    std::size_t n = 0;
    std::size_t m = 0;
    friend bool operator==(const NM&, const NM&) = default;
};

// Every pattern partitions the row-major index range of a d_out x d_in
// matrix into equally sized contiguous groups, each with the same budget:
// one group for Unstructured, one per row for PerRow, one per block for NM.
struct GroupLayout {
    std::size_t group_size = 0;
    std::size_t group_count = 0;
    std::size_t budget = 0; // per group

    std::size_t begin(std::size_t g) const noexcept { return g * group_size; }
    std::size_t total_budget() const noexcept { return group_count * budget; }
};

class SparsityPattern {
public:
    using Variant = std::variant<Unstructured, PerRow, NM>;

    SparsityPattern() = default;
    SparsityPattern(Variant v) : v_(v) {}

    static SparsityPattern unstructured(std::size_t k) { return {Unstructured{k}}; }
    static SparsityPattern per_row(std::size_t k_row) { return {PerRow{k_row}}; }
    static SparsityPattern nm(std::size_t n, std::size_t m) { return {NM{n, m}}; }

    const Variant& variant() const noexcept { return v_; }
    bool is_unstructured() const noexcept { return std::holds_alternative<Unstructured>(v_); }
    bool is_per_row() const noexcept { return std::holds_alternative<PerRow>(v_); }
    bool is_nm() const noexcept { return std::holds_alternative<NM>(v_); }

    // Throws PatternError if the pattern cannot be applied to the shape.
    void validate(std::size_t d_out, std::size_t d_in) const;

    // Total number of allowed nonzeros (validates first).
    std::size_t budget(std::size_t d_out, std::size_t d_in) const;
    GroupLayout layout(std::size_t d_out, std::size_t d_in) const;

    // Same pattern kind with the per-group budget replaced.
    SparsityPattern with_group_budget(std::size_t budget) const;

    std::string to_string() const;

    friend bool operator==(const SparsityPattern&, const SparsityPattern&) = default;

private:
    Variant v_{Unstructured{0}};
};

// Textual pattern specification as accepted on the command line:
//   "u:K"   unstructured, K nonzeros in total
//   "u%:P"  unstructured, P percent of the weights pruned; the kept count
//           floor(total * (100 - P) / 100) is resolved once the shape is known
//   "row:K" K nonzeros per row
//   "M:N"   at most M nonzeros in every block of N (e.g. "2:4")
class PatternSpec {
public:
    enum class Kind { UnstructuredCount, UnstructuredPercent, PerRow, NM };

    static PatternSpec parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    // Canonical textual form; parse(format()) == *this.
    std::string format() const;
    SparsityPattern resolve(std::size_t d_out, std::size_t d_in) const;

    friend bool operator==(const PatternSpec&, const PatternSpec&) = default;

private:
    Kind kind_ = Kind::UnstructuredCount;
    std::size_t count_ = 0;   // K, or kept-per-block M
    std::size_t block_ = 0;   // N for NM
    double percent_ = 0.0;
};

} // namespace maskopt
