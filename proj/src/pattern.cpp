#include "maskopt/pattern.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "maskopt/error.hpp"

namespace maskopt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t parse_count(std::string_view text, std::string_view whole) {
    std::size_t value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc{} || ptr != last) {
        throw PatternError("invalid count '" + std::string(text) + "' in pattern '" +
                           std::string(whole) + "'");
    }
    return value;
}

double parse_real(std::string_view text, std::string_view whole) {
    // from_chars for double is missing on older libstdc++; stod is fine here.
    std::string s(text);
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size() || !std::isfinite(value)) {
        throw PatternError("invalid percentage '" + s + "' in pattern '" + std::string(whole) + "'");
    }
    return value;
}

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace

void SparsityPattern::validate(std::size_t d_out, std::size_t d_in) const {
    std::visit(overloaded{
                   [&](const Unstructured& p) {
                       if (p.k > d_out * d_in) {
                           throw PatternError("unstructured budget " + std::to_string(p.k) +
                                              " exceeds " + std::to_string(d_out * d_in) +
                                              " weights");
                       }
                   },
                   [&](const PerRow& p) {
                       if (p.k_row > d_in) {
                           throw PatternError("per-row budget " + std::to_string(p.k_row) +
                                              " exceeds row length " + std::to_string(d_in));
                       }
                   },
                   [&](const NM& p) {
                       if (p.n == 0 || p.m > p.n) {
                           throw PatternError("n:m pattern needs m <= n and n > 0, got m=" +
                                              std::to_string(p.m) + " n=" + std::to_string(p.n));
                       }
                       if (d_in % p.n != 0) {
                           throw PatternError("row length " + std::to_string(d_in) +
                                              " is not divisible by block size " +
                                              std::to_string(p.n));
                       }
                   },
               },
               v_);
}

std::size_t SparsityPattern::budget(std::size_t d_out, std::size_t d_in) const {
    return layout(d_out, d_in).total_budget();
}

GroupLayout SparsityPattern::layout(std::size_t d_out, std::size_t d_in) const {
    validate(d_out, d_in);
    return std::visit(overloaded{
                          [&](const Unstructured& p) {
                              return GroupLayout{d_out * d_in, 1, p.k};
                          },
                          [&](const PerRow& p) { return GroupLayout{d_in, d_out, p.k_row}; },
                          [&](const NM& p) {
                              return GroupLayout{p.n, d_out * (d_in / p.n), p.m};
                          },
                      },
                      v_);
}

SparsityPattern SparsityPattern::with_group_budget(std::size_t budget) const {
    return std::visit(overloaded{
                          [&](const Unstructured&) { return unstructured(budget); },
                          [&](const PerRow&) { return per_row(budget); },
                          [&](const NM& p) { return SparsityPattern(NM{p.n, budget}); },
                      },
                      v_);
}

std::string SparsityPattern::to_string() const {
    return std::visit(overloaded{
                          [](const Unstructured& p) { return "u:" + std::to_string(p.k); },
                          [](const PerRow& p) { return "row:" + std::to_string(p.k_row); },
                          [](const NM& p) {
                              return std::to_string(p.m) + ":" + std::to_string(p.n);
                          },
                      },
                      v_);
}

PatternSpec PatternSpec::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw PatternError("pattern '" + std::string(text) + "' has no ':'");
    }
    const auto head = text.substr(0, colon);
    const auto tail = text.substr(colon + 1);
    PatternSpec spec;
    if (head == "u") {
        spec.kind_ = Kind::UnstructuredCount;
        spec.count_ = parse_count(tail, text);
    } else if (head == "u%") {
        spec.kind_ = Kind::UnstructuredPercent;
        spec.percent_ = parse_real(tail, text);
        if (spec.percent_ < 0.0 || spec.percent_ > 100.0) {
            throw PatternError("sparsity percentage must lie in [0, 100] in '" + std::string(text) +
                               "'");
        }
        spec.percent_ += 0.0; // -0 -> +0 so that format() round-trips
    } else if (head == "row") {
        spec.kind_ = Kind::PerRow;
        spec.count_ = parse_count(tail, text);
    } else {
        spec.kind_ = Kind::NM;
        spec.count_ = parse_count(head, text);
        spec.block_ = parse_count(tail, text);
        if (spec.block_ == 0 || spec.count_ == 0 || spec.count_ > spec.block_) {
            throw PatternError("n:m pattern '" + std::string(text) + "' needs 0 < M <= N");
        }
    }
    return spec;
}

std::string PatternSpec::format() const {
    switch (kind_) {
    case Kind::UnstructuredCount: return "u:" + std::to_string(count_);
    case Kind::UnstructuredPercent: return "u%:" + format_real(percent_);
    case Kind::PerRow: return "row:" + std::to_string(count_);
    case Kind::NM: return std::to_string(count_) + ":" + std::to_string(block_);
    }
    return {};
}

SparsityPattern PatternSpec::resolve(std::size_t d_out, std::size_t d_in) const {
    SparsityPattern pattern;
    switch (kind_) {
    case Kind::UnstructuredCount: pattern = SparsityPattern::unstructured(count_); break;
    case Kind::UnstructuredPercent: {
        const auto total = static_cast<double>(d_out * d_in);
        pattern = SparsityPattern::unstructured(
            static_cast<std::size_t>(std::floor(total * (100.0 - percent_) / 100.0)));
        break;
    }
    case Kind::PerRow: pattern = SparsityPattern::per_row(count_); break;
    case Kind::NM: pattern = SparsityPattern::nm(block_, count_); break;
    }
    pattern.validate(d_out, d_in);
    return pattern;
}

} // namespace maskopt
