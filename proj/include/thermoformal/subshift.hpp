#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace thermoformal {

// A finite word over the alphabet {0, ..., d-1}.
using Word = std::vector<int>;

// One-sided subshift of finite type on d symbols. transitions(i, j) == 1 means
// the two-letter word (i, j) is admissible. Every row and every column of the
// transition matrix must contain at least one 1 (no dead symbols).
class SubshiftSpec {
public:
    SubshiftSpec(int alphabet_size, const std::vector<std::vector<int>>& transitions);

    static SubshiftSpec full_shift(int alphabet_size);

    int alphabet_size() const { return d_; }
    bool allowed(int i, int j) const { return t_[static_cast<std::size_t>(i) * d_ + j] != 0; }
    const std::vector<int>& successors(int i) const { return succ_[i]; }
    const std::vector<int>& predecessors(int j) const { return pred_[j]; }
    std::size_t transition_count() const;
    bool is_full() const;

    bool is_admissible(std::span<const int> word) const;
    // Throws InadmissibleWordError if the word is not admissible.
    void require_admissible(std::span<const int> word) const;

    bool operator==(const SubshiftSpec& other) const { return d_ == other.d_ && t_ == other.t_; }
    bool operator!=(const SubshiftSpec& other) const { return !(*this == other); }

private:
    int d_;
    std::vector<std::uint8_t> t_; // row-major d x d
    std::vector<std::vector<int>> succ_;
    std::vector<std::vector<int>> pred_;
};

// All admissible words of length n, in lexicographic order.
std::vector<Word> admissible_words(const SubshiftSpec& spec, int n);

// True iff some power of the 0/1 transition matrix is entrywise positive.
// The Wielandt bound (d-1)^2 + 1 caps the exponent that has to be examined.
bool is_primitive(const SubshiftSpec& spec);

std::string format_word(std::span<const int> word);

// Indexed table of the admissible words of a fixed length: lexicographic order,
// flat storage, and O(log n) word -> index lookup via packed keys.
class WordTable {
public:
    WordTable(const SubshiftSpec& spec, int depth);

    int depth() const { return depth_; }
    std::size_t size() const { return count_; }
    std::span<const int> word(std::size_t i) const {
        return std::span<const int>(flat_.data() + i * depth_, static_cast<std::size_t>(depth_));
    }
    // Index of an admissible word, or npos when absent.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t find(std::span<const int> w) const;

private:
    int depth_;
    int alphabet_;
    std::size_t count_;
    std::vector<int> flat_;
    std::vector<std::uint64_t> keys_; // packed, ascending (matches lex order)
};

} // namespace thermoformal
