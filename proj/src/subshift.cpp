#include "thermoformal/subshift.hpp"

#include "thermoformal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thermoformal {

SubshiftSpec::SubshiftSpec(int alphabet_size, const std::vector<std::vector<int>>& transitions)
    : d_(alphabet_size) {
    if (d_ < 1) throw std::invalid_argument("alphabet size must be at least 1");
    if (transitions.size() != static_cast<std::size_t>(d_))
        throw std::invalid_argument("transition matrix must have alphabet_size rows");
    t_.assign(static_cast<std::size_t>(d_) * d_, 0);
    for (int i = 0; i < d_; ++i) {
        if (transitions[i].size() != static_cast<std::size_t>(d_))
            throw std::invalid_argument("transition matrix must be square");
        for (int j = 0; j < d_; ++j) {
            int v = transitions[i][j];
            if (v != 0 && v != 1)
                throw std::invalid_argument("transition matrix entries must be 0 or 1");
            t_[static_cast<std::size_t>(i) * d_ + j] = static_cast<std::uint8_t>(v);
        }
    }
    succ_.resize(d_);
    pred_.resize(d_);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            if (allowed(i, j)) {
                succ_[i].push_back(j);
                pred_[j].push_back(i);
            }
    for (int i = 0; i < d_; ++i) {
        if (succ_[i].empty())
            throw std::invalid_argument("transition matrix row " + std::to_string(i) + " has no 1");
        if (pred_[i].empty())
            throw std::invalid_argument("transition matrix column " + std::to_string(i) + " has no 1");
    }
}

SubshiftSpec SubshiftSpec::full_shift(int alphabet_size) {
    std::vector<std::vector<int>> t(alphabet_size, std::vector<int>(alphabet_size, 1));
    return SubshiftSpec(alphabet_size, t);
}

std::size_t SubshiftSpec::transition_count() const {
    std::size_t n = 0;
    for (auto v : t_) n += v;
    return n;
}

bool SubshiftSpec::is_full() const {
    return transition_count() == static_cast<std::size_t>(d_) * d_;
}

bool SubshiftSpec::is_admissible(std::span<const int> word) const {
    if (word.empty()) return false;
    for (int s : word)
        if (s < 0 || s >= d_) return false;
    for (std::size_t t = 0; t + 1 < word.size(); ++t)
        if (!allowed(word[t], word[t + 1])) return false;
    return true;
}

void SubshiftSpec::require_admissible(std::span<const int> word) const {
    if (!is_admissible(word))
        throw InadmissibleWordError("word " + format_word(word) + " is not admissible");
}

std::vector<Word> admissible_words(const SubshiftSpec& spec, int n) {
    if (n < 1) throw std::invalid_argument("word length must be at least 1");
    std::vector<Word> out;
    Word cur;
    cur.reserve(n);
    // Depth-first extension in ascending symbol order yields lexicographic order.
    auto rec = [&](auto&& self) -> void {
        if (static_cast<int>(cur.size()) == n) {
            out.push_back(cur);
            return;
        }
        if (cur.empty()) {
            for (int s = 0; s < spec.alphabet_size(); ++s) {
                cur.push_back(s);
                self(self);
                cur.pop_back();
            }
        } else {
            for (int s : spec.successors(cur.back())) {
                cur.push_back(s);
                self(self);
                cur.pop_back();
            }
        }
    };
    rec(rec);
    return out;
}

namespace {

using BitRows = std::vector<std::uint64_t>;

// rows[i * stride + w] holds bits for columns w*64 .. w*64+63 of row i.
BitRows bool_square(const BitRows& m, int d, int stride) {
    BitRows out(static_cast<std::size_t>(d) * stride, 0);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if ((m[static_cast<std::size_t>(i) * stride + j / 64] >> (j % 64)) & 1u) {
                for (int w = 0; w < stride; ++w)
                    out[static_cast<std::size_t>(i) * stride + w] |=
                        m[static_cast<std::size_t>(j) * stride + w];
            }
        }
    }
    return out;
}

bool all_positive(const BitRows& m, int d, int stride) {
    for (int i = 0; i < d; ++i) {
        for (int w = 0; w < stride; ++w) {
            std::uint64_t want = ~0ULL;
            int base = w * 64;
            if (base + 64 > d) {
                int extra = base + 64 - d;
                want >>= extra;
            }
            if ((m[static_cast<std::size_t>(i) * stride + w] & want) != want) return false;
        }
    }
    return true;
}

} // namespace

bool is_primitive(const SubshiftSpec& spec) {
    const int d = spec.alphabet_size();
    const int stride = (d + 63) / 64;
    BitRows cur(static_cast<std::size_t>(d) * stride, 0);
    for (int i = 0; i < d; ++i)
        for (int j : spec.successors(i))
            cur[static_cast<std::size_t>(i) * stride + j / 64] |= (1ULL << (j % 64));

    // Powers of the boolean matrix only gain 1s (rows and columns are nonzero),
    // so it suffices to test the squarings 1, 2, 4, ... up past the Wielandt bound.
    const long long bound = static_cast<long long>(d - 1) * (d - 1) + 1;
    long long power = 1;
    while (true) {
        if (all_positive(cur, d, stride)) return true;
        if (power >= bound) return false;
        cur = bool_square(cur, d, stride);
        power *= 2;
    }
}

std::string format_word(std::span<const int> word) {
    std::string s;
    bool multi_digit = false;
    for (int v : word)
        if (v > 9) multi_digit = true;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (multi_digit && i > 0) s += '.';
        s += std::to_string(word[i]);
    }
    return s;
}

namespace {

std::uint64_t pack_word(std::span<const int> w, int alphabet) {
    std::uint64_t key = 0;
    for (int s : w) key = key * static_cast<std::uint64_t>(alphabet) + static_cast<std::uint64_t>(s);
    return key;
}

} // namespace

WordTable::WordTable(const SubshiftSpec& spec, int depth) : depth_(depth), alphabet_(spec.alphabet_size()) {
    if (depth < 1) throw std::invalid_argument("cylinder depth must be at least 1");
    // Packed keys must fit in 64 bits: depth * log2(d) < 64.
    if (depth * std::log2(std::max(2, alphabet_)) >= 63.0)
        throw std::invalid_argument("cylinder depth too large for this alphabet");
    auto words = admissible_words(spec, depth);
    count_ = words.size();
    flat_.reserve(count_ * depth);
    keys_.reserve(count_);
    for (const auto& w : words) {
        flat_.insert(flat_.end(), w.begin(), w.end());
        keys_.push_back(pack_word(w, alphabet_));
    }
}

std::size_t WordTable::find(std::span<const int> w) const {
    if (static_cast<int>(w.size()) != depth_) return npos;
    for (int s : w)
        if (s < 0 || s >= alphabet_) return npos;
    std::uint64_t key = pack_word(w, alphabet_);
    auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    if (it == keys_.end() || *it != key) return npos;
    return static_cast<std::size_t>(it - keys_.begin());
}

} // namespace thermoformal
