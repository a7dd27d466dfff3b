#include "thermoformal/recode.hpp"

#include "thermoformal/errors.hpp"

#include <stdexcept>

namespace thermoformal {

Word Recoding::encode(std::span<const int> w) const {
    const int m1 = block_length;
    if (static_cast<int>(w.size()) < m1)
        throw std::invalid_argument("word too short to encode");
    original.require_admissible(w);
    WordTable table(original, m1);
    Word out;
    out.reserve(w.size() - m1 + 1);
    for (std::size_t t = 0; t + m1 <= w.size(); ++t) {
        std::size_t id = table.find(w.subspan(t, static_cast<std::size_t>(m1)));
        out.push_back(static_cast<int>(id));
    }
    return out;
}

Word Recoding::decode(std::span<const int> w) const {
    if (w.empty()) throw std::invalid_argument("cannot decode an empty word");
    recoded.require_admissible(w);
    Word out = blocks[w[0]];
    for (std::size_t t = 1; t < w.size(); ++t) out.push_back(blocks[w[t]].back());
    return out;
}

RecodeResult higher_block_recode(const SubshiftSpec& spec, const CylinderPotential& pot) {
    if (pot.spec() != spec)
        throw std::invalid_argument("potential does not live on the given subshift");
    const int m = pot.depth();
    if (m < 2) throw std::invalid_argument("potential depth must be at least 2");

    if (m == 2) {
        Recoding rec{spec, spec, 1, {}};
        for (int s = 0; s < spec.alphabet_size(); ++s) rec.blocks.push_back({s});
        return RecodeResult{std::move(rec), pot};
    }

    const int m1 = m - 1;
    auto blocks = admissible_words(spec, m1);
    const int D = static_cast<int>(blocks.size());

    // Two blocks chain when they overlap on m-2 symbols and the final pair is
    // admissible; the concatenated m-word is then automatically admissible.
    std::vector<std::vector<int>> transitions(D, std::vector<int>(D, 0));
    for (int a = 0; a < D; ++a) {
        for (int b = 0; b < D; ++b) {
            bool overlap = true;
            for (int t = 0; t + 1 < m1; ++t)
                if (blocks[a][t + 1] != blocks[b][t]) { overlap = false; break; }
            if (overlap && spec.allowed(blocks[a][m1 - 1], blocks[b][m1 - 1]))
                transitions[a][b] = 1;
        }
    }
    SubshiftSpec recoded(D, transitions);

    // Depth-2 weights on the recoded shift: value of rho on the m-word spelled
    // out by the chained pair of blocks.
    WordTable pairs(recoded, 2);
    std::vector<double> vals(pairs.size());
    Word spelled(m);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto p = pairs.word(i);
        const Word& first = blocks[p[0]];
        for (int t = 0; t < m1; ++t) spelled[t] = first[t];
        spelled[m - 1] = blocks[p[1]].back();
        vals[i] = pot.weights().value(spelled);
    }
    CylinderFunction rho(recoded, 2, std::move(vals));

    Recoding rec{spec, std::move(recoded), m1, std::move(blocks)};
    return RecodeResult{std::move(rec), CylinderPotential::from_weights(std::move(rho))};
}

} // namespace thermoformal
