#pragma once

#include "thermoformal/cylinder.hpp"
#include "thermoformal/subshift.hpp"

namespace thermoformal {

// Higher-block recoding: a depth-m potential becomes a depth-2 potential on the
// alphabet of admissible (m-1)-words. Pressure, entropy and cylinder weights of
// the associated Gibbs data are invariant under this conjugacy.
struct Recoding {
    SubshiftSpec original;
    SubshiftSpec recoded;
    int block_length; // m - 1; 1 means the recoding is trivial
    std::vector<Word> blocks; // recoded symbol -> block word on the original alphabet

    bool trivial() const { return block_length == 1; }

    // Original word of length n >= block_length -> recoded word of length n - block_length + 1.
    Word encode(std::span<const int> w) const;
    // Inverse of encode.
    Word decode(std::span<const int> w) const;
};

struct RecodeResult {
    Recoding recoding;
    CylinderPotential potential; // depth 2 on recoding.recoded
};

RecodeResult higher_block_recode(const SubshiftSpec& spec, const CylinderPotential& pot);

} // namespace thermoformal
