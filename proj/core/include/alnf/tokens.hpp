#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace alnf {

using Token = std::int32_t;
using TokenSeq = std::vector<Token>;

/// Token id space shared by a policy/reward model family.
struct Vocabulary {
    int size = 0;
    Token bos = 0;
    Token eos = 1;
    Token pad = 2;

    /// size >= 4, special ids distinct and < size.
    void validate() const;

    bool contains(Token t) const { return t >= 0 && t < size; }

    /// Throws InvalidToken on the first out-of-range id.
    void check(std::span<const Token> seq) const;
};

/// seq = x followed by y.
TokenSeq concat(std::span<const Token> x, std::span<const Token> y);

}  // namespace alnf
