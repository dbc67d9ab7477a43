#include "alnf/tokens.hpp"

#include "alnf/errors.hpp"

namespace alnf {

void Vocabulary::validate() const {
    if (size < 4) throw ValidationError("vocabulary size must be >= 4");
    if (!contains(bos) || !contains(eos) || !contains(pad))
        throw ValidationError("special token ids must be < vocabulary size");
    if (bos == eos || bos == pad || eos == pad)
        throw ValidationError("special token ids must be distinct");
}

void Vocabulary::check(std::span<const Token> seq) const {
    for (Token t : seq) {
        if (!contains(t)) throw InvalidToken(t, size);
    }
}

TokenSeq concat(std::span<const Token> x, std::span<const Token> y) {
    TokenSeq out;
    out.reserve(x.size() + y.size());
    out.insert(out.end(), x.begin(), x.end());
    out.insert(out.end(), y.begin(), y.end());
    return out;
}

}  // namespace alnf
