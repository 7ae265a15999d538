#include "qrng/bits.hpp"

#include <bit>
#include <istream>
#include <ostream>
#include <string>

namespace qrng {

std::size_t BitString::count_ones() const {
    std::size_t n = 0;
    for (auto w : words_) n += std::popcount(w);
    return n;
}

BitString BitString::operator^(const BitString& other) const {
    if (size_ != other.size_) throw DomainError("BitString xor: size mismatch");
    BitString out(size_);
    for (std::size_t i = 0; i < words_.size(); ++i)
        out.words_[i] = words_[i] ^ other.words_[i];
    return out;
}

BitString BitString::slice(std::size_t begin, std::size_t n) const {
    if (begin + n > size_) throw DomainError("BitString slice out of range");
    BitString out(n);
    if (begin % 64 == 0) {
        const std::size_t w0 = begin / 64;
        for (std::size_t i = 0; i < out.words_.size(); ++i) out.words_[i] = words_[w0 + i];
        const std::size_t tail = n % 64;
        if (tail) out.words_.back() &= (std::uint64_t{1} << tail) - 1;
    } else {
        for (std::size_t i = 0; i < n; ++i) out.set(i, (*this)[begin + i]);
    }
    return out;
}

void BitString::append(const BitString& other) {
    for (std::size_t i = 0; i < other.size_; ++i) push_back(other[i]);
}

void BitString::write_bytes(std::ostream& out) const {
    std::uint8_t byte = 0;
    int fill = 0;
    for (std::size_t i = 0; i < size_; ++i) {
        byte = static_cast<std::uint8_t>((byte << 1) | ((*this)[i] ? 1 : 0));
        if (++fill == 8) {
            out.put(static_cast<char>(byte));
            byte = 0;
            fill = 0;
        }
    }
    if (fill > 0) out.put(static_cast<char>(byte << (8 - fill)));
    if (!out) throw IoError("failed writing bit stream");
}

BitString BitString::read_bytes(std::istream& in, std::size_t n_bits) {
    BitString out(n_bits);
    std::uint8_t byte = 0;
    for (std::size_t i = 0; i < n_bits; ++i) {
        if (i % 8 == 0) {
            int c = in.get();
            if (c < 0) throw IoError("bit stream truncated");
            byte = static_cast<std::uint8_t>(c);
        }
        out.set(i, (byte >> (7 - i % 8)) & 1u);
    }
    return out;
}

BitString BitString::from_string(const char* s) {
    BitString out;
    for (const char* p = s; *p; ++p) {
        if (*p == '0')
            out.push_back(false);
        else if (*p == '1')
            out.push_back(true);
        else
            throw DomainError("bit string literal may contain only 0 and 1");
    }
    return out;
}

std::string BitString::to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i)
        if ((*this)[i]) s[i] = '1';
    return s;
}

}  // namespace qrng
