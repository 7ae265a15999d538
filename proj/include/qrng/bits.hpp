#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qrng/errors.hpp"

namespace qrng {

// Packed bit sequence. Bit i lives in word i/64 at position i%64 (LSB first);
// byte-level serialization is most-significant bit first within each byte.
class BitString {
  public:
    BitString() = default;
    explicit BitString(std::size_t n_bits) : size_(n_bits), words_((n_bits + 63) / 64, 0) {}

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    void push_back(bool bit) {
        const std::size_t w = size_ / 64;
        if (w == words_.size()) words_.push_back(0);
        if (bit) words_[w] |= std::uint64_t{1} << (size_ % 64);
        ++size_;
    }

    bool operator[](std::size_t i) const {
        return (words_[i / 64] >> (i % 64)) & 1u;
    }

    void set(std::size_t i, bool bit) {
        if (bit)
            words_[i / 64] |= std::uint64_t{1} << (i % 64);
        else
            words_[i / 64] &= ~(std::uint64_t{1} << (i % 64));
    }

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

    std::size_t count_ones() const;

    BitString operator^(const BitString& other) const;
    friend bool operator==(const BitString&, const BitString&) = default;

    // Sub-range [begin, begin + n) as word-aligned storage.
    BitString slice(std::size_t begin, std::size_t n) const;

    void append(const BitString& other);

    // MSB-first-per-byte serialization; trailing bits of the last byte are 0.
    void write_bytes(std::ostream& out) const;
    static BitString read_bytes(std::istream& in, std::size_t n_bits);

    static BitString from_string(const char* zeros_and_ones);
    std::string to_string() const;

  private:
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace qrng
