#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qrng/bits.hpp"

namespace qrng {

using HashSeed = std::array<std::uint64_t, 4>;  // 256-bit master seed

HashSeed seed_from_hex(const std::string& hex64chars);
std::string seed_fingerprint(const HashSeed& seed);

struct ExtractionPlan {
    std::uint64_t n_total = 0;     // raw input bits
    double h = 0.0;                // assumed min-entropy per raw bit
    double epsilon_total = 0.0;
    std::uint64_t k_total = 0;     // floor(H n - 2 log2(1/epsilon_total))
    std::uint64_t n_block = 8192;
    std::uint64_t k_block = 0;
    std::uint64_t block_count = 0;
    double epsilon_block = 0.0;    // epsilon_total / block_count
    HashSeed seed{};

    std::uint64_t output_bits() const { return k_block * block_count; }
};

// Sizing from the two-universal leftover bound epsilon = 2^{-(Hn-k)/2}.
// Hn below the 2 log2(1/epsilon) penalty yields an empty plan.
ExtractionPlan plan_extraction(std::uint64_t n_bits, double h, double epsilon_total,
                               std::uint64_t n_block = 8192);

// Seeded random n_block x k_block bit matrix, rows packed into 64-bit words.
// Word w of row i is a counter-mode expansion of the 256-bit seed:
//   ctr = i * words_per_row + w
//   x = sm(ctr + s0); x = sm(x ^ s1); x = sm(x + s2); x = sm(x ^ s3)
// with sm the splitmix64 finalizer (see README, reproducible bit-for-bit).
class HashMatrix {
  public:
    HashMatrix(const HashSeed& seed, std::uint64_t n_block, std::uint64_t k_block);

    static std::uint64_t word(const HashSeed& seed, std::uint64_t row,
                              std::uint64_t word_index, std::uint64_t words_per_row);

    std::uint64_t n_block() const { return n_block_; }
    std::uint64_t k_block() const { return k_block_; }
    std::uint64_t words_per_row() const { return wpr_; }

    // y_i = parity(row_i & x) over all words; |x| must equal n_block.
    BitString apply(const std::uint64_t* x_words) const;

  private:
    std::uint64_t n_block_;
    std::uint64_t k_block_;
    std::uint64_t wpr_;
    std::vector<std::uint64_t> rows_;  // k_block * wpr
};

BitString hash_block(const BitString& x, const HashSeed& seed, std::uint64_t k_block);

// Partitions into floor(n / n_block) blocks, hashes each with the same seeded
// matrix, concatenates in order; the trailing partial block is discarded.
BitString extract_stream(const BitString& bits, const ExtractionPlan& plan,
                         unsigned n_threads = 1);

}  // namespace qrng
