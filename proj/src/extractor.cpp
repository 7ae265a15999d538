#include "qrng/extractor.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <thread>

#include "qrng/errors.hpp"

namespace qrng {

namespace {

// splitmix64 finalizer as a pure function
std::uint64_t sm(std::uint64_t v) {
    std::uint64_t z = v + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

HashSeed seed_from_hex(const std::string& hex) {
    if (hex.size() != 64) throw DomainError("hash seed must be 64 hex characters");
    HashSeed seed{};
    for (int w = 0; w < 4; ++w) {
        std::uint64_t v = 0;
        for (int i = 0; i < 16; ++i) {
            const int d = hex_val(hex[static_cast<std::size_t>(w * 16 + i)]);
            if (d < 0) throw DomainError("hash seed contains a non-hex character");
            v = (v << 4) | static_cast<std::uint64_t>(d);
        }
        seed[static_cast<std::size_t>(w)] = v;
    }
    return seed;
}

std::string seed_fingerprint(const HashSeed& seed) {
    std::uint64_t x = 0;
    for (auto w : seed) x = sm(x ^ w);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

ExtractionPlan plan_extraction(std::uint64_t n_bits, double h, double epsilon_total,
                               std::uint64_t n_block) {
    if (n_bits < 1) throw DomainError("need at least one raw bit");
    if (!(h > 0.0 && h <= 1.0)) throw DomainError("entropy per bit outside (0,1]");
    if (!(epsilon_total > 0.0 && epsilon_total < 1.0))
        throw DomainError("epsilon outside (0,1)");
    if (n_block < 64 || n_block % 64 != 0)
        throw DomainError("block size must be a positive multiple of 64");

    ExtractionPlan plan;
    plan.n_total = n_bits;
    plan.h = h;
    plan.epsilon_total = epsilon_total;
    plan.n_block = n_block;
    const double penalty = 2.0 * (-std::log2(epsilon_total));
    const double k = h * static_cast<double>(n_bits) - penalty;
    plan.k_total = k > 0.0 ? static_cast<std::uint64_t>(std::floor(k)) : 0;

    plan.block_count = n_bits / n_block;
    if (plan.block_count > 0) {
        plan.epsilon_block = epsilon_total / static_cast<double>(plan.block_count);
        const double kb =
            h * static_cast<double>(n_block) - 2.0 * (-std::log2(plan.epsilon_block));
        plan.k_block = kb > 0.0
                           ? std::min(static_cast<std::uint64_t>(std::floor(kb)), n_block)
                           : 0;
    }
    return plan;
}

HashMatrix::HashMatrix(const HashSeed& seed, std::uint64_t n_block, std::uint64_t k_block)
    : n_block_(n_block), k_block_(k_block), wpr_(n_block / 64) {
    if (n_block < 64 || n_block % 64 != 0)
        throw DomainError("block size must be a positive multiple of 64");
    rows_.resize(k_block_ * wpr_);
    for (std::uint64_t i = 0; i < k_block_; ++i)
        for (std::uint64_t w = 0; w < wpr_; ++w)
            rows_[i * wpr_ + w] = word(seed, i, w, wpr_);
}

std::uint64_t HashMatrix::word(const HashSeed& seed, std::uint64_t row,
                               std::uint64_t word_index, std::uint64_t words_per_row) {
    const std::uint64_t ctr = row * words_per_row + word_index;
    std::uint64_t x = sm(ctr + seed[0]);
    x = sm(x ^ seed[1]);
    x = sm(x + seed[2]);
    x = sm(x ^ seed[3]);
    return x;
}

BitString HashMatrix::apply(const std::uint64_t* x_words) const {
    BitString y(k_block_);
    for (std::uint64_t i = 0; i < k_block_; ++i) {
        const std::uint64_t* row = rows_.data() + i * wpr_;
        std::uint64_t acc = 0;
        for (std::uint64_t w = 0; w < wpr_; ++w) acc ^= row[w] & x_words[w];
        y.set(i, std::popcount(acc) & 1u);
    }
    return y;
}

BitString hash_block(const BitString& x, const HashSeed& seed, std::uint64_t k_block) {
    if (x.size() % 64 != 0)
        throw DomainError("hash input length must be a multiple of 64");
    const HashMatrix m(seed, x.size(), k_block);
    return m.apply(x.words().data());
}

BitString extract_stream(const BitString& bits, const ExtractionPlan& plan,
                         unsigned n_threads) {
    if (bits.size() < plan.n_block)
        throw DomainError("input shorter than one extraction block");
    const std::uint64_t blocks = bits.size() / plan.n_block;
    const std::uint64_t wpb = plan.n_block / 64;
    const HashMatrix matrix(plan.seed, plan.n_block, plan.k_block);

    std::vector<BitString> outputs(blocks);
    const auto run = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t b = begin; b < end; ++b)
            outputs[b] = matrix.apply(bits.words().data() + b * wpb);
    };
    if (n_threads <= 1 || blocks < 2) {
        run(0, blocks);
    } else {
        const unsigned workers = static_cast<unsigned>(
            std::min<std::uint64_t>(n_threads, blocks));
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t lo = blocks * w / workers;
            const std::uint64_t hi = blocks * (w + 1) / workers;
            pool.emplace_back(run, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    BitString out;
    for (auto& block : outputs) out.append(block);
    return out;
}

}  // namespace qrng
