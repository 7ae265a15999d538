#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qrng/bits.hpp"
#include "qrng/errors.hpp"

namespace qrng {

enum class Channel : std::uint8_t { A = 0, B = 1 };

// One detector click. Streams are nondecreasing in t_ps.
struct TimeTag {
    Channel channel = Channel::A;
    std::int64_t t_ps = 0;

    friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

inline constexpr std::size_t kTagRecordBytes = 16;

// Writes 16-byte records: little-endian u64 channel code (0 = A transmitted,
// 1 = B reflected) followed by little-endian u64 picoseconds.
class TagWriter {
  public:
    explicit TagWriter(std::ostream& out) : out_(&out) {}
    void write(const TimeTag& tag);
    std::uint64_t count() const { return count_; }

  private:
    std::ostream* out_;
    std::uint64_t count_ = 0;
    std::int64_t last_ps_ = -1;
};

std::uint64_t encode_tags(const std::vector<TimeTag>& tags, std::ostream& out);

// Lazily decodes and validates records; throws FormatError on truncation,
// unknown channel codes or decreasing timestamps (with the record index).
class TagReader {
  public:
    explicit TagReader(std::istream& in) : in_(&in) {}
    bool next(TimeTag& tag);
    // Appends up to max_records decoded tags; returns number read.
    std::size_t read_chunk(std::vector<TimeTag>& out, std::size_t max_records);
    std::uint64_t index() const { return index_; }

  private:
    std::istream* in_;
    std::uint64_t index_ = 0;
    std::int64_t last_ps_ = -1;
};

std::vector<TimeTag> decode_tags(std::istream& in);

// A -> 0, B -> 1, order preserving.
BitString bits_from_tags(const std::vector<TimeTag>& tags);

struct WindowRate {
    double t_start_s = 0.0;
    double r_a_cps = 0.0;
    double r_b_cps = 0.0;
};

// Per-window click rates covering [0, last tag]; empty stream -> empty series.
std::vector<WindowRate> windowed_rates(const std::vector<TimeTag>& tags, double window_s);

void write_windowed_rates_csv(const std::vector<WindowRate>& rates, std::ostream& out);
std::vector<WindowRate> read_windowed_rates_csv(std::istream& in);

// Maximum separation for a start-stop tuple.
struct TupleWindow {
    double t_ns = 0.0;

    void validate() const {
        if (!(t_ns > 0.0)) throw DomainError("tuple window must be > 0");
    }
};

// Non-overlapping consecutive-pair scan: a pair of clicks on opposite
// detectors separated by at most the window emits one bold bit (AB -> 0,
// BA -> 1) and consumes both clicks; otherwise the scan advances by one.
class TupleScanner {
  public:
    explicit TupleScanner(TupleWindow window);
    void feed(const TimeTag& tag);
    void finish();
    const BitString& bits() const { return bits_; }
    BitString take() { return std::move(bits_); }

  private:
    std::int64_t window_ps_;
    bool have_pending_ = false;
    TimeTag pending_{};
    BitString bits_;
};

BitString antibunched_tuples(const std::vector<TimeTag>& tags, TupleWindow window);

}  // namespace qrng
