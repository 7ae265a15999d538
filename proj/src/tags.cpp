#include "qrng/tags.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace qrng {

namespace {

void put_u64_le(std::uint8_t* dst, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) dst[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_u64_le(const std::uint8_t* src) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(src[i]) << (8 * i);
    return v;
}

}  // namespace

void TagWriter::write(const TimeTag& tag) {
    if (tag.t_ps < last_ps_) throw FormatError("tag stream not sorted at record " +
                                               std::to_string(count_));
    std::array<std::uint8_t, kTagRecordBytes> rec;
    put_u64_le(rec.data(), static_cast<std::uint64_t>(tag.channel));
    put_u64_le(rec.data() + 8, static_cast<std::uint64_t>(tag.t_ps));
    out_->write(reinterpret_cast<const char*>(rec.data()), rec.size());
    if (!*out_)
        throw IoError("tag write failed at byte offset " +
                      std::to_string(count_ * kTagRecordBytes));
    last_ps_ = tag.t_ps;
    ++count_;
}

std::uint64_t encode_tags(const std::vector<TimeTag>& tags, std::ostream& out) {
    TagWriter writer(out);
    for (const auto& tag : tags) writer.write(tag);
    return writer.count();
}

bool TagReader::next(TimeTag& tag) {
    std::array<std::uint8_t, kTagRecordBytes> rec;
    in_->read(reinterpret_cast<char*>(rec.data()), rec.size());
    const auto got = in_->gcount();
    if (got == 0 && in_->eof()) return false;
    if (got != static_cast<std::streamsize>(rec.size()))
        throw FormatError("truncated record " + std::to_string(index_) + ": got " +
                          std::to_string(got) + " of 16 bytes");
    const std::uint64_t code = get_u64_le(rec.data());
    if (code > 1)
        throw FormatError("unknown channel code " + std::to_string(code) +
                          " at record " + std::to_string(index_));
    const std::uint64_t t = get_u64_le(rec.data() + 8);
    if (t > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        throw FormatError("timestamp overflow at record " + std::to_string(index_));
    tag.channel = code == 0 ? Channel::A : Channel::B;
    tag.t_ps = static_cast<std::int64_t>(t);
    if (tag.t_ps < last_ps_)
        throw FormatError("decreasing timestamp at record " + std::to_string(index_));
    last_ps_ = tag.t_ps;
    ++index_;
    return true;
}

std::size_t TagReader::read_chunk(std::vector<TimeTag>& out, std::size_t max_records) {
    std::size_t n = 0;
    TimeTag tag;
    while (n < max_records && next(tag)) {
        out.push_back(tag);
        ++n;
    }
    return n;
}

std::vector<TimeTag> decode_tags(std::istream& in) {
    std::vector<TimeTag> out;
    TagReader reader(in);
    TimeTag tag;
    while (reader.next(tag)) out.push_back(tag);
    return out;
}

BitString bits_from_tags(const std::vector<TimeTag>& tags) {
    BitString bits;
    for (const auto& tag : tags) bits.push_back(tag.channel == Channel::B);
    return bits;
}

std::vector<WindowRate> windowed_rates(const std::vector<TimeTag>& tags, double window_s) {
    if (!(window_s > 0.0)) throw DomainError("window must be > 0");
    std::vector<WindowRate> out;
    if (tags.empty()) return out;
    const double window_ps = window_s * 1e12;
    const auto n_windows =
        static_cast<std::size_t>(std::floor(static_cast<double>(tags.back().t_ps) / window_ps)) + 1;
    out.resize(n_windows);
    for (std::size_t i = 0; i < n_windows; ++i)
        out[i].t_start_s = static_cast<double>(i) * window_s;
    for (const auto& tag : tags) {
        auto idx = static_cast<std::size_t>(static_cast<double>(tag.t_ps) / window_ps);
        if (idx >= n_windows) idx = n_windows - 1;
        if (tag.channel == Channel::A)
            out[idx].r_a_cps += 1.0;
        else
            out[idx].r_b_cps += 1.0;
    }
    for (auto& w : out) {
        w.r_a_cps /= window_s;
        w.r_b_cps /= window_s;
    }
    return out;
}

void write_windowed_rates_csv(const std::vector<WindowRate>& rates, std::ostream& out) {
    out << "t_start_s,r_a_cps,r_b_cps\n";
    char buf[128];
    for (const auto& w : rates) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", w.t_start_s, w.r_a_cps,
                      w.r_b_cps);
        out << buf;
    }
    if (!out) throw IoError("failed writing windowed rates CSV");
}

std::vector<WindowRate> read_windowed_rates_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "t_start_s,r_a_cps,r_b_cps")
        throw FormatError("bad windowed rates CSV header");
    std::vector<WindowRate> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        WindowRate w;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &w.t_start_s, &w.r_a_cps,
                        &w.r_b_cps) != 3)
            throw FormatError("bad windowed rates CSV row: " + line);
        out.push_back(w);
    }
    return out;
}

TupleScanner::TupleScanner(TupleWindow window) {
    window.validate();
    window_ps_ = static_cast<std::int64_t>(window.t_ns * 1e3);
}

void TupleScanner::feed(const TimeTag& tag) {
    if (!have_pending_) {
        pending_ = tag;
        have_pending_ = true;
        return;
    }
    if (tag.channel != pending_.channel && tag.t_ps - pending_.t_ps <= window_ps_) {
        bits_.push_back(pending_.channel == Channel::B);  // AB -> 0, BA -> 1
        have_pending_ = false;                            // pair consumed
    } else {
        pending_ = tag;
    }
}

void TupleScanner::finish() { have_pending_ = false; }

BitString antibunched_tuples(const std::vector<TimeTag>& tags, TupleWindow window) {
    TupleScanner scanner(window);
    for (const auto& tag : tags) scanner.feed(tag);
    scanner.finish();
    return scanner.take();
}

}  // namespace qrng
