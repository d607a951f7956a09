#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dire {

/// Packed bit string; bit i lives in word i / 64 at position i % 64.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

    static BitString from_string(const std::string& bits);  // "1011" -> bit0 = 1
    std::string to_string() const;

    std::size_t size() const { return size_; }
    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool v) {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (v) words_[i >> 6] |= mask;
        else words_[i >> 6] &= ~mask;
    }

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

    BitString operator^(const BitString& other) const;
    friend bool operator==(const BitString&, const BitString&) = default;

private:
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Serialized form: 8-byte little-endian bit count, then ceil(count / 8)
/// bytes with bit i at byte i / 8, position i % 8 (least significant first).
std::vector<std::uint8_t> encode_bitstream(const BitString& bits);
BitString decode_bitstream(const std::vector<std::uint8_t>& bytes);

/// Raw bytes without a header; every byte contributes 8 bits, LSB first.
BitString bits_from_raw(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace dire
