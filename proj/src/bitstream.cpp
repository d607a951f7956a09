#include "dire/bitstream.hpp"

#include <fstream>
#include <iterator>

#include "dire/errors.hpp"

namespace dire {

BitString BitString::from_string(const std::string& bits) {
    BitString out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != '0' && bits[i] != '1') throw SchemaError("bit string may only contain '0' and '1'");
        out.set(i, bits[i] == '1');
    }
    return out;
}

std::string BitString::to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

BitString BitString::operator^(const BitString& other) const {
    if (other.size_ != size_) throw InvariantError("bits", "xor of bit strings with different lengths");
    BitString out(*this);
    for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] ^= other.words_[w];
    return out;
}

std::vector<std::uint8_t> encode_bitstream(const BitString& bits) {
    const std::uint64_t n = bits.size();
    std::vector<std::uint8_t> out(8 + (n + 7) / 8, 0);
    for (int k = 0; k < 8; ++k) out[k] = static_cast<std::uint8_t>(n >> (8 * k));
    for (std::uint64_t i = 0; i < n; ++i)
        if (bits.get(i)) out[8 + i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    return out;
}

BitString decode_bitstream(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8) throw SchemaError("bitstream: truncated header");
    std::uint64_t n = 0;
    for (int k = 0; k < 8; ++k) n |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
    if (bytes.size() - 8 != (n + 7) / 8)
        throw SchemaError("bitstream: payload length does not match the " + std::to_string(n) + "-bit header");
    BitString out(n);
    for (std::uint64_t i = 0; i < n; ++i) out.set(i, (bytes[8 + i / 8] >> (i % 8)) & 1u);
    return out;
}

BitString bits_from_raw(const std::vector<std::uint8_t>& bytes) {
    BitString out(bytes.size() * 8);
    for (std::size_t i = 0; i < out.size(); ++i) out.set(i, (bytes[i / 8] >> (i % 8)) & 1u);
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace dire
