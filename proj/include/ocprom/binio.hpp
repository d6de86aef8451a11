#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace ocprom {

// 64-bit FNV-1a. Used both as the file-trailer checksum and for provenance
// hashes of meshes and datasets.
class Fnv1a {
public:
    void update(const void* data, std::size_t n)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001B3ULL;
        }
    }
    std::uint64_t digest() const { return hash_; }

private:
    std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

struct FileFormatError : std::runtime_error {
    enum class Kind { MagicMismatch, Truncated, ChecksumMismatch, BadHeader };
    FileFormatError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
    Kind kind;
};

// Append-only little-endian byte buffer; written to disk in one piece so the
// checksum can cover everything that precedes it.
class ByteWriter {
public:
    void write_bytes(const void* data, std::size_t n)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    void write_u32(std::uint32_t v) { write_le(v); }
    void write_u64(std::uint64_t v) { write_le(v); }
    void write_f64(double v)
    {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        write_le(bits);
    }
    void write_f64_array(const double* v, std::size_t n)
    {
        for (std::size_t i = 0; i < n; ++i) write_f64(v[i]);
    }
    const std::vector<unsigned char>& bytes() const { return buf_; }

private:
    template <typename T>
    void write_le(T v)
    {
        for (std::size_t i = 0; i < sizeof(T); ++i)
            buf_.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
    }
    std::vector<unsigned char> buf_;
};

class ByteReader {
public:
    ByteReader(const unsigned char* data, std::size_t n) : data_(data), size_(n) {}

    void read_bytes(void* out, std::size_t n)
    {
        require(n);
        std::memcpy(out, data_ + pos_, n);
        pos_ += n;
    }
    std::uint32_t read_u32() { return read_le<std::uint32_t>(); }
    std::uint64_t read_u64() { return read_le<std::uint64_t>(); }
    double read_f64()
    {
        const std::uint64_t bits = read_le<std::uint64_t>();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return size_ - pos_; }

private:
    template <typename T>
    T read_le()
    {
        require(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<T>(data_[pos_ + i]) << (8 * i);
        pos_ += sizeof(T);
        return v;
    }
    void require(std::size_t n)
    {
        if (pos_ + n > size_)
            throw FileFormatError(FileFormatError::Kind::Truncated,
                                  "file truncated: need " + std::to_string(n) +
                                      " bytes at offset " + std::to_string(pos_));
    }
    const unsigned char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<unsigned char>& bytes);
std::uint64_t hash_file(const std::string& path);

}  // namespace ocprom
