#include "ocprom/binio.hpp"

#include <fstream>

namespace ocprom {

std::vector<unsigned char> read_file_bytes(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

void write_file_bytes(const std::string& path, const std::vector<unsigned char>& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::uint64_t hash_file(const std::string& path)
{
    const auto bytes = read_file_bytes(path);
    Fnv1a h;
    h.update(bytes.data(), bytes.size());
    return h.digest();
}

}  // namespace ocprom
