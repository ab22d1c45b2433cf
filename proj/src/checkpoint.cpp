#include "hydrostab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hydrostab {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + 4);
}

}  // namespace

std::vector<std::uint8_t> checkpoint_bytes(const ScalarField& f) {
    std::vector<std::uint8_t> out;
    out.reserve(16 + f.data().size() * 8);
    out.insert(out.end(), {'H', 'S', 'F', '1'});
    put_u32(out, static_cast<std::uint32_t>(f.placement()));
    put_u32(out, static_cast<std::uint32_t>(f.rows()));
    put_u32(out, static_cast<std::uint32_t>(f.cols()));
    const auto* p = reinterpret_cast<const std::uint8_t*>(f.data().data());
    out.insert(out.end(), p, p + f.data().size() * 8);
    return out;
}

void write_checkpoint(const std::filesystem::path& path, const ScalarField& f) {
    const auto bytes = checkpoint_bytes(f);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw StructuralError("cannot open checkpoint for writing: " + path.string());
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    if (!os) throw StructuralError("short write to checkpoint: " + path.string());
}

ScalarField read_checkpoint(const std::filesystem::path& path, const Grid& g) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw StructuralError("cannot open checkpoint: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "HSF1", 4) != 0)
        throw StructuralError("bad checkpoint magic in " + path.string());
    std::uint32_t pcode, rows, cols;
    is.read(reinterpret_cast<char*>(&pcode), 4);
    is.read(reinterpret_cast<char*>(&rows), 4);
    is.read(reinterpret_cast<char*>(&cols), 4);
    if (!is || pcode > 3)
        throw StructuralError("bad checkpoint header in " + path.string());
    const auto p = static_cast<Placement>(pcode);
    ScalarField f(g, p);
    if (static_cast<std::uint32_t>(f.rows()) != rows ||
        static_cast<std::uint32_t>(f.cols()) != cols)
        throw StructuralError("checkpoint shape " + std::to_string(rows) + "x" +
                              std::to_string(cols) + " does not match grid in " + path.string());
    is.read(reinterpret_cast<char*>(f.data().data()),
            static_cast<std::streamsize>(f.data().size() * 8));
    if (!is) throw StructuralError("truncated checkpoint: " + path.string());
    return f;
}

void write_csv(const std::filesystem::path& path, const ScalarField& f) {
    std::ofstream os(path);
    if (!os) throw StructuralError("cannot open csv for writing: " + path.string());
    os << "i,j,value\n";
    std::ostringstream line;
    line.precision(17);
    for (int i = 0; i < f.rows(); ++i)
        for (int j = 0; j < f.cols(); ++j) {
            line.str("");
            line << i << ',' << j << ',' << f.at(i, j) << '\n';
            os << line.str();
        }
}

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t k = 0; k < n; ++k) {
        h ^= data[k];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& data) {
    return fnv1a64(data.data(), data.size());
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace hydrostab
