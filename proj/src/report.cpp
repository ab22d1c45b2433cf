#include "hydrostab/report.hpp"

#include <chrono>
#include <fstream>

#include "hydrostab/checkpoint.hpp"

namespace hydrostab {

void emit_report(const std::filesystem::path& path, const json& doc) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw StructuralError("cannot open report for writing: " + path.string());
    os << doc.dump(2) << "\n";
}

json load_report(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw StructuralError("cannot open report: " + path.string());
    return json::parse(is);
}

std::string field_hash(const ScalarField& f) {
    return hash_hex(fnv1a64(checkpoint_bytes(f)));
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw StructuralError("cannot open file for hashing: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                    std::istreambuf_iterator<char>());
    return hash_hex(fnv1a64(bytes));
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace hydrostab
