#include "nidsrobust/binio.hpp"

#include "nidsrobust/error.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

namespace nidsrobust::binio {

namespace {

constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 36;

void put_le(std::ostream& out, std::uint64_t v, int width) {
    char buf[8];
    for (int i = 0; i < width; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, width);
}

std::uint64_t get_le(std::istream& in, int width) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), width);
    if (!in) throw SchemaError("binary file truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t{buf[i]} << (8 * i);
    return v;
}

std::uint64_t checked_count(std::istream& in) {
    const auto n = read_u64(in);
    if (n > kMaxElements) throw SchemaError("binary file declares an implausible element count");
    return n;
}

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) { put_le(out, v, 4); }
void write_u64(std::ostream& out, std::uint64_t v) { put_le(out, v, 8); }
void write_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v), 8); }

void write_string(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_strings(std::ostream& out, const std::vector<std::string>& v) {
    write_u64(out, v.size());
    for (const auto& s : v) write_string(out, s);
}

void write_matrix(std::ostream& out, const Matrix& m) {
    write_u64(out, static_cast<std::uint64_t>(m.rows()));
    write_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64(out, m(r, c));
}

void write_vector(std::ostream& out, const Vector& v) {
    write_u64(out, static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) write_f64(out, v(i));
}

void write_ints(std::ostream& out, const std::vector<int>& v) {
    write_u64(out, v.size());
    for (int x : v) put_le(out, static_cast<std::uint32_t>(x), 4);
}

std::uint32_t read_u32(std::istream& in) { return static_cast<std::uint32_t>(get_le(in, 4)); }
std::uint64_t read_u64(std::istream& in) { return get_le(in, 8); }
double read_f64(std::istream& in) { return std::bit_cast<double>(get_le(in, 8)); }

std::string read_string(std::istream& in) {
    const auto n = checked_count(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw SchemaError("binary file truncated");
    return s;
}

std::vector<std::string> read_strings(std::istream& in) {
    const auto n = checked_count(in);
    std::vector<std::string> v;
    v.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) v.push_back(read_string(in));
    return v;
}

Matrix read_matrix(std::istream& in) {
    const auto rows = checked_count(in);
    const auto cols = checked_count(in);
    if (rows * cols > kMaxElements) throw SchemaError("binary matrix too large");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_f64(in);
    return m;
}

Vector read_vector(std::istream& in) {
    const auto n = checked_count(in);
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = read_f64(in);
    return v;
}

std::vector<int> read_ints(std::istream& in) {
    const auto n = checked_count(in);
    std::vector<int> v(n);
    for (auto& x : v) x = static_cast<int>(static_cast<std::uint32_t>(get_le(in, 4)));
    return v;
}

void write_magic(std::ostream& out, const char (&magic)[8]) { out.write(magic, 8); }

void expect_magic(std::istream& in, const char (&magic)[8], const std::string& what) {
    char buf[8] = {};
    in.read(buf, 8);
    if (!in || std::memcmp(buf, magic, 8) != 0) throw SchemaError(what + ": bad magic, not a recognized file");
}

void atomic_write(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot replace " + path + ": " + ec.message());
}

}  // namespace nidsrobust::binio
