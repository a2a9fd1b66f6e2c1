#pragma once

// Little-endian flat-file primitives shared by the model and bundle formats.

#include "nidsrobust/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nidsrobust::binio {

void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_string(std::ostream& out, const std::string& s);
void write_strings(std::ostream& out, const std::vector<std::string>& v);
/// Shape then row-major payload.
void write_matrix(std::ostream& out, const Matrix& m);
void write_vector(std::ostream& out, const Vector& v);
void write_ints(std::ostream& out, const std::vector<int>& v);

std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in);
std::vector<std::string> read_strings(std::istream& in);
Matrix read_matrix(std::istream& in);
Vector read_vector(std::istream& in);
std::vector<int> read_ints(std::istream& in);

void write_magic(std::ostream& out, const char (&magic)[8]);
/// Throws SchemaError when the next 8 bytes differ from `magic`.
void expect_magic(std::istream& in, const char (&magic)[8], const std::string& what);

/// Writes to a sibling temp file and renames over `path`.
void atomic_write(const std::string& path, const std::string& contents);

}  // namespace nidsrobust::binio
