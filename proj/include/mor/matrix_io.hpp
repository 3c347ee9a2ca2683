#pragma once

#include "mor/types.hpp"

#include <iosfwd>
#include <string>

namespace mor {

// Plain-text coordinate exchange format for dense matrices:
//
//   rows cols
//   i j value        (0-based indices, one entry per line)
//
// Entries that are exactly zero are omitted on write; missing entries read
// back as zero. Values are printed with 17 significant digits so a
// write/read round trip reproduces every double bit-for-bit.
void write_matrix(std::ostream& out, const Matrix& M);
void write_matrix_file(const std::string& path, const Matrix& M);

// Throws std::runtime_error on malformed headers, out-of-range indices or
// trailing garbage.
Matrix read_matrix(std::istream& in);
Matrix read_matrix_file(const std::string& path);

} // namespace mor
