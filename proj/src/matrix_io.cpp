#include "mor/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mor {

namespace {

std::string format_entry(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

} // namespace

void write_matrix(std::ostream& out, const Matrix& M) {
    out << M.rows() << " " << M.cols() << "\n";
    for (Index i = 0; i < M.rows(); ++i)
        for (Index j = 0; j < M.cols(); ++j)
            if (M(i, j) != 0.0)
                out << i << " " << j << " " << format_entry(M(i, j)) << "\n";
}

void write_matrix_file(const std::string& path, const Matrix& M) {
    std::ofstream out(path, std::ios::binary); // binary keeps LF endings
    if (!out) throw std::runtime_error("write_matrix_file: cannot open " + path);
    write_matrix(out, M);
    if (!out) throw std::runtime_error("write_matrix_file: write failed for " + path);
}

Matrix read_matrix(std::istream& in) {
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("read_matrix: missing header line");
    std::istringstream hs(header);
    long rows = -1, cols = -1;
    std::string extra;
    if (!(hs >> rows >> cols) || (hs >> extra))
        throw std::runtime_error("read_matrix: header must be 'rows cols'");
    if (rows < 1 || cols < 1)
        throw std::runtime_error("read_matrix: dimensions must be positive");

    Matrix M = Matrix::Zero(rows, cols);
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        long i, j;
        double value;
        if (!(ls >> i)) continue; // blank line
        if (!(ls >> j >> value) || (ls >> extra))
            throw std::runtime_error("read_matrix: malformed entry at line "
                                     + std::to_string(lineno));
        if (i < 0 || i >= rows || j < 0 || j >= cols)
            throw std::runtime_error("read_matrix: index out of range at line "
                                     + std::to_string(lineno));
        M(i, j) = value;
    }
    return M;
}

Matrix read_matrix_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_matrix_file: cannot open " + path);
    return read_matrix(in);
}

} // namespace mor
