#ifndef KRONADAPT_IO_HPP
#define KRONADAPT_IO_HPP

#include <string>
#include <vector>

#include "kronadapt/types.hpp"

namespace kronadapt {

// Shortest representation that parses back to the identical double.
std::string format_double(double x);

// Writes to "<path>.tmp" in the same directory, then renames over path, so a
// crash never leaves a half-written artifact behind.
void write_text_atomic(const std::string& path, const std::string& content);

// Plain text matrix format: a "rows cols" header line, then the entries in
// column-major order separated by whitespace (one column per line on write).
void write_matrix(const std::string& path, const Eigen::Ref<const Matrix>& m);

// Throws ParseError with "<path>:<line>: ..." on any malformed input.
Matrix read_matrix(const std::string& path);

// One CSV row; values are rendered with format_double.
std::string csv_row(const std::vector<double>& values);

}  // namespace kronadapt

#endif
