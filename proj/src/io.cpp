#include "kronadapt/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace kronadapt {

std::string format_double(double x) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == x || (x != x && back != back)) return buf;
  }
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("write_text_atomic: cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write_text_atomic: write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw Error("write_text_atomic: rename " + tmp + " -> " + path + " failed: " +
                ec.message());
}

void write_matrix(const std::string& path, const Eigen::Ref<const Matrix>& m) {
  std::ostringstream out;
  out << m.rows() << " " << m.cols() << "\n";
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (i) out << " ";
      out << format_double(m(i, j));
    }
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, long line, const std::string& what) {
  std::ostringstream msg;
  msg << path << ":" << line << ": " << what;
  throw ParseError(msg.str());
}

}  // namespace

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ":0: cannot open file");

  std::string text;
  long line = 1;
  Index rows = -1, cols = -1;
  {
    if (!std::getline(in, text)) parse_fail(path, line, "missing 'rows cols' header");
    std::istringstream hdr(text);
    long long r = 0, c = 0;
    if (!(hdr >> r >> c)) parse_fail(path, line, "header must be two integers 'rows cols'");
    std::string extra;
    if (hdr >> extra) parse_fail(path, line, "unexpected token '" + extra + "' after header");
    if (r < 1 || c < 1) parse_fail(path, line, "rows and cols must be >= 1");
    rows = static_cast<Index>(r);
    cols = static_cast<Index>(c);
  }

  Matrix m(rows, cols);
  Index got = 0;
  const Index want = rows * cols;
  while (std::getline(in, text)) {
    ++line;
    std::istringstream ls(text);
    std::string tok;
    while (ls >> tok) {
      if (got == want)
        parse_fail(path, line, "extra value '" + tok + "' beyond rows*cols entries");
      char* end = nullptr;
      double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0' || !std::isfinite(v))
        parse_fail(path, line, "not a finite number: '" + tok + "'");
      m.data()[got++] = v;
    }
  }
  if (got != want) {
    std::ostringstream what;
    what << "expected " << want << " values, file ends after " << got;
    parse_fail(path, line, what.str());
  }
  return m;
}

std::string csv_row(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_double(values[i]);
  }
  out += "\n";
  return out;
}

}  // namespace kronadapt
