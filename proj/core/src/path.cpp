#include "jdqml/path.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "jdqml/errors.hpp"

namespace jdqml {

void PathConfig::validate() const {
  if (n < 1) throw InvalidParameterError("PathConfig: n must be >= 1");
  if (!(h > 0.0)) throw InvalidParameterError("PathConfig: h must be > 0");
  if (substeps < 1) throw InvalidParameterError("PathConfig: substeps must be >= 1");
  if (burn_in_time && !(*burn_in_time >= 0.0))
    throw InvalidParameterError("PathConfig: burn_in_time must be >= 0");
}

namespace {

void append_g17(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

double parse_double(std::string_view field, long line) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw ParseError("path CSV: malformed numeric field at line " + std::to_string(line), line);
  return v;
}

}  // namespace

void write_path_csv(const Path& path, const std::string& filename) {
  std::ofstream out(filename);
  if (!out) throw std::runtime_error("cannot open for writing: " + filename);

  std::string line = "t";
  if (path.dim == 1) {
    line += ",x";
  } else {
    for (int k = 1; k <= path.dim; ++k) line += ",x" + std::to_string(k);
  }
  if (path.jump_marks) line += ",jumps";
  line += '\n';
  out << line;

  const std::size_t d = static_cast<std::size_t>(path.dim);
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    line.clear();
    append_g17(line, path.times[i]);
    for (std::size_t k = 0; k < d; ++k) {
      line += ',';
      append_g17(line, path.values[i * d + k]);
    }
    if (path.jump_marks) {
      line += ',';
      // Jump counts belong to the interval ending at times[i]; row 0 gets 0.
      const std::uint32_t count = (i == 0) ? 0 : (*path.jump_marks)[i - 1];
      line += std::to_string(count);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + filename);
}

Path read_path_csv(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw std::runtime_error("cannot open: " + filename);

  std::string header;
  if (!std::getline(in, header)) throw ParseError("path CSV: empty file", 1);
  if (!header.empty() && header.back() == '\r') header.pop_back();

  std::size_t columns = 1;
  for (char c : header) {
    if (c == ',') ++columns;
  }
  if (columns < 2) throw ParseError("path CSV: expected header t,x[,jumps]", 1);

  const bool has_jumps = header.size() >= 5 && header.substr(header.size() - 5) == "jumps";
  const std::size_t dim = columns - 1 - (has_jumps ? 1 : 0);
  if (dim < 1) throw ParseError("path CSV: no state columns in header", 1);

  Path path;
  path.dim = static_cast<int>(dim);
  std::vector<std::uint32_t> marks;

  std::string row;
  long line_no = 1;
  while (std::getline(in, row)) {
    ++line_no;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    std::size_t field = 0;
    std::size_t pos = 0;
    while (field < columns) {
      const std::size_t comma = row.find(',', pos);
      const bool last = (field + 1 == columns);
      if (last != (comma == std::string::npos))
        throw ParseError("path CSV: wrong field count at line " + std::to_string(line_no),
                         line_no);
      const std::string_view cell =
          std::string_view(row).substr(pos, last ? std::string::npos : comma - pos);
      const double v = parse_double(cell, line_no);
      if (field == 0) {
        path.times.push_back(v);
      } else if (field <= dim) {
        path.values.push_back(v);
      } else {
        if (v < 0.0 || v != static_cast<double>(static_cast<std::uint32_t>(v)))
          throw ParseError("path CSV: jumps must be a nonnegative integer at line " +
                               std::to_string(line_no),
                           line_no);
        marks.push_back(static_cast<std::uint32_t>(v));
      }
      ++field;
      pos = comma + 1;
    }
  }

  if (path.times.empty()) throw ParseError("path CSV: no data rows", line_no);
  if (has_jumps && marks.size() == path.times.size()) {
    marks.erase(marks.begin());  // row 0 carries the placeholder count
    path.jump_marks = std::move(marks);
  } else if (has_jumps) {
    throw ParseError("path CSV: jumps column length mismatch", line_no);
  }
  return path;
}

}  // namespace jdqml
