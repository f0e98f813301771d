#include "dissflow/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "dissflow/error.hpp"
#include "dissflow/transport.hpp"

namespace dissflow {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view field, std::size_t line_no) {
  field = trim(field);
  double v = 0.0;
  // from_chars for double is available in libstdc++ 11.
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw IoError("line " + std::to_string(line_no) + ": cannot parse number '" +
                  std::string(field) + "'");
  }
  return v;
}

struct Table {
  std::vector<std::string_view> header;
  std::vector<std::vector<double>> rows;
};

Table parse_table(std::string_view text) {
  Table t;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string_view line =
        trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    ++line_no;
    if (!line.empty() && line.front() != '#') {
      auto fields = split(line, ',');
      if (t.header.empty()) {
        for (auto& f : fields) t.header.push_back(trim(f));
      } else {
        if (fields.size() != t.header.size()) {
          throw IoError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(t.header.size()) + " fields");
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (auto f : fields) row.push_back(parse_double(f, line_no));
        t.rows.push_back(std::move(row));
      }
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (t.header.empty()) throw IoError("missing CSV header");
  if (t.header.front() != "w") throw IoError("first CSV column must be 'w'");
  return t;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string measure_to_csv(const DiscreteMeasure& mu) {
  std::string out = "w";
  for (std::size_t k = 1; k <= mu.dim(); ++k) out += ",x" + std::to_string(k);
  out += '\n';
  for (std::size_t i = 0; i < mu.size(); ++i) {
    out += format_double(mu.weight(i));
    for (double c : mu.point(i)) out += ',' + format_double(c);
    out += '\n';
  }
  return out;
}

std::string velocity_to_csv(const VelocityMeasure& phi) {
  std::string out = "w";
  for (std::size_t k = 1; k <= phi.dim(); ++k) out += ",x" + std::to_string(k);
  for (std::size_t k = 1; k <= phi.dim(); ++k) out += ",v" + std::to_string(k);
  out += '\n';
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out += format_double(phi.weight(i));
    for (double c : phi.x(i)) out += ',' + format_double(c);
    for (double c : phi.v(i)) out += ',' + format_double(c);
    out += '\n';
  }
  return out;
}

std::string plan_to_csv(const Coupling& plan) {
  std::string out = "i,j,mass\n";
  for (const auto& e : plan.entries()) {
    out += std::to_string(e.row) + ',' + std::to_string(e.col) + ',' + format_double(e.mass) + '\n';
  }
  return out;
}

DiscreteMeasure measure_from_csv(std::string_view text) {
  Table t = parse_table(text);
  const std::size_t dim = t.header.size() - 1;
  if (dim == 0) throw IoError("measure CSV needs at least one coordinate column");
  std::vector<double> coords, weights;
  for (auto& row : t.rows) {
    weights.push_back(row[0]);
    coords.insert(coords.end(), row.begin() + 1, row.end());
  }
  return DiscreteMeasure(dim, std::move(coords), std::move(weights));
}

VelocityMeasure velocity_from_csv(std::string_view text) {
  Table t = parse_table(text);
  const std::size_t cols = t.header.size() - 1;
  if (cols == 0 || cols % 2 != 0) throw IoError("velocity CSV needs 2d coordinate columns");
  const std::size_t dim = cols / 2;
  std::vector<double> xs, vs, weights;
  for (auto& row : t.rows) {
    weights.push_back(row[0]);
    xs.insert(xs.end(), row.begin() + 1, row.begin() + 1 + dim);
    vs.insert(vs.end(), row.begin() + 1 + dim, row.end());
  }
  return VelocityMeasure(dim, std::move(xs), std::move(vs), std::move(weights));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DiscreteMeasure load_measure(const std::filesystem::path& path) {
  return measure_from_csv(read_file(path));
}

VelocityMeasure load_velocity(const std::filesystem::path& path) {
  return velocity_from_csv(read_file(path));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace dissflow
