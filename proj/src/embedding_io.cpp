#include "lada/embedding_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "binary_io.hpp"
#include "lada/error.hpp"

namespace lada {

namespace {

using detail::put_le;
using Reader = detail::ByteReader<DataError>;

constexpr std::array<char, 8> kMagic = {'L', 'A', 'D', 'A', 'E', 'M', 'B', '1'};

std::optional<int> stored_label(const Dataset& ds, const Sample& s) {
  return s.domain == Domain::Source ? s.label : OracleAccess::peek(ds.oracle, s.id);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

template <typename T>
T parse_number(const std::string& field, std::size_t line, const char* what) {
  std::istringstream in(field);
  T v{};
  in >> v;
  if (in.fail() || !in.eof()) {
    throw DataError("embeddings csv: line " + std::to_string(line) + ": bad " + what + " '" +
                    field + "'");
  }
  return v;
}

double parse_double(const std::string& field, std::size_t line) {
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    throw DataError("embeddings csv: line " + std::to_string(line) + ": bad feature '" + field +
                    "'");
  }
  return v;
}

}  // namespace

void write_embeddings_binary(const Dataset& ds, const std::filesystem::path& path) {
  std::string buf(kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ds.source.size() + ds.target.size()));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ds.dim()));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ds.num_classes()));
  auto emit = [&](const Sample& s) {
    put_le<std::uint64_t>(buf, s.id);
    put_le<std::uint8_t>(buf, static_cast<std::uint8_t>(s.domain));
    put_le<std::int32_t>(buf, stored_label(ds, s).value_or(-1));
    for (double v : s.feature) put_le<double>(buf, v);
  };
  for (const auto& s : ds.source) emit(s);
  for (const auto& s : ds.target) emit(s);
  detail::write_file(path, buf);
}

Dataset load_embeddings_binary(const std::filesystem::path& path) {
  Reader in(detail::read_file(path), "embeddings");
  for (char expected : kMagic) {
    if (in.get<char>("magic") != expected) throw DataError("embeddings: bad magic at offset 0");
  }
  const auto n = in.get<std::uint32_t>("record count");
  const auto d = in.get<std::uint32_t>("dimension");
  const auto C = in.get<std::uint32_t>("class count");
  if (d == 0 || C == 0) throw DataError("embeddings: dimension and class count must be positive");

  Dataset ds(static_cast<int>(d), static_cast<int>(C));
  for (std::uint32_t r = 0; r < n; ++r) {
    const std::size_t at = in.offset();
    const auto id = in.get<std::uint64_t>("id");
    const auto domain = in.get<std::uint8_t>("domain");
    const auto label = in.get<std::int32_t>("label");
    std::vector<double> feature(d);
    for (double& v : feature) v = in.get<double>("feature");
    if (domain > 1) {
      throw DataError("embeddings: bad domain byte in record at offset " + std::to_string(at));
    }
    if (label < -1 || label >= static_cast<std::int32_t>(C)) {
      throw DataError("embeddings: label out of range in record at offset " + std::to_string(at));
    }
    std::optional<int> y = label >= 0 ? std::optional<int>(label) : std::nullopt;
    if (domain == 0) {
      if (!y) throw DataError("embeddings: unlabeled source record at offset " + std::to_string(at));
      ds.add_source(id, std::move(feature), *y);
    } else {
      ds.add_target(id, std::move(feature), y);
    }
  }
  if (!in.at_end()) {
    throw DataError("embeddings: trailing bytes at offset " + std::to_string(in.offset()));
  }
  ds.validate();
  return ds;
}

void write_embeddings_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::string out = "id,domain,label";
  for (int j = 0; j < ds.dim(); ++j) out += ",f" + std::to_string(j);
  out += '\n';
  auto emit = [&](const Sample& s) {
    out += std::to_string(s.id);
    out += ',';
    out += domain_name(s.domain);
    out += ',';
    out += std::to_string(stored_label(ds, s).value_or(-1));
    for (double v : s.feature) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  };
  for (const auto& s : ds.source) emit(s);
  for (const auto& s : ds.target) emit(s);
  detail::write_file(path, out);
}

Dataset load_embeddings_csv(const std::filesystem::path& path, int num_classes) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw DataError("embeddings csv: line 1: missing header");
  const auto header = split(line);
  if (header.size() < 4 || header[0] != "id" || header[1] != "domain" || header[2] != "label") {
    throw DataError("embeddings csv: line 1: header must start with id,domain,label,f0");
  }
  const std::size_t d = header.size() - 3;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[3 + j] != "f" + std::to_string(j)) {
      throw DataError("embeddings csv: line 1: expected column f" + std::to_string(j));
    }
  }

  struct Row {
    Id id;
    Domain domain;
    int label;
    std::vector<double> feature;
    std::size_t line;
  };
  std::vector<Row> rows;
  int max_label = -1;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (f.size() != header.size()) {
      throw DataError("embeddings csv: line " + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    }
    Row row{parse_number<Id>(f[0], lineno, "id"), Domain::Source,
            parse_number<int>(f[2], lineno, "label"), {}, lineno};
    if (f[1] == "source") {
      row.domain = Domain::Source;
    } else if (f[1] == "target") {
      row.domain = Domain::Target;
    } else {
      throw DataError("embeddings csv: line " + std::to_string(lineno) + ": bad domain '" + f[1] +
                      "'");
    }
    if (row.label < -1) {
      throw DataError("embeddings csv: line " + std::to_string(lineno) + ": label out of range");
    }
    row.feature.reserve(d);
    for (std::size_t j = 0; j < d; ++j) row.feature.push_back(parse_double(f[3 + j], lineno));
    max_label = std::max(max_label, row.label);
    rows.push_back(std::move(row));
  }

  const int C = num_classes > 0 ? num_classes : max_label + 1;
  if (C <= 0) throw DataError("embeddings csv: no labels to infer the class count from");
  Dataset ds(static_cast<int>(d), C);
  for (auto& r : rows) {
    if (r.label >= C) {
      throw DataError("embeddings csv: line " + std::to_string(r.line) + ": label out of range");
    }
    if (r.domain == Domain::Source) {
      if (r.label < 0) {
        throw DataError("embeddings csv: line " + std::to_string(r.line) + ": unlabeled source row");
      }
      ds.add_source(r.id, std::move(r.feature), r.label);
    } else {
      ds.add_target(r.id, std::move(r.feature),
                    r.label >= 0 ? std::optional<int>(r.label) : std::nullopt);
    }
  }
  ds.validate();
  return ds;
}

void write_embeddings(const Dataset& ds, const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    write_embeddings_csv(ds, path);
  } else {
    write_embeddings_binary(ds, path);
  }
}

Dataset load_embeddings(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? load_embeddings_csv(path) : load_embeddings_binary(path);
}

}  // namespace lada
