#include "hyperclust/data_io.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>
#include <system_error>

#include "hyperclust/error.hpp"

namespace hyperclust {

namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::string_view trim_cr(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  return line;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char ch) { return ch == ' ' || ch == '\t'; });
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("invalid number '" + std::string(tok) + "'", line);
  }
  return v;
}

}  // namespace

std::unordered_map<std::string, std::size_t> Dataset::id_index() const {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
  return index;
}

std::size_t Dataset::num_classes() const {
  return std::set<std::string>(labels.begin(), labels.end()).size();
}

Dataset load_content(const fs::path& path) {
  std::ifstream in = open_input(path);
  Dataset ds;
  std::vector<double> values;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t width = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim_cr(raw);
    if (is_blank(line)) continue;
    const auto tokens = split(line, '\t');
    if (tokens.size() < 3) throw ParseError("content line needs an id, features and a class", line_no);
    const std::size_t features = tokens.size() - 2;
    if (ds.ids.empty()) {
      width = features;
    } else if (features != width) {
      throw ParseError("expected " + std::to_string(width) + " features, found " + std::to_string(features),
                       line_no);
    }
    std::string id(tokens.front());
    if (!seen.emplace(id, ds.ids.size()).second) throw ParseError("duplicate paper id '" + id + "'", line_no);
    for (std::size_t f = 1; f + 1 < tokens.size(); ++f) {
      const std::string_view tok = tokens[f];
      if (tok == "0") {
        values.push_back(0.0);
      } else if (tok == "1") {
        values.push_back(1.0);
      } else {
        throw ParseError("non-binary feature token '" + std::string(tok) + "'", line_no);
      }
    }
    ds.ids.push_back(std::move(id));
    ds.labels.emplace_back(tokens.back());
  }
  if (ds.ids.empty()) throw ParseError("content file '" + path.string() + "' has no rows", 0);
  ds.features = DenseMatrix(ds.ids.size(), width, std::move(values));
  return ds;
}

CitationEdges load_cites(const fs::path& path, const std::unordered_map<std::string, std::size_t>& id_index) {
  std::ifstream in = open_input(path);
  CitationEdges out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim_cr(raw);
    if (is_blank(line)) continue;
    const auto tokens = split_whitespace(line);
    if (tokens.size() != 2) throw ParseError("citation line needs exactly two ids", line_no);
    ++out.raw_lines;
    const auto cited = id_index.find(std::string(tokens[0]));
    const auto citing = id_index.find(std::string(tokens[1]));
    if (cited == id_index.end() || citing == id_index.end()) {
      ++out.dangling;
      continue;
    }
    if (cited->second == citing->second) {
      ++out.self_citations;
      continue;
    }
    out.edges.emplace_back(std::min(cited->second, citing->second), std::max(cited->second, citing->second));
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
  return out;
}

Dataset load_dataset(const fs::path& content, const fs::path& cites) {
  Dataset ds = load_content(content);
  if (!cites.empty()) {
    ds.citations = load_cites(cites, ds.id_index());
    ds.has_citations = true;
  }
  return ds;
}

SparseMatrix edges_to_adjacency(const std::vector<Edge>& edges, std::size_t n) {
  std::vector<Triplet> triplets;
  triplets.reserve(2 * edges.size());
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) {
      throw InvalidInput("edge (" + std::to_string(i) + "," + std::to_string(j) + ") outside " +
                         std::to_string(n) + " vertices");
    }
    if (i == j) continue;
    triplets.push_back({i, j, 1.0});
    triplets.push_back({j, i, 1.0});
  }
  SparseMatrix summed = SparseMatrix::from_triplets(n, n, std::move(triplets));
  std::vector<double> ones(summed.nnz(), 1.0);
  return SparseMatrix(n, n, {summed.row_offsets().begin(), summed.row_offsets().end()},
                      {summed.col_indices().begin(), summed.col_indices().end()}, std::move(ones));
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error("cannot format floating-point value");
  return std::string(buf, ptr);
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

void write_embedding_csv(const fs::path& path, const std::vector<std::string>& ids, const DenseMatrix& z) {
  if (ids.size() != z.rows()) throw ShapeError("embedding rows and ids differ in count");
  std::ostringstream out;
  out << "id";
  for (std::size_t c = 0; c < z.cols(); ++c) out << ",z" << c;
  out << '\n';
  for (std::size_t r = 0; r < z.rows(); ++r) {
    out << ids[r];
    for (double v : z.row(r)) out << ',' << format_double(v);
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

std::pair<std::vector<std::string>, DenseMatrix> read_embedding_csv(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::string raw;
  if (!std::getline(in, raw)) throw ParseError("embedding CSV is empty", 1);
  const auto header = split(trim_cr(raw), ',');
  if (header.empty() || header[0] != "id") throw ParseError("embedding CSV header must start with 'id'", 1);
  const std::size_t width = header.size() - 1;
  for (std::size_t c = 0; c < width; ++c) {
    if (header[c + 1] != "z" + std::to_string(c)) throw ParseError("unexpected embedding column name", 1);
  }
  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim_cr(raw);
    if (line.empty()) continue;
    const auto tokens = split(line, ',');
    if (tokens.size() != width + 1) throw ParseError("wrong number of embedding columns", line_no);
    ids.emplace_back(tokens[0]);
    for (std::size_t c = 1; c < tokens.size(); ++c) values.push_back(parse_double(tokens[c], line_no));
  }
  const std::size_t rows = ids.size();
  return {std::move(ids), DenseMatrix(rows, width, std::move(values))};
}

void write_assignment_csv(const fs::path& path, const std::vector<std::string>& ids, const Labels& labels) {
  if (ids.size() != labels.size()) throw ShapeError("assignment labels and ids differ in count");
  std::ostringstream out;
  out << "id,cluster\n";
  for (std::size_t r = 0; r < ids.size(); ++r) out << ids[r] << ',' << labels[r] << '\n';
  write_file_atomic(path, out.str());
}

std::pair<std::vector<std::string>, Labels> read_assignment_csv(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::string raw;
  if (!std::getline(in, raw) || trim_cr(raw) != "id,cluster") {
    throw ParseError("assignment CSV header must be 'id,cluster'", 1);
  }
  std::vector<std::string> ids;
  Labels labels;
  std::size_t line_no = 1;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim_cr(raw);
    if (line.empty()) continue;
    const auto tokens = split(line, ',');
    if (tokens.size() != 2) throw ParseError("assignment row needs id and cluster", line_no);
    std::int32_t label = 0;
    const auto [ptr, ec] = std::from_chars(tokens[1].data(), tokens[1].data() + tokens[1].size(), label);
    if (ec != std::errc() || ptr != tokens[1].data() + tokens[1].size() || label < 0) {
      throw ParseError("invalid cluster id '" + std::string(tokens[1]) + "'", line_no);
    }
    ids.emplace_back(tokens[0]);
    labels.push_back(label);
  }
  return {std::move(ids), std::move(labels)};
}

}  // namespace hyperclust
