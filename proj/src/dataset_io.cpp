#include "sgcn/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "sgcn/errors.hpp"

namespace sgcn {

namespace fs = std::filesystem;

void GraphBundle::validate() const {
  const Index n = num_nodes();
  if (features.rows() != n) {
    throw ValidationError(ValidationKind::Shape, "features have " +
                                                     std::to_string(features.rows()) +
                                                     " rows, graph has " + std::to_string(n));
  }
  if (static_cast<Index>(labels.size()) != n) {
    throw ValidationError(ValidationKind::Shape, "labels length " + std::to_string(labels.size()) +
                                                     " differs from N = " + std::to_string(n));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw ValidationError(ValidationKind::LabelOutOfRange,
                            "label " + std::to_string(labels[i]) + " of node " + std::to_string(i) +
                                " outside [0, " + std::to_string(num_classes) + ")",
                            static_cast<long>(i) + 1);
    }
  }
  std::vector<char> owner(static_cast<std::size_t>(n), 0);
  const std::array<std::pair<const std::vector<Index>*, const char*>, 3> splits{
      {{&train, "train"}, {&val, "val"}, {&test, "test"}}};
  for (const auto& [split, split_name] : splits) {
    for (std::size_t line = 0; line < split->size(); ++line) {
      const Index i = (*split)[line];
      if (i < 0 || i >= n) {
        throw ValidationError(ValidationKind::SplitOutOfRange,
                              std::string(split_name) + " index " + std::to_string(i) +
                                  " outside [0, " + std::to_string(n) + ")",
                              static_cast<long>(line) + 1);
      }
      if (owner[i]) {
        throw ValidationError(ValidationKind::OverlappingSplits,
                              "node " + std::to_string(i) + " appears twice across splits (" +
                                  split_name + ")",
                              static_cast<long>(line) + 1);
      }
      owner[i] = 1;
    }
  }
}

bool GraphBundle::operator==(const GraphBundle& o) const {
  return name == o.name && graph == o.graph && features.rows() == o.features.rows() &&
         features.cols() == o.features.cols() && features == o.features && labels == o.labels &&
         num_classes == o.num_classes && train == o.train && val == o.val && test == o.test;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw IoError("format_double: conversion failed");
  return std::string(buf.data(), end);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw ValidationError(ValidationKind::Parse, "not a number: '" + std::string(text) + "'");
  return value;
}

namespace {

constexpr std::array<std::pair<std::string_view, Index>, 3> kPublishedEdges{
    {{"cora", 5429}, {"citeseer", 4732}, {"pubmed", 44338}}};

class LineReader {
 public:
  explicit LineReader(const fs::path& path) : path_(path), in_(path) {
    if (!fs::exists(path)) throw NotFoundError("missing bundle file: " + path.string(), path.string());
    if (!in_) throw IoError("cannot open " + path.string());
  }

  // Next non-empty line split on whitespace; false at end of file.
  bool next(std::vector<std::string_view>& tokens) {
    while (std::getline(in_, line_)) {
      ++number_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      tokens.clear();
      std::size_t pos = 0;
      while (pos < line_.size()) {
        while (pos < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos]))) ++pos;
        const std::size_t start = pos;
        while (pos < line_.size() && !std::isspace(static_cast<unsigned char>(line_[pos]))) ++pos;
        if (pos > start) tokens.emplace_back(line_.data() + start, pos - start);
      }
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(ValidationKind kind, const std::string& what) const {
    throw ValidationError(kind, path_.filename().string() + ":" + std::to_string(number_) + ": " +
                                    what,
                          number_);
  }

  Index integer(std::string_view tok) const {
    Index v = 0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || end != tok.data() + tok.size())
      fail(ValidationKind::Parse, "expected an integer, got '" + std::string(tok) + "'");
    return v;
  }

  double real(std::string_view tok) const {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || end != tok.data() + tok.size())
      fail(ValidationKind::Parse, "expected a real number, got '" + std::string(tok) + "'");
    return v;
  }

  long line() const { return number_; }

 private:
  fs::path path_;
  std::ifstream in_;
  std::string line_;
  long number_ = 0;
};

std::vector<Index> read_index_list(const fs::path& path, Index n, ValidationKind range_kind) {
  LineReader r(path);
  std::vector<Index> out;
  std::vector<std::string_view> tok;
  while (r.next(tok)) {
    if (tok.size() != 1) r.fail(ValidationKind::Parse, "expected one index per line");
    const Index i = r.integer(tok[0]);
    if (i < 0 || i >= n)
      r.fail(range_kind, "index " + std::to_string(i) + " outside [0, " + std::to_string(n) + ")");
    out.push_back(i);
  }
  return out;
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

GraphBundle read_bundle(const fs::path& dir, std::vector<std::string>* warnings) {
  if (!fs::is_directory(dir)) throw NotFoundError("bundle directory not found: " + dir.string(), dir.string());
  std::vector<std::string_view> tok;

  std::map<std::string, std::string> meta;
  {
    LineReader r(dir / "meta.txt");
    while (r.next(tok)) {
      const std::string_view whole(tok.front().data(),
                                   static_cast<std::size_t>(tok.back().data() + tok.back().size() -
                                                            tok.front().data()));
      const auto eq = whole.find('=');
      if (eq == std::string_view::npos) r.fail(ValidationKind::Parse, "expected key=value");
      meta[std::string(whole.substr(0, eq))] = std::string(whole.substr(eq + 1));
    }
    for (const char* key : {"n", "f", "classes", "name"})
      if (!meta.contains(key)) r.fail(ValidationKind::Parse, std::string("missing key '") + key + "'");
  }
  const auto meta_int = [&](const std::string& key) {
    Index v = 0;
    const std::string& s = meta[key];
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || v < 0)
      throw ValidationError(ValidationKind::Parse, "meta.txt: bad value for " + key);
    return v;
  };

  GraphBundle b;
  b.name = meta["name"];
  const Index n = meta_int("n");
  const Index f = meta_int("f");
  b.num_classes = meta_int("classes");

  {
    LineReader r(dir / "graph.txt");
    if (!r.next(tok) || tok.size() != 2) r.fail(ValidationKind::Parse, "expected header 'N M'");
    if (r.integer(tok[0]) != n) r.fail(ValidationKind::Shape, "node count disagrees with meta.txt");
    const Index m = r.integer(tok[1]);
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(std::max<Index>(m, 0)));
    while (r.next(tok)) {
      if (tok.size() != 2) r.fail(ValidationKind::Parse, "expected 'u v'");
      const Index u = r.integer(tok[0]);
      const Index v = r.integer(tok[1]);
      if (u < 0 || u >= n || v < 0 || v >= n)
        r.fail(ValidationKind::EdgeOutOfRange, "edge endpoint outside [0, " + std::to_string(n) + ")");
      edges.emplace_back(u, v);
    }
    if (static_cast<Index>(edges.size()) != m)
      r.fail(ValidationKind::Shape, "header announces " + std::to_string(m) + " edges, found " +
                                        std::to_string(edges.size()));
    b.graph = Graph::from_edge_list(n, edges);
  }

  {
    LineReader r(dir / "features.txt");
    if (!r.next(tok) || tok.size() != 2) r.fail(ValidationKind::Parse, "expected header 'N F'");
    if (r.integer(tok[0]) != n || r.integer(tok[1]) != f)
      r.fail(ValidationKind::Shape, "feature header disagrees with meta.txt");
    b.features.resize(n, f);
    Index row = 0;
    while (r.next(tok)) {
      if (row >= n) r.fail(ValidationKind::Shape, "more than N feature rows");
      if (static_cast<Index>(tok.size()) != f)
        r.fail(ValidationKind::Shape, "expected " + std::to_string(f) + " values");
      for (Index j = 0; j < f; ++j) b.features(row, j) = r.real(tok[j]);
      ++row;
    }
    if (row != n) r.fail(ValidationKind::Shape, "expected " + std::to_string(n) + " feature rows");
  }

  {
    LineReader r(dir / "labels.txt");
    while (r.next(tok)) {
      if (tok.size() != 1) r.fail(ValidationKind::Parse, "expected one label per line");
      const Index y = r.integer(tok[0]);
      if (y < 0 || y >= b.num_classes)
        r.fail(ValidationKind::LabelOutOfRange,
               "label " + std::to_string(y) + " outside [0, " + std::to_string(b.num_classes) + ")");
      b.labels.push_back(y);
    }
    if (static_cast<Index>(b.labels.size()) != n)
      r.fail(ValidationKind::Shape, "expected " + std::to_string(n) + " labels");
  }

  b.train = read_index_list(dir / "split_train.txt", n, ValidationKind::SplitOutOfRange);
  b.val = read_index_list(dir / "split_val.txt", n, ValidationKind::SplitOutOfRange);
  b.test = read_index_list(dir / "split_test.txt", n, ValidationKind::SplitOutOfRange);
  b.validate();

  if (warnings) {
    for (const auto& [known, edges] : kPublishedEdges) {
      if (b.name == known && b.graph.num_edges() != edges) {
        warnings->push_back(b.name + ": " + std::to_string(b.graph.num_edges()) +
                            " edges after deduplication, published count is " +
                            std::to_string(edges));
      }
    }
  }
  return b;
}

void write_bundle(const GraphBundle& b, const fs::path& dir) {
  b.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  {
    const auto path = dir / "meta.txt";
    auto out = open_for_write(path);
    out << "n=" << b.num_nodes() << '\n'
        << "f=" << b.num_features() << '\n'
        << "classes=" << b.num_classes << '\n'
        << "name=" << b.name << '\n';
    finish(out, path);
  }
  {
    const auto path = dir / "graph.txt";
    auto out = open_for_write(path);
    out << b.num_nodes() << ' ' << b.graph.num_edges() << '\n';
    for (const auto& [u, v] : b.graph.edges()) out << u << ' ' << v << '\n';
    finish(out, path);
  }
  {
    const auto path = dir / "features.txt";
    auto out = open_for_write(path);
    out << b.features.rows() << ' ' << b.features.cols() << '\n';
    std::string line;
    for (Index i = 0; i < b.features.rows(); ++i) {
      line.clear();
      for (Index j = 0; j < b.features.cols(); ++j) {
        if (j) line += ' ';
        line += format_double(b.features(i, j));
      }
      line += '\n';
      out << line;
    }
    finish(out, path);
  }
  const auto write_list = [&](const char* file, const std::vector<Index>& values) {
    const auto path = dir / file;
    auto out = open_for_write(path);
    for (Index v : values) out << v << '\n';
    finish(out, path);
  };
  write_list("labels.txt", b.labels);
  write_list("split_train.txt", b.train);
  write_list("split_val.txt", b.val);
  write_list("split_test.txt", b.test);
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

std::string cell_text(const CsvCell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, double>) return format_double(v);
        else return csv_escape(v);
      },
      cell);
}

}  // namespace

std::string to_csv_string(const CsvTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out += ',';
    out += csv_escape(table.header[c]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += cell_text(row[c]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const CsvTable& table, const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  auto out = open_for_write(path);
  out << to_csv_string(table);
  finish(out, path);
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string(), path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  CsvTable table;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  const auto end_row = [&] {
    row.push_back(std::move(cell));
    cell.clear();
    if (table.header.empty() && table.rows.empty() && !any) {
      table.header = std::move(row);
      any = true;
    } else {
      std::vector<CsvCell> cells(row.begin(), row.end());
      table.rows.push_back(std::move(cells));
    }
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      end_row();
    } else if (c != '\r') {
      cell += c;
    }
  }
  if (!cell.empty() || !row.empty()) end_row();
  return table;
}

}  // namespace sgcn
