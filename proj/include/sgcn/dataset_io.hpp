#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "sgcn/graph.hpp"
#include "sgcn/linalg.hpp"

namespace sgcn {

struct GraphBundle {
  std::string name;
  Graph graph;
  Matrix features;  // N x F
  std::vector<Index> labels;
  Index num_classes = 0;
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;

  Index num_nodes() const { return graph.num_nodes(); }
  Index num_features() const { return features.cols(); }

  // Throws ValidationError with a distinct kind per violated invariant.
  void validate() const;

  bool operator==(const GraphBundle& other) const;
};

// Directory layout:
//   meta.txt        n=<N>, f=<F>, classes=<C>, name=<name>, one per line
//   graph.txt       "N M", then M lines "u v"
//   features.txt    "N F", then N rows of F reals
//   labels.txt      N lines
//   split_train.txt, split_val.txt, split_test.txt   one index per line
//
// Missing files raise NotFoundError naming the file; grammar and invariant
// violations raise ValidationError carrying the 1-based line number. When
// the bundle name is a known benchmark and its edge count differs from the
// published one, a warning is appended to `warnings` instead of failing.
GraphBundle read_bundle(const std::filesystem::path& dir,
                        std::vector<std::string>* warnings = nullptr);

void write_bundle(const GraphBundle& bundle, const std::filesystem::path& dir);

// Shortest decimal string that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

using CsvCell = std::variant<std::int64_t, double, std::string>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;
};

// LF line endings, '.' decimal separator, shortest round-trip floats.
// Strings containing ',', '"' or newlines are quoted.
void write_csv(const CsvTable& table, const std::filesystem::path& path);
std::string to_csv_string(const CsvTable& table);

// Minimal reader for the files this project writes: cells come back as
// strings, unquoted.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace sgcn
