#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hyperclust/kmeans.hpp"
#include "hyperclust/tensor.hpp"

namespace hyperclust {

using Edge = std::pair<std::size_t, std::size_t>;

/// Citation links resolved against a content file.
struct CitationEdges {
  std::vector<Edge> edges;          // undirected, i < j, sorted, unique
  std::size_t raw_lines = 0;        // non-blank lines read
  std::size_t dangling = 0;         // lines naming an id absent from the content file
  std::size_t self_citations = 0;   // lines whose two ids coincide
};

/// A LINQS-style citation corpus (`.content` + optional `.cites`).
struct Dataset {
  std::vector<std::string> ids;
  DenseMatrix features;             // n x L1, binary
  std::vector<std::string> labels;  // class names, reporting only
  CitationEdges citations;
  bool has_citations = false;

  std::size_t size() const { return ids.size(); }
  std::unordered_map<std::string, std::size_t> id_index() const;
  std::size_t num_classes() const;
};

/// Parse `<id>\t<w_1>...\t<w_L1>\t<class>` lines. L1 is fixed by the first
/// line. Throws ParseError (with line number) on ragged rows, non-binary
/// tokens, or duplicate ids.
Dataset load_content(const std::filesystem::path& path);

/// Parse `<cited>\t<citing>` lines into undirected index pairs. Ids missing
/// from `id_index` are counted and skipped.
CitationEdges load_cites(const std::filesystem::path& path,
                         const std::unordered_map<std::string, std::size_t>& id_index);

/// Content plus, when `cites` is non-empty, its citation graph.
Dataset load_dataset(const std::filesystem::path& content, const std::filesystem::path& cites = {});

/// Symmetric binary adjacency. Self pairs are dropped.
SparseMatrix edges_to_adjacency(const std::vector<Edge>& edges, std::size_t n);

/// 17 significant digits, enough to read back the identical double.
std::string format_double(double v);

/// CSV `id,z0,...,z{D-1}`.
void write_embedding_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                         const DenseMatrix& z);
std::pair<std::vector<std::string>, DenseMatrix> read_embedding_csv(const std::filesystem::path& path);

/// CSV `id,cluster`.
void write_assignment_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                          const Labels& labels);
std::pair<std::vector<std::string>, Labels> read_assignment_csv(const std::filesystem::path& path);

/// Write through a temporary sibling file and rename into place, so a
/// reader never sees a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace hyperclust
