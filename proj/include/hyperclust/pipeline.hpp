#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hyperclust/autoenc.hpp"
#include "hyperclust/data_io.hpp"
#include "hyperclust/graph_build.hpp"
#include "hyperclust/kmeans.hpp"
#include "hyperclust/metrics.hpp"
#include "json.hpp"

namespace hyperclust {

enum class Method : std::uint8_t { Hgcn, Gcn, KMeans, SpectralFeatures, SpectralAdjacency };

inline constexpr Method kAllMethods[] = {Method::Hgcn, Method::Gcn, Method::KMeans, Method::SpectralFeatures,
                                         Method::SpectralAdjacency};

Method parse_method(std::string_view name);
std::string_view to_string(Method method);
bool needs_citations(Method method);

/// Where the (hyper)graph for the convolutional methods comes from.
enum class StructureSource : std::uint8_t {
  Auto,       // gcn: citations when available, else KNN; hgcn: KNN
  Knn,        // built from the feature matrix
  Citations,  // the citation graph (hgcn: one hyperedge per paper and its neighbours)
};

StructureSource parse_structure(std::string_view name);
std::string_view to_string(StructureSource source);

struct RunSpec {
  Method method = Method::Hgcn;
  std::filesystem::path content_path;
  std::filesystem::path cites_path;
  std::string dataset_name;    // empty: stem of the content file
  std::size_t k_clusters = 0;  // 0: 7 for cora, 6 for citeseer, else #classes
  KnnConfig knn;
  TrainConfig train;
  KMeansOptions kmeans;
  std::uint64_t seed = 1;
  StructureSource structure = StructureSource::Auto;
  int threads = 1;

  std::filesystem::path embedding_out;   // optional CSV of the clustered representation
  std::filesystem::path assignment_out;  // optional CSV of cluster ids
};

struct RunOutput {
  nlohmann::json result;
  Labels labels;
  DenseMatrix representation;  // the rows that were clustered and scored
};

std::size_t default_clusters(std::string_view dataset_name, const Dataset& ds);

/// One method end to end on an already loaded dataset.
RunOutput run_pipeline(const RunSpec& spec, const Dataset& ds);

/// Loads the dataset named by `spec`, runs it, and writes optional exports.
RunOutput run(const RunSpec& spec);

struct CompareRow {
  Method method;
  std::string structure;
  std::size_t runs = 0;
  std::optional<double> silhouette;
  std::optional<double> davies_bouldin;
  std::optional<double> calinski_harabasz;
};

struct CompareTable {
  std::string dataset;
  std::size_t k_clusters = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<CompareRow> rows;
  std::vector<nlohmann::json> runs;  // every individual run result, in order
  std::vector<std::string> notes;
};

/// Every method over every seed; rows hold per-method means over the seeds
/// where the metric was defined. `base` supplies dataset paths and settings.
CompareTable compare(const RunSpec& base, const std::vector<std::uint64_t>& seeds,
                     const std::vector<Method>& methods = {std::begin(kAllMethods), std::end(kAllMethods)});

std::string to_markdown(const CompareTable& table);
std::string to_csv(const CompareTable& table);
nlohmann::json to_json(const CompareTable& table);

nlohmann::json to_json(const MetricsReport& report);

}  // namespace hyperclust
