#include "hyperclust/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <iomanip>
#include <map>
#include <sstream>

#include "hyperclust/error.hpp"
#include "hyperclust/parallel.hpp"
#include "hyperclust/spectral.hpp"

namespace hyperclust {

using nlohmann::json;

Method parse_method(std::string_view name) {
  if (name == "hgcn") return Method::Hgcn;
  if (name == "gcn") return Method::Gcn;
  if (name == "kmeans") return Method::KMeans;
  if (name == "spectral-features") return Method::SpectralFeatures;
  if (name == "spectral-adjacency") return Method::SpectralAdjacency;
  throw InvalidInput("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Hgcn: return "hgcn";
    case Method::Gcn: return "gcn";
    case Method::KMeans: return "kmeans";
    case Method::SpectralFeatures: return "spectral-features";
    case Method::SpectralAdjacency: return "spectral-adjacency";
  }
  return "?";
}

bool needs_citations(Method method) { return method == Method::SpectralAdjacency; }

StructureSource parse_structure(std::string_view name) {
  if (name == "auto") return StructureSource::Auto;
  if (name == "knn") return StructureSource::Knn;
  if (name == "cites" || name == "citations") return StructureSource::Citations;
  throw InvalidInput("unknown structure source '" + std::string(name) + "'");
}

std::string_view to_string(StructureSource source) {
  switch (source) {
    case StructureSource::Auto: return "auto";
    case StructureSource::Knn: return "knn";
    case StructureSource::Citations: return "cites";
  }
  return "?";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string dataset_name_of(const RunSpec& spec) {
  return spec.dataset_name.empty() ? spec.content_path.stem().string() : spec.dataset_name;
}

// The structure a method actually uses once Auto is resolved.
StructureSource resolve_structure(const RunSpec& spec, const Dataset& ds) {
  switch (spec.method) {
    case Method::Gcn:
      if (spec.structure == StructureSource::Auto) {
        return ds.has_citations ? StructureSource::Citations : StructureSource::Knn;
      }
      return spec.structure;
    case Method::Hgcn:
      return spec.structure == StructureSource::Auto ? StructureSource::Knn : spec.structure;
    case Method::SpectralFeatures:
      return StructureSource::Knn;
    case Method::SpectralAdjacency:
      return StructureSource::Citations;
    case Method::KMeans:
      return StructureSource::Auto;
  }
  return StructureSource::Auto;
}

// k-means on raw features uses no graph at all.
std::string structure_label(Method method, StructureSource structure) {
  return method == Method::KMeans ? "none" : std::string(to_string(structure));
}

SparseMatrix citation_adjacency(const Dataset& ds, Method method) {
  if (!ds.has_citations) {
    throw InvalidInput(std::string(to_string(method)) + " with citation structure needs a .cites file");
  }
  return edges_to_adjacency(ds.citations.edges, ds.size());
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json config_echo(const RunSpec& spec, StructureSource structure, const std::string& representation) {
  json cfg;
  cfg["knn_k"] = spec.knn.k;
  cfg["metric"] = std::string(to_string(spec.knn.metric));
  cfg["structure"] = structure_label(spec.method, structure);
  cfg["representation"] = representation;
  cfg["hidden_dim"] = spec.train.hidden_dim;
  cfg["embed_dim"] = spec.train.embed_dim;
  cfg["learning_rate"] = spec.train.learning_rate;
  cfg["epochs"] = spec.train.epochs;
  cfg["optimizer"] = std::string(to_string(spec.train.optimizer));
  cfg["pos_weight"] = spec.train.pos_weight ? json(*spec.train.pos_weight) : json("auto");
  cfg["kmeans_n_init"] = spec.kmeans.n_init;
  cfg["kmeans_max_iter"] = spec.kmeans.max_iter;
  cfg["threads"] = spec.threads;
  return cfg;
}

// cluster -> class -> count, for reporting only.
json contingency(const Dataset& ds, const Labels& labels) {
  std::map<std::int32_t, std::map<std::string, std::size_t>> table;
  for (std::size_t i = 0; i < labels.size(); ++i) ++table[labels[i]][ds.labels[i]];
  json out = json::object();
  for (const auto& [cluster, counts] : table) {
    json row = json::object();
    for (const auto& [cls, count] : counts) row[cls] = count;
    out[std::to_string(cluster)] = row;
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const MetricsReport& report) {
  json m;
  m["silhouette"] = optional_number(report.silhouette);
  m["davies_bouldin"] = optional_number(report.davies_bouldin);
  m["calinski_harabasz"] = optional_number(report.calinski_harabasz);
  return m;
}

std::size_t default_clusters(std::string_view dataset_name, const Dataset& ds) {
  const std::string name = lower(dataset_name);
  if (name.find("citeseer") != std::string::npos) return 6;
  if (name.find("cora") != std::string::npos) return 7;
  return ds.num_classes();
}

RunOutput run_pipeline(const RunSpec& spec, const Dataset& ds) {
  const auto started = std::chrono::steady_clock::now();
  set_num_threads(spec.threads);

  const std::string name = dataset_name_of(spec);
  const std::size_t k = spec.k_clusters ? spec.k_clusters : default_clusters(name, ds);
  const StructureSource structure = resolve_structure(spec, ds);
  const DenseMatrix& x = ds.features;

  TrainConfig train_cfg = spec.train;
  train_cfg.seed = spec.seed;

  RunOutput out;
  json result;
  std::string representation;
  std::optional<TrainResult> trained;

  switch (spec.method) {
    case Method::Hgcn: {
      const Hypergraph hg = structure == StructureSource::Citations
                                ? hypergraph_from_adjacency(citation_adjacency(ds, spec.method))
                                : knn_hypergraph(x, spec.knn);
      trained = train(hypergraph_operator(hg), x, hg.incidence, train_cfg);
      representation = "embedding";
      break;
    }
    case Method::Gcn: {
      const SparseMatrix adjacency = structure == StructureSource::Citations ? citation_adjacency(ds, spec.method)
                                                                             : knn_graph(x, spec.knn);
      trained = train(graph_operator(adjacency), x, add_self_loops(adjacency), train_cfg);
      representation = "embedding";
      break;
    }
    case Method::KMeans:
      out.representation = x;
      representation = "features";
      break;
    case Method::SpectralFeatures:
      out.representation = spectral_embedding(knn_graph(x, spec.knn), k, spec.seed);
      representation = "spectral_rows";
      break;
    case Method::SpectralAdjacency:
      out.representation = spectral_embedding(citation_adjacency(ds, spec.method), k, spec.seed);
      representation = "spectral_rows";
      break;
  }
  if (trained) out.representation = trained->embedding;

  const ClusterAssignment assignment = kmeans(out.representation, k, spec.seed, spec.kmeans);
  out.labels = assignment.labels;
  const MetricsReport metrics = evaluate_metrics(out.representation, out.labels);

  json dataset;
  dataset["name"] = name;
  dataset["content"] = spec.content_path.string();
  dataset["cites"] = spec.cites_path.empty() ? json(nullptr) : json(spec.cites_path.string());
  dataset["features"] = x.cols();
  dataset["classes"] = ds.num_classes();
  if (ds.has_citations) {
    dataset["citation_lines"] = ds.citations.raw_lines;
    dataset["citation_edges"] = ds.citations.edges.size();
    dataset["dangling_citations"] = ds.citations.dangling;
  }

  result["method"] = std::string(to_string(spec.method));
  result["dataset"] = dataset;
  result["n"] = ds.size();
  result["k_clusters"] = k;
  result["seed"] = spec.seed;
  result["config_echo"] = config_echo(spec, structure, representation);
  if (trained) result["config_echo"]["pos_weight_used"] = trained->pos_weight;
  result["metrics"] = to_json(metrics);
  if (!metrics.notes.empty()) result["metric_notes"] = metrics.notes;
  if (trained) result["loss_history"] = trained->loss_history;
  result["kmeans_inertia"] = assignment.inertia;
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : out.labels) ++sizes[static_cast<std::size_t>(l)];
  result["cluster_sizes"] = sizes;
  result["cluster_vs_class"] = contingency(ds, out.labels);
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
  result["runtime_ms"] = elapsed.count();
  out.result = std::move(result);
  return out;
}

RunOutput run(const RunSpec& spec) {
  if (spec.content_path.empty()) throw InvalidInput("a .content file is required");
  if (!std::filesystem::exists(spec.content_path)) {
    throw InvalidInput("content file '" + spec.content_path.string() + "' does not exist");
  }
  if (!spec.cites_path.empty() && !std::filesystem::exists(spec.cites_path)) {
    throw InvalidInput("cites file '" + spec.cites_path.string() + "' does not exist");
  }
  if (needs_citations(spec.method) && spec.cites_path.empty()) {
    throw InvalidInput(std::string(to_string(spec.method)) + " needs a .cites file");
  }
  const Dataset ds = load_dataset(spec.content_path, spec.cites_path);
  RunOutput out = run_pipeline(spec, ds);
  if (!spec.embedding_out.empty()) write_embedding_csv(spec.embedding_out, ds.ids, out.representation);
  if (!spec.assignment_out.empty()) write_assignment_csv(spec.assignment_out, ds.ids, out.labels);
  return out;
}

CompareTable compare(const RunSpec& base, const std::vector<std::uint64_t>& seeds, const std::vector<Method>& methods) {
  if (seeds.empty()) throw InvalidInput("compare needs at least one seed");
  const Dataset ds = load_dataset(base.content_path, base.cites_path);
  CompareTable table;
  table.dataset = dataset_name_of(base);
  table.k_clusters = base.k_clusters ? base.k_clusters : default_clusters(table.dataset, ds);
  table.seeds = seeds;

  for (Method method : methods) {
    if (needs_citations(method) && !ds.has_citations) {
      table.notes.push_back(std::string(to_string(method)) + " skipped: no .cites file");
      continue;
    }
    RunSpec spec = base;
    spec.method = method;
    spec.k_clusters = table.k_clusters;
    CompareRow row;
    row.method = method;
    row.structure = structure_label(method, resolve_structure(spec, ds));
    double sums[3] = {0.0, 0.0, 0.0};
    std::size_t counts[3] = {0, 0, 0};
    for (std::uint64_t seed : seeds) {
      spec.seed = seed;
      RunOutput out = run_pipeline(spec, ds);
      const json& m = out.result["metrics"];
      const char* keys[3] = {"silhouette", "davies_bouldin", "calinski_harabasz"};
      for (int q = 0; q < 3; ++q) {
        if (!m[keys[q]].is_null()) {
          sums[q] += m[keys[q]].get<double>();
          ++counts[q];
        }
      }
      ++row.runs;
      table.runs.push_back(std::move(out.result));
    }
    if (counts[0]) row.silhouette = sums[0] / static_cast<double>(counts[0]);
    if (counts[1]) row.davies_bouldin = sums[1] / static_cast<double>(counts[1]);
    if (counts[2]) row.calinski_harabasz = sums[2] / static_cast<double>(counts[2]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << *v;
  return s.str();
}

}  // namespace

std::string to_markdown(const CompareTable& table) {
  std::ostringstream out;
  out << "Dataset: " << table.dataset << ", k = " << table.k_clusters << ", seeds:";
  for (auto s : table.seeds) out << ' ' << s;
  out << "\n\n| Method | Structure | Silhouette | Davies-Bouldin | Calinski-Harabasz |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& row : table.rows) {
    out << "| " << to_string(row.method) << " | " << row.structure << " | " << cell(row.silhouette) << " | "
        << cell(row.davies_bouldin) << " | " << cell(row.calinski_harabasz) << " |\n";
  }
  for (const auto& note : table.notes) out << "\n_" << note << "_\n";
  return out.str();
}

std::string to_csv(const CompareTable& table) {
  std::ostringstream out;
  out << "method,structure,runs,silhouette,davies_bouldin,calinski_harabasz\n";
  auto num = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& row : table.rows) {
    out << to_string(row.method) << ',' << row.structure << ',' << row.runs << ',' << num(row.silhouette) << ','
        << num(row.davies_bouldin) << ',' << num(row.calinski_harabasz) << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const CompareTable& table) {
  json out;
  out["dataset"] = table.dataset;
  out["k_clusters"] = table.k_clusters;
  out["seeds"] = table.seeds;
  json rows = json::array();
  for (const auto& row : table.rows) {
    rows.push_back({{"method", std::string(to_string(row.method))},
                    {"structure", row.structure},
                    {"runs", row.runs},
                    {"silhouette", optional_number(row.silhouette)},
                    {"davies_bouldin", optional_number(row.davies_bouldin)},
                    {"calinski_harabasz", optional_number(row.calinski_harabasz)}});
  }
  out["rows"] = rows;
  out["runs"] = table.runs;
  out["notes"] = table.notes;
  return out;
}

}  // namespace hyperclust
