// hyperclust: graph / hypergraph autoencoder clustering from the command line.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hyperclust/data_io.hpp"
#include "hyperclust/error.hpp"
#include "hyperclust/graph_build.hpp"
#include "hyperclust/metrics.hpp"
#include "hyperclust/parallel.hpp"
#include "hyperclust/pipeline.hpp"

namespace {

using namespace hyperclust;

// Plain `key = value` lines apply to whichever subcommand was invoked, so a
// config file needs no [section] headers.
class SubcommandConfig : public CLI::ConfigINI {
 public:
  explicit SubcommandConfig(const CLI::App& app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigINI::from_config(input);
    const auto active = app_.get_subcommands();
    if (active.empty()) return items;
    for (auto& item : items) {
      if (item.parents.empty()) item.parents.push_back(active.front()->get_name());
    }
    return items;
  }

 private:
  const CLI::App& app_;
};

// String-typed mirror of the RunSpec fields that need parsing.
struct RunFlags {
  std::string method = "hgcn";
  std::string metric = "euclidean";
  std::string optimizer = "adaptive_moments";
  std::string structure = "auto";
  std::string pos_weight = "auto";
  std::string content;
  std::string cites;
};

void add_dataset_options(CLI::App* cmd, RunSpec& spec, RunFlags& flags) {
  cmd->add_option("--content", flags.content, "LINQS .content file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--cites", flags.cites, "LINQS .cites file")->check(CLI::ExistingFile);
  cmd->add_option("--dataset-name", spec.dataset_name, "Name used in reports (default: content file stem)");
}

void add_model_options(CLI::App* cmd, RunSpec& spec, RunFlags& flags) {
  cmd->add_option("--k-clusters", spec.k_clusters, "Clusters (default: 7 cora, 6 citeseer, else #classes)");
  cmd->add_option("--knn", spec.knn.k, "Neighbours per sample for KNN structures")->capture_default_str();
  cmd->add_option("--metric", flags.metric, "KNN distance: euclidean | cosine")->capture_default_str();
  cmd->add_option("--structure", flags.structure, "Graph source for hgcn/gcn: auto | knn | cites")
      ->capture_default_str();
  cmd->add_option("--hidden-dim", spec.train.hidden_dim, "Encoder hidden width")->capture_default_str();
  cmd->add_option("--embed-dim", spec.train.embed_dim, "Embedding dimension")->capture_default_str();
  cmd->add_option("--lr", spec.train.learning_rate, "Learning rate")->capture_default_str();
  cmd->add_option("--epochs", spec.train.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--optimizer", flags.optimizer, "adaptive_moments | plain_gd")->capture_default_str();
  cmd->add_option("--pos-weight", flags.pos_weight, "Positive-pair weight, or 'auto' for #zeros/#ones")
      ->capture_default_str();
  cmd->add_option("--kmeans-n-init", spec.kmeans.n_init, "k-means restarts")->capture_default_str();
  cmd->add_option("--kmeans-max-iter", spec.kmeans.max_iter, "k-means iteration cap")->capture_default_str();
  cmd->add_option("--threads", spec.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

void finish_spec(RunSpec& spec, const RunFlags& flags) {
  spec.method = parse_method(flags.method);
  spec.knn.metric = parse_metric(flags.metric);
  spec.train.optimizer = parse_optimizer(flags.optimizer);
  spec.structure = parse_structure(flags.structure);
  if (flags.pos_weight == "auto") {
    spec.train.pos_weight.reset();
  } else {
    std::size_t used = 0;
    double w = 0.0;
    try {
      w = std::stod(flags.pos_weight, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != flags.pos_weight.size()) throw InvalidInput("--pos-weight must be 'auto' or a number");
    spec.train.pos_weight = w;
  }
  spec.content_path = flags.content;
  spec.cites_path = flags.cites;
  spec.train.validate();
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph and hypergraph autoencoder clustering of citation corpora"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file; flags on the command line take precedence");
  app.config_formatter(std::make_shared<SubcommandConfig>(app));
  app.allow_config_extras(CLI::config_extras_mode::error);

  RunSpec spec;
  RunFlags flags;
  std::string output;

  auto* cluster = app.add_subcommand("cluster", "Run one method and write its result JSON");
  cluster->add_option("--method", flags.method, "hgcn | gcn | kmeans | spectral-features | spectral-adjacency")
      ->capture_default_str();
  add_dataset_options(cluster, spec, flags);
  add_model_options(cluster, spec, flags);
  cluster->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
  cluster->add_option("--output,-o", output, "Result JSON path (default: stdout)");
  std::string embedding_out;
  std::string assignment_out;
  cluster->add_option("--embedding-out", embedding_out, "CSV of the clustered representation");
  cluster->add_option("--assignment-out", assignment_out, "CSV of cluster ids");

  auto* compare_cmd = app.add_subcommand("compare", "Every method over several seeds; mean metrics per method");
  add_dataset_options(compare_cmd, spec, flags);
  add_model_options(compare_cmd, spec, flags);
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<std::string> method_names;
  std::string table_md;
  std::string table_csv;
  compare_cmd->add_option("--seeds", seeds, "Seed list")->capture_default_str()->delimiter(',');
  compare_cmd->add_option("--methods", method_names, "Subset of methods (default: all)")->delimiter(',');
  compare_cmd->add_option("--output,-o", output, "Full comparison JSON (all runs)");
  compare_cmd->add_option("--table", table_md, "Markdown table path (always printed to stdout)");
  compare_cmd->add_option("--csv", table_csv, "CSV table path");

  auto* graph_cmd = app.add_subcommand("build-graph", "Write a graph edge list or hypergraph incidence list");
  std::string kind = "knn-hypergraph";
  add_dataset_options(graph_cmd, spec, flags);
  graph_cmd->add_option("--kind", kind, "knn-graph | knn-hypergraph | citations | citation-hypergraph")
      ->capture_default_str();
  graph_cmd->add_option("--knn", spec.knn.k, "Neighbours per sample")->capture_default_str();
  graph_cmd->add_option("--metric", flags.metric, "euclidean | cosine")->capture_default_str();
  graph_cmd->add_option("--output,-o", output, "Edge list path (default: stdout)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Metrics of a saved embedding and assignment");
  std::string embedding_in;
  std::string assignment_in;
  eval_cmd->add_option("--embedding", embedding_in, "Embedding CSV")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--assignment", assignment_in, "Assignment CSV")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--output,-o", output, "Metrics JSON path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cluster->parsed()) {
      finish_spec(spec, flags);
      spec.embedding_out = embedding_out;
      spec.assignment_out = assignment_out;
      emit(output, dump(run(spec).result));
    } else if (compare_cmd->parsed()) {
      finish_spec(spec, flags);
      std::vector<Method> methods;
      for (const auto& name : method_names) methods.push_back(parse_method(name));
      if (methods.empty()) methods.assign(std::begin(kAllMethods), std::end(kAllMethods));
      const CompareTable table = compare(spec, seeds, methods);
      const std::string md = to_markdown(table);
      std::cout << md;
      if (!table_md.empty()) write_file_atomic(table_md, md);
      if (!table_csv.empty()) write_file_atomic(table_csv, to_csv(table));
      if (!output.empty()) write_file_atomic(output, dump(to_json(table)));
    } else if (graph_cmd->parsed()) {
      spec.knn.metric = parse_metric(flags.metric);
      const Dataset ds = load_dataset(flags.content, flags.cites);
      std::ostringstream out;
      if (kind == "knn-graph") {
        write_edge_list(out, knn_graph(ds.features, spec.knn), EdgeListMode::UpperTriangle);
      } else if (kind == "knn-hypergraph") {
        write_edge_list(out, knn_hypergraph(ds.features, spec.knn).incidence, EdgeListMode::AllEntries);
      } else if (kind == "citations" || kind == "citation-hypergraph") {
        if (!ds.has_citations) throw InvalidInput("--kind " + kind + " needs --cites");
        const SparseMatrix a = edges_to_adjacency(ds.citations.edges, ds.size());
        if (kind == "citations") {
          write_edge_list(out, a, EdgeListMode::UpperTriangle);
        } else {
          write_edge_list(out, hypergraph_from_adjacency(a).incidence, EdgeListMode::AllEntries);
        }
      } else {
        throw InvalidInput("unknown graph kind '" + kind + "'");
      }
      emit(output, out.str());
    } else if (eval_cmd->parsed()) {
      const auto [ids, z] = read_embedding_csv(embedding_in);
      const auto [assigned_ids, labels] = read_assignment_csv(assignment_in);
      if (ids != assigned_ids) throw InvalidInput("embedding and assignment list different ids");
      const MetricsReport report = evaluate_metrics(z, labels);
      nlohmann::json result;
      result["n"] = report.n;
      result["k_clusters"] = report.k;
      result["metrics"] = to_json(report);
      if (!report.notes.empty()) result["metric_notes"] = report.notes;
      emit(output, dump(result));
    }
  } catch (const std::exception& e) {
    std::cerr << "hyperclust: error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
