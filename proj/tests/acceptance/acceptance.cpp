// Acceptance gate. Prints one PASS/FAIL line per criterion.
//
//   hyperclust_acceptance [--group core|datasets|all]
//
// The dataset group needs the LINQS Cora and Citeseer files; see README for
// where they are looked up. When they are absent those criteria report FAIL
// and the process exits with kMissingData so ctest can show them as not run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hyperclust/autoenc.hpp"
#include "hyperclust/data_io.hpp"
#include "hyperclust/graph_build.hpp"
#include "hyperclust/kmeans.hpp"
#include "hyperclust/metrics.hpp"
#include "hyperclust/pipeline.hpp"
#include "hyperclust/spectral.hpp"
#include "support/generators.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

namespace fs = std::filesystem;
using namespace hyperclust;

namespace {

constexpr int kMissingData = 77;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool missing_data = false;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// Every loss history seen by any criterion, for criterion 9.
struct LossLedger {
  std::size_t runs = 0;
  std::size_t decreasing = 0;
  void add(const std::vector<double>& history) {
    ++runs;
    if (!history.empty() && history.back() < history.front()) ++decreasing;
  }
  void add(const nlohmann::json& result) {
    if (result.contains("loss_history")) add(result["loss_history"].get<std::vector<double>>());
  }
};

LossLedger g_losses;

// ---- dataset location -------------------------------------------------------

struct CorpusFiles {
  fs::path content;
  fs::path cites;
};

std::optional<CorpusFiles> find_corpus(const std::string& name, std::string& searched) {
  std::vector<fs::path> dirs;
  std::string upper = name;
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (const char* d = std::getenv(("HYPERCLUST_" + upper + "_DIR").c_str())) dirs.emplace_back(d);
  if (const char* d = std::getenv("HYPERCLUST_DATA_DIR")) dirs.emplace_back(fs::path(d) / name);
  dirs.emplace_back(fs::path("data") / name);
  for (const auto& dir : dirs) {
    searched += (searched.empty() ? "" : ", ") + dir.string();
    CorpusFiles f{dir / (name + ".content"), dir / (name + ".cites")};
    if (fs::exists(f.content) && fs::exists(f.cites)) return f;
  }
  return std::nullopt;
}

Outcome missing(const std::string& name, const std::string& searched) {
  return {false, name + " dataset files not found (looked in " + searched + ")", true};
}

// ---- criteria 1 and 2 -------------------------------------------------------

struct MethodMeans {
  double silhouette = NAN;
  double davies_bouldin = NAN;
  double calinski_harabasz = NAN;
};

Outcome ordinal(const std::string& name, std::size_t k, bool check_ch) {
  std::string searched;
  const auto files = find_corpus(name, searched);
  if (!files) return missing(name, searched);
  const auto start = Clock::now();
  RunSpec base;
  base.content_path = files->content;
  base.cites_path = files->cites;
  base.dataset_name = name;
  base.k_clusters = k;
  base.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto table = compare(base, {1, 2, 3, 4, 5}, {Method::Hgcn, Method::Gcn, Method::KMeans});
  for (const auto& run : table.runs) g_losses.add(run);
  MethodMeans m[3];
  for (std::size_t i = 0; i < 3 && i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    m[i] = {row.silhouette.value_or(NAN), row.davies_bouldin.value_or(NAN), row.calinski_harabasz.value_or(NAN)};
  }
  const auto& [hg, gc, km] = m;
  bool pass = hg.silhouette > gc.silhouette && gc.silhouette > km.silhouette &&
              hg.davies_bouldin < gc.davies_bouldin && gc.davies_bouldin < km.davies_bouldin;
  if (check_ch) pass = pass && hg.calinski_harabasz > gc.calinski_harabasz;
  std::string detail = "silhouette hgcn/gcn/kmeans " + fmt(hg.silhouette) + "/" + fmt(gc.silhouette) + "/" +
                       fmt(km.silhouette) + ", DB " + fmt(hg.davies_bouldin) + "/" + fmt(gc.davies_bouldin) + "/" +
                       fmt(km.davies_bouldin);
  if (check_ch) detail += ", CH hgcn/gcn " + fmt(hg.calinski_harabasz, 6) + "/" + fmt(gc.calinski_harabasz, 6);
  detail += ", gcn structure " + table.rows[1].structure + ", " + fmt(seconds_since(start), 3) + " s";
  return {pass, detail};
}

Outcome criterion_1() { return ordinal("citeseer", 6, false); }
Outcome criterion_2() { return ordinal("cora", 7, true); }

// ---- criterion 3 ------------------------------------------------------------

Outcome criterion_3() {
  const auto start = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  for (int i = 0; i < 20; ++i) {
    const auto inst = gradcheck::random_instance(rng);
    const auto r = gradcheck::compare(inst);
    worst = std::max(worst, r.worst_relative);
    checked += r.checked;
    skipped += r.skipped;
  }
  const double secs = seconds_since(start);
  const bool pass = worst < 1e-4 && checked > 0 && secs <= 10.0;
  return {pass, "20 instances, " + std::to_string(checked) + " entries checked, " + std::to_string(skipped) +
                    " near the ReLU kink skipped, worst relative error " + fmt(worst, 3) + ", " + fmt(secs, 3) + " s"};
}

// ---- criterion 4 ------------------------------------------------------------

Outcome criterion_4() {
  Rng rng(4040);
  double worst_s = 0.0;
  double worst_db = 0.0;
  double worst_ch = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng.below(5);
    const std::size_t n = 10 + rng.below(191);
    const std::size_t d = 1 + rng.below(6);
    auto x = gen::random_dense(n, d, rng, -10.0, 10.0);
    Labels labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::int32_t>(i < k ? i : rng.below(k));
    const auto rows = oracle::to_rows(x);
    worst_s = std::max(worst_s, std::abs(silhouette(x, labels) - oracle::silhouette(rows, labels)));
    worst_db = std::max(worst_db, std::abs(davies_bouldin(x, labels) - oracle::davies_bouldin(rows, labels)));
    const double ch = calinski_harabasz(x, labels);
    worst_ch = std::max(worst_ch, std::abs(ch - oracle::calinski_harabasz(rows, labels)) / std::max(1.0, ch));
  }
  const double ch_anchor = calinski_harabasz(DenseMatrix{{0}, {1}, {10}, {11}}, Labels{0, 0, 1, 1});
  const double db_anchor = davies_bouldin(DenseMatrix{{0}, {2}, {10}, {12}}, Labels{0, 0, 1, 1});
  const bool pass = worst_s <= 1e-9 && worst_db <= 1e-9 && worst_ch <= 1e-9 && std::abs(ch_anchor - 200.0) <= 1e-9 &&
                    std::abs(db_anchor - 0.2) <= 1e-9;
  return {pass, "50 instances, max deviation silhouette " + fmt(worst_s, 3) + ", DB " + fmt(worst_db, 3) +
                    ", CH (relative) " + fmt(worst_ch, 3) + "; anchors CH=" + fmt(ch_anchor, 17) +
                    " DB=" + fmt(db_anchor, 17)};
}

// ---- criterion 5 ------------------------------------------------------------

Outcome criterion_5() {
  Rng rng(5050);
  double worst_graph = 0.0;
  double worst_hyper = 0.0;
  double ev_min = 1e300;
  double ev_max = -1e300;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng.below(26);
    auto a = gen::random_graph(n, rng.uniform(0.05, 0.5), rng);
    worst_graph = std::max(worst_graph, oracle::max_abs_diff(oracle::graph_operator(oracle::to_rows(a)),
                                                             graph_operator(a)));
    // random hypergraph: KNN hyperedges on random points, random positive weights
    auto x = gen::random_dense(n, 3, rng);
    Hypergraph hg = knn_hypergraph(x, {.k = 1 + rng.below(std::min<std::size_t>(n - 1, 5))});
    for (double& w : hg.edge_weights) w = rng.uniform(0.2, 3.0);
    const auto theta = hypergraph_operator(hg);
    const auto expected = oracle::hypergraph_operator(oracle::to_rows(hg.incidence), hg.edge_weights);
    worst_hyper = std::max(worst_hyper, oracle::max_abs_diff(expected, theta));
    for (double ev : oracle::eigenvalues(oracle::to_rows(theta))) {
      ev_min = std::min(ev_min, ev);
      ev_max = std::max(ev_max, ev);
    }
  }
  Hypergraph pair{SparseMatrix::from_triplets(2, 1, {{0, 0, 1.0}, {1, 0, 1.0}}), {1.0}};
  const double anchor = oracle::max_abs_diff(oracle::Dense{{0.5, 0.5}, {0.5, 0.5}}, hypergraph_operator(pair));
  const bool pass = worst_graph <= 1e-12 && worst_hyper <= 1e-12 && ev_min >= -1e-10 && ev_max <= 1.0 + 1e-10 &&
                    anchor <= 1e-15;
  return {pass, "20+20 instances, max deviation graph " + fmt(worst_graph, 3) + ", hypergraph " +
                    fmt(worst_hyper, 3) + ", hypergraph eigenvalues in [" + fmt(ev_min, 3) + ", " + fmt(ev_max, 6) +
                    "], 2-vertex anchor deviation " + fmt(anchor, 3)};
}

// ---- criterion 6 ------------------------------------------------------------

Dataset two_cliques() {
  Dataset ds;
  const std::size_t n = 20;
  ds.features = DenseMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.ids.push_back("v" + std::to_string(i));
    ds.labels.push_back(i < 10 ? "left" : "right");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((i < 10) == (j < 10)) ds.citations.edges.emplace_back(i, j);
    }
  }
  ds.citations.raw_lines = ds.citations.edges.size();
  ds.has_citations = true;
  return ds;
}

Outcome criterion_6() {
  const auto start = Clock::now();
  const Dataset ds = two_cliques();
  Labels truth(20, 0);
  std::fill(truth.begin() + 10, truth.end(), 1);
  std::string detail;
  bool pass = true;
  for (Method m : {Method::Hgcn, Method::Gcn, Method::SpectralAdjacency}) {
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      RunSpec spec;
      spec.method = m;
      spec.dataset_name = "two-cliques";
      spec.k_clusters = 2;
      spec.seed = seed;
      spec.structure = StructureSource::Citations;
      const auto out = run_pipeline(spec, ds);
      g_losses.add(out.result);
      if (out.labels == truth) ++hits;
    }
    pass = pass && hits >= 9;
    detail += std::string(detail.empty() ? "" : ", ") + std::string(to_string(m)) + " " + std::to_string(hits) + "/10";
  }
  const double secs = seconds_since(start);
  pass = pass && secs <= 30.0;
  return {pass, detail + " seeds exact, " + fmt(secs, 3) + " s"};
}

// ---- criterion 8 ------------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion_8() {
#ifndef HYPERCLUST_CLI_PATH
  return {false, "command-line tool not built (configure with HYPERCLUST_BUILD_CLI=ON)"};
#else
  TempDir dir;
  const auto corpus = gen::write_corpus(dir.path(), "determinism", 4, 25, 10, 8);
  bool pass = true;
  std::string detail;
  for (Method m : kAllMethods) {
    std::string texts[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir / (std::string(to_string(m)) + std::to_string(rep) + ".json");
      const std::string cmd = std::string("\"") + HYPERCLUST_CLI_PATH + "\" cluster --method " +
                              std::string(to_string(m)) + " --content \"" + corpus.content.string() +
                              "\" --cites \"" + corpus.cites.string() + "\" --seed 7 --epochs 60 --threads 1" +
                              " --output \"" + out.string() + "\"";
      if (std::system(cmd.c_str()) != 0) return {false, std::string(to_string(m)) + ": cluster command failed"};
      auto json = nlohmann::json::parse(read_file(out));
      g_losses.add(json);
      json.erase("runtime_ms");
      texts[rep] = json.dump();
    }
    const bool same = texts[0] == texts[1];
    pass = pass && same;
    detail += std::string(detail.empty() ? "" : ", ") + std::string(to_string(m)) + (same ? " identical" : " DIFFERS");
  }
  return {pass, detail};
#endif
}

// ---- criterion 9 ------------------------------------------------------------

Outcome criterion_9() {
  Rng rng(9090);
  std::size_t violations = 0;
  std::size_t steps = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 20 + rng.below(181);
    const std::size_t d = 1 + rng.below(8);
    const std::size_t k = 2 + rng.below(8);
    auto x = gen::random_dense(n, d, rng, -5.0, 5.0);
    const auto r = kmeans(x, k, static_cast<std::uint64_t>(trial), {.max_iter = 300, .n_init = 1});
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
      ++steps;
      if (r.inertia_trace[i] > r.inertia_trace[i - 1] * (1.0 + 1e-12)) ++violations;
    }
  }
  const bool pass = violations == 0 && g_losses.runs > 0 && g_losses.decreasing == g_losses.runs;
  return {pass, "100 k-means instances, " + std::to_string(steps) + " iteration steps, " +
                    std::to_string(violations) + " increases; loss decreased in " +
                    std::to_string(g_losses.decreasing) + "/" + std::to_string(g_losses.runs) + " training runs"};
}

// ---- criterion 7 ------------------------------------------------------------

Outcome ingest(const std::string& name, std::size_t n, std::size_t width, std::size_t classes, std::size_t lines,
               std::string& detail_out) {
  std::string searched;
  const auto files = find_corpus(name, searched);
  if (!files) return missing(name, searched);
  const Dataset a = load_dataset(files->content, files->cites);
  const Dataset b = load_dataset(files->content, files->cites);
  const bool stable = a.citations.edges == b.citations.edges;
  const auto adj = edges_to_adjacency(a.citations.edges, a.size());
  const bool pass = a.size() == n && a.features.cols() == width && a.num_classes() == classes &&
                    a.citations.raw_lines == lines && stable && adj.is_symmetric() &&
                    adj.nnz() == 2 * a.citations.edges.size();
  detail_out += name + ": n=" + std::to_string(a.size()) + " L1=" + std::to_string(a.features.cols()) +
                " classes=" + std::to_string(a.num_classes()) + " lines=" + std::to_string(a.citations.raw_lines) +
                " undirected=" + std::to_string(a.citations.edges.size()) +
                " dangling=" + std::to_string(a.citations.dangling) + (stable ? "" : " UNSTABLE");
  return {pass, ""};
}

Outcome criterion_7() {
  std::string detail;
  const Outcome cora = ingest("cora", 2708, 1433, 7, 5429, detail);
  if (cora.missing_data) return cora;
  detail += "; ";
  const Outcome citeseer = ingest("citeseer", 3312, 3703, 6, 4732, detail);
  if (citeseer.missing_data) return citeseer;
  return {cora.pass && citeseer.pass, detail};
}

struct Criterion {
  int id;
  const char* title;
  const char* group;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  std::string group = "all";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--group" && i + 1 < argc) {
      group = argv[++i];
    } else {
      std::cerr << "usage: " << argv[0] << " [--group core|datasets|all]\n";
      return 2;
    }
  }

  // Order matters: 9 consumes the loss histories recorded by 6 and 8 (and by
  // 1 and 2 when the full gate runs).
  const std::vector<Criterion> criteria{
      {1, "ordinal reproduction, Citeseer", "datasets", criterion_1},
      {2, "ordinal reproduction, Cora", "datasets", criterion_2},
      {3, "gradient oracle", "core", criterion_3},
      {4, "metric oracles", "core", criterion_4},
      {5, "operator correctness", "core", criterion_5},
      {6, "end-to-end sanity on two 10-cliques", "core", criterion_6},
      {7, "dataset ingestion", "datasets", criterion_7},
      {8, "determinism of repeated CLI runs", "core", criterion_8},
      {9, "monotone k-means inertia and training loss", "core", criterion_9},
  };

  bool all_pass = true;
  bool only_missing_data = true;
  for (const auto& c : criteria) {
    if (group != "all" && group != c.group) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title << ": " << o.detail << std::endl;
    if (!o.pass) {
      all_pass = false;
      only_missing_data = only_missing_data && o.missing_data;
    }
  }
  if (all_pass) return 0;
  return only_missing_data ? kMissingData : 1;
}
