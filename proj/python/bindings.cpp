#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <optional>
#include <string>

#include "hyperclust/autoenc.hpp"
#include "hyperclust/data_io.hpp"
#include "hyperclust/error.hpp"
#include "hyperclust/graph_build.hpp"
#include "hyperclust/kmeans.hpp"
#include "hyperclust/metrics.hpp"
#include "hyperclust/parallel.hpp"
#include "hyperclust/pipeline.hpp"
#include "hyperclust/spectral.hpp"
#include "hyperclust/tensor.hpp"

namespace py = pybind11;
using namespace hyperclust;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

DenseMatrix to_dense(const DoubleArray& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array, got " + std::to_string(a.ndim()) + "-d");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return DenseMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

py::array_t<double> to_numpy(const DenseMatrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  if (m.size()) std::memcpy(out.mutable_data(), m.values().data(), m.size() * sizeof(double));
  return out;
}

template <typename T>
py::array_t<T> to_numpy(std::span<const T> v) {
  return py::array_t<T>(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())}, v.data());
}

Labels to_labels(const IntArray& a) {
  if (a.ndim() != 1) throw ShapeError("labels must be 1-d");
  return Labels(a.data(), a.data() + a.size());
}

// Accepts a bound SparseMatrix, anything with tocsr() (scipy.sparse), or a dense 2-d array.
SparseMatrix as_sparse(const py::object& obj) {
  if (py::isinstance<SparseMatrix>(obj)) return obj.cast<SparseMatrix>();
  if (py::hasattr(obj, "tocsr")) {
    py::object csr = obj.attr("tocsr")();
    csr.attr("sum_duplicates")();
    csr.attr("sort_indices")();
    const auto shape = csr.attr("shape").cast<std::pair<std::size_t, std::size_t>>();
    auto indptr = csr.attr("indptr").cast<py::array_t<std::int64_t, py::array::forcecast>>();
    auto indices = csr.attr("indices").cast<py::array_t<std::int64_t, py::array::forcecast>>();
    auto data = csr.attr("data").cast<DoubleArray>();
    return SparseMatrix(shape.first, shape.second,
                        std::vector<std::size_t>(indptr.data(), indptr.data() + indptr.size()),
                        std::vector<std::size_t>(indices.data(), indices.data() + indices.size()),
                        std::vector<double>(data.data(), data.data() + data.size()));
  }
  return SparseMatrix::from_dense(to_dense(obj.cast<DoubleArray>()));
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict assignment_dict(const ClusterAssignment& a) {
  py::dict d;
  d["labels"] = to_numpy(std::span<const std::int32_t>(a.labels));
  d["centroids"] = to_numpy(a.centroids);
  d["inertia"] = a.inertia;
  d["iterations_run"] = a.iterations_run;
  d["inertia_trace"] = a.inertia_trace;
  return d;
}

EncoderParams params_from(const DoubleArray& theta1, const DoubleArray& theta2) {
  return {to_dense(theta1), to_dense(theta2)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Graph and hypergraph autoencoder clustering of citation networks.";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", error);
  py::register_exception<InvalidInput>(m, "InvalidInput", error);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<TrainingDiverged>(m, "TrainingDiverged", error);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", error);
  py::register_exception<DegenerateClustering>(m, "DegenerateClustering", error);

  py::class_<SparseMatrix>(m, "SparseMatrix")
      .def(py::init([](const py::object& obj) { return as_sparse(obj); }), py::arg("matrix"))
      .def_property_readonly("shape", [](const SparseMatrix& s) { return py::make_tuple(s.rows(), s.cols()); })
      .def_property_readonly("nnz", &SparseMatrix::nnz)
      .def_property_readonly("indptr", [](const SparseMatrix& s) { return to_numpy(s.row_offsets()); })
      .def_property_readonly("indices", [](const SparseMatrix& s) { return to_numpy(s.col_indices()); })
      .def_property_readonly("data", [](const SparseMatrix& s) { return to_numpy(s.values()); })
      .def("to_dense", [](const SparseMatrix& s) { return to_numpy(s.to_dense()); })
      .def("is_symmetric", &SparseMatrix::is_symmetric, py::arg("tolerance") = 0.0)
      .def("__repr__", [](const SparseMatrix& s) {
        return "<SparseMatrix " + s.shape_string() + ", nnz=" + std::to_string(s.nnz()) + ">";
      });

  py::class_<Hypergraph>(m, "Hypergraph")
      .def(py::init([](const py::object& incidence, std::optional<std::vector<double>> weights) {
             Hypergraph hg{as_sparse(incidence), {}};
             hg.edge_weights = weights ? *weights : std::vector<double>(hg.incidence.cols(), 1.0);
             hg.validate();
             return hg;
           }),
           py::arg("incidence"), py::arg("edge_weights") = py::none())
      .def_readonly("incidence", &Hypergraph::incidence)
      .def_readonly("edge_weights", &Hypergraph::edge_weights)
      .def_property_readonly("num_vertices", &Hypergraph::num_vertices)
      .def_property_readonly("num_edges", &Hypergraph::num_edges);

  m.def("set_num_threads", &set_num_threads, py::arg("threads"));

  auto knn_cfg = [](std::size_t k, const std::string& metric) { return KnnConfig{k, parse_metric(metric)}; };
  m.def(
      "knn_graph",
      [knn_cfg](const DoubleArray& x, std::size_t k, const std::string& metric) {
        return knn_graph(to_dense(x), knn_cfg(k, metric));
      },
      py::arg("x"), py::arg("k") = 5, py::arg("metric") = "euclidean");
  m.def(
      "knn_hypergraph",
      [knn_cfg](const DoubleArray& x, std::size_t k, const std::string& metric) {
        return knn_hypergraph(to_dense(x), knn_cfg(k, metric));
      },
      py::arg("x"), py::arg("k") = 5, py::arg("metric") = "euclidean");
  m.def(
      "hypergraph_from_adjacency", [](const py::object& a) { return hypergraph_from_adjacency(as_sparse(a)); },
      py::arg("adjacency"));
  m.def(
      "graph_operator", [](const py::object& a) { return graph_operator(as_sparse(a)); }, py::arg("adjacency"));
  m.def("hypergraph_operator", &hypergraph_operator, py::arg("hypergraph"));

  m.def(
      "glorot_init",
      [](std::size_t in_dim, std::size_t hidden_dim, std::size_t embed_dim, std::uint64_t seed) {
        const EncoderParams p = glorot_init(in_dim, hidden_dim, embed_dim, seed);
        return py::make_tuple(to_numpy(p.theta1), to_numpy(p.theta2));
      },
      py::arg("in_dim"), py::arg("hidden_dim"), py::arg("embed_dim"), py::arg("seed"));
  m.def(
      "encode",
      [](const py::object& op, const DoubleArray& x, const DoubleArray& theta1, const DoubleArray& theta2) {
        return to_numpy(encode(as_sparse(op), to_dense(x), params_from(theta1, theta2)));
      },
      py::arg("op"), py::arg("x"), py::arg("theta1"), py::arg("theta2"));
  m.def(
      "decode", [](const DoubleArray& z) { return to_numpy(decode(to_dense(z))); }, py::arg("z"));
  m.def(
      "reconstruction_loss",
      [](const DoubleArray& z, const py::object& target, std::optional<double> pos_weight) {
        const SparseMatrix t = as_sparse(target);
        return reconstruction_loss(to_dense(z), t, pos_weight ? *pos_weight : auto_pos_weight(t));
      },
      py::arg("z"), py::arg("target"), py::arg("pos_weight") = py::none());
  m.def(
      "loss_gradients",
      [](const py::object& op, const DoubleArray& x, const py::object& target, const DoubleArray& theta1,
         const DoubleArray& theta2, std::optional<double> pos_weight) {
        const SparseMatrix t = as_sparse(target);
        const Gradients g = loss_gradients(as_sparse(op), to_dense(x), t, params_from(theta1, theta2),
                                           pos_weight ? *pos_weight : auto_pos_weight(t));
        return py::make_tuple(g.loss, to_numpy(g.d_theta1), to_numpy(g.d_theta2));
      },
      py::arg("op"), py::arg("x"), py::arg("target"), py::arg("theta1"), py::arg("theta2"),
      py::arg("pos_weight") = py::none());
  m.def(
      "train",
      [](const py::object& op, const DoubleArray& x, const py::object& target, std::size_t hidden_dim,
         std::size_t embed_dim, double lr, std::size_t epochs, std::uint64_t seed, const std::string& optimizer,
         std::optional<double> pos_weight) {
        TrainConfig cfg;
        cfg.hidden_dim = hidden_dim;
        cfg.embed_dim = embed_dim;
        cfg.learning_rate = lr;
        cfg.epochs = epochs;
        cfg.seed = seed;
        cfg.optimizer = parse_optimizer(optimizer);
        cfg.pos_weight = pos_weight;
        const SparseMatrix o = as_sparse(op);
        const SparseMatrix t = as_sparse(target);
        const DenseMatrix xd = to_dense(x);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(o, xd, t, cfg);
        }
        py::dict d;
        d["embedding"] = to_numpy(r.embedding);
        d["theta1"] = to_numpy(r.params.theta1);
        d["theta2"] = to_numpy(r.params.theta2);
        d["loss_history"] = r.loss_history;
        d["pos_weight"] = r.pos_weight;
        return d;
      },
      py::arg("op"), py::arg("x"), py::arg("target"), py::arg("hidden_dim") = 32, py::arg("embed_dim") = 16,
      py::arg("lr") = 0.01, py::arg("epochs") = 200, py::arg("seed") = 0, py::arg("optimizer") = "adaptive_moments",
      py::arg("pos_weight") = py::none());

  m.def(
      "kmeans",
      [](const DoubleArray& points, std::size_t k, std::uint64_t seed, std::size_t max_iter, std::size_t n_init) {
        return assignment_dict(kmeans(to_dense(points), k, seed, KMeansOptions{max_iter, n_init}));
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 300, py::arg("n_init") = 10);

  m.def(
      "normalized_laplacian", [](const py::object& a) { return normalized_laplacian(as_sparse(a)); },
      py::arg("adjacency"));
  m.def(
      "sym_eigen_smallest",
      [](const py::object& s, std::size_t k, const std::string& method, std::uint64_t seed) {
        EigenOptions opt;
        if (method == "auto") opt.method = EigenMethod::Auto;
        else if (method == "jacobi") opt.method = EigenMethod::Jacobi;
        else if (method == "lanczos") opt.method = EigenMethod::Lanczos;
        else throw InvalidInput("unknown eigensolver '" + method + "'");
        opt.seed = seed;
        const EigenPairs p = sym_eigen_smallest(as_sparse(s), k, opt);
        return py::make_tuple(p.values, to_numpy(p.vectors));
      },
      py::arg("matrix"), py::arg("k"), py::arg("method") = "auto", py::arg("seed") = 0);
  m.def(
      "spectral_embedding",
      [](const py::object& a, std::size_t k, std::uint64_t seed) {
        return to_numpy(spectral_embedding(as_sparse(a), k, seed));
      },
      py::arg("adjacency"), py::arg("k"), py::arg("seed") = 0);
  m.def(
      "spectral_clustering",
      [](const py::object& a, std::size_t k, std::uint64_t seed) {
        return assignment_dict(spectral_clustering(as_sparse(a), k, seed));
      },
      py::arg("adjacency"), py::arg("k"), py::arg("seed") = 0);

  m.def(
      "silhouette", [](const DoubleArray& x, const IntArray& l) { return silhouette(to_dense(x), to_labels(l)); },
      py::arg("points"), py::arg("labels"));
  m.def(
      "davies_bouldin",
      [](const DoubleArray& x, const IntArray& l) { return davies_bouldin(to_dense(x), to_labels(l)); },
      py::arg("points"), py::arg("labels"));
  m.def(
      "calinski_harabasz",
      [](const DoubleArray& x, const IntArray& l) { return calinski_harabasz(to_dense(x), to_labels(l)); },
      py::arg("points"), py::arg("labels"));
  m.def(
      "evaluate_metrics",
      [](const DoubleArray& x, const IntArray& l) {
        return to_python(to_json(evaluate_metrics(to_dense(x), to_labels(l))));
      },
      py::arg("points"), py::arg("labels"));

  m.def(
      "load_dataset",
      [](const std::filesystem::path& content, std::optional<std::filesystem::path> cites) {
        const Dataset ds = load_dataset(content, cites.value_or(std::filesystem::path{}));
        py::dict d;
        d["ids"] = ds.ids;
        d["features"] = to_numpy(ds.features);
        d["labels"] = ds.labels;
        d["edges"] = ds.citations.edges;
        d["has_citations"] = ds.has_citations;
        d["cite_lines"] = ds.citations.raw_lines;
        d["dangling"] = ds.citations.dangling;
        d["self_citations"] = ds.citations.self_citations;
        return d;
      },
      py::arg("content"), py::arg("cites") = py::none());

  m.def(
      "run",
      [](const std::filesystem::path& content, std::optional<std::filesystem::path> cites, const std::string& method,
         std::size_t k_clusters, std::size_t knn, const std::string& metric, const std::string& structure,
         std::size_t hidden_dim, std::size_t embed_dim, double lr, std::size_t epochs, const std::string& optimizer,
         std::optional<double> pos_weight, std::size_t kmeans_n_init, std::size_t kmeans_max_iter, std::uint64_t seed,
         int threads) {
        RunSpec spec;
        spec.method = parse_method(method);
        spec.content_path = content;
        spec.cites_path = cites.value_or(std::filesystem::path{});
        spec.k_clusters = k_clusters;
        spec.knn = KnnConfig{knn, parse_metric(metric)};
        spec.structure = parse_structure(structure);
        spec.train.hidden_dim = hidden_dim;
        spec.train.embed_dim = embed_dim;
        spec.train.learning_rate = lr;
        spec.train.epochs = epochs;
        spec.train.optimizer = parse_optimizer(optimizer);
        spec.train.pos_weight = pos_weight;
        spec.kmeans = KMeansOptions{kmeans_max_iter, kmeans_n_init};
        spec.seed = seed;
        spec.threads = threads;
        RunOutput out;
        {
          py::gil_scoped_release release;
          out = run(spec);
        }
        py::dict result = to_python(out.result);
        result["labels"] = to_numpy(std::span<const std::int32_t>(out.labels));
        result["representation"] = to_numpy(out.representation);
        return result;
      },
      py::arg("content"), py::arg("cites") = py::none(), py::arg("method") = "hgcn", py::arg("k_clusters") = 0,
      py::arg("knn") = 5, py::arg("metric") = "euclidean", py::arg("structure") = "auto", py::arg("hidden_dim") = 32,
      py::arg("embed_dim") = 16, py::arg("lr") = 0.01, py::arg("epochs") = 200, py::arg("optimizer") = "adaptive_moments",
      py::arg("pos_weight") = py::none(), py::arg("kmeans_n_init") = 10, py::arg("kmeans_max_iter") = 300,
      py::arg("seed") = 1, py::arg("threads") = 1);
}
