#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

#include "hyperclust/data_io.hpp"
#include "hyperclust/error.hpp"
#include "support/generators.hpp"
#include "support/tempdir.hpp"

using namespace hyperclust;
namespace fs = std::filesystem;

namespace {

fs::path write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_SUITE("data_io") {

TEST_CASE("content fixture parses exactly") {
  TempDir dir;
  auto p = write(dir / "tiny.content",
                 "a\t0\t1\t0\t1\tNeural\n"
                 "b\t1\t1\t0\t0\tTheory\n"
                 "c\t0\t0\t0\t0\tNeural\n");
  auto ds = load_content(p);
  CHECK(ds.ids == std::vector<std::string>{"a", "b", "c"});
  CHECK(ds.features == DenseMatrix{{0, 1, 0, 1}, {1, 1, 0, 0}, {0, 0, 0, 0}});
  CHECK(ds.labels == std::vector<std::string>{"Neural", "Theory", "Neural"});
  CHECK(ds.num_classes() == 2);
  CHECK(ds.id_index().at("c") == 2);
  CHECK_FALSE(ds.has_citations);
}

TEST_CASE("content errors carry line numbers") {
  TempDir dir;
  auto ragged = write(dir / "r.content", "a\t0\t1\tX\nb\t1\tX\n");
  try {
    load_content(ragged);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  auto nonbinary = write(dir / "n.content", "a\t0\t1\tX\nb\t2\t0\tX\n");
  CHECK_THROWS_AS(load_content(nonbinary), ParseError);
  auto dup = write(dir / "d.content", "a\t0\t1\tX\nb\t1\t0\tX\na\t1\t1\tY\n");
  try {
    load_content(dup);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(load_content(dir / "missing.content"), Error);
  CHECK_THROWS_AS(load_content(write(dir / "e.content", "")), ParseError);
}

TEST_CASE("citations collapse duplicates and reversed pairs") {
  TempDir dir;
  auto content = write(dir / "t.content", "a\t1\tX\nb\t0\tX\nc\t1\tY\n");
  auto cites = write(dir / "t.cites", "a\tb\nb\ta\na\tb\nc\tc\nzzz\ta\nb\tc\n\n");
  auto ds = load_dataset(content, cites);
  CHECK(ds.has_citations);
  CHECK(ds.citations.raw_lines == 6);
  CHECK(ds.citations.dangling == 1);
  CHECK(ds.citations.self_citations == 1);
  CHECK(ds.citations.edges == std::vector<Edge>{{0, 1}, {1, 2}});

  auto bad = write(dir / "bad.cites", "a\tb\tc\n");
  CHECK_THROWS_AS(load_cites(bad, ds.id_index()), ParseError);
}

TEST_CASE("edges to adjacency") {
  auto a = edges_to_adjacency({{0, 1}}, 3);
  CHECK(a.nnz() == 2);
  CHECK(a.is_symmetric());
  CHECK(edges_to_adjacency({}, 4).nnz() == 0);
  CHECK(edges_to_adjacency({{2, 2}, {0, 2}}, 3).nnz() == 2);
  CHECK_THROWS_AS(edges_to_adjacency({{0, 3}}, 3), InvalidInput);
}

TEST_CASE("synthetic corpus loads with consistent counts") {
  TempDir dir;
  auto corpus = gen::write_corpus(dir.path(), "synth", 3, 20, 8, 5);
  auto ds = load_dataset(corpus.content, corpus.cites);
  CHECK(ds.size() == corpus.n);
  CHECK(ds.features.cols() == corpus.vocabulary);
  CHECK(ds.num_classes() == 3);
  CHECK(ds.citations.raw_lines == corpus.cite_lines);
  CHECK(ds.citations.dangling == 2);
  auto a = edges_to_adjacency(ds.citations.edges, ds.size());
  CHECK(a.nnz() == 2 * ds.citations.edges.size());
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(ds.ids[i] == "p" + std::to_string(1000 + i));
}

TEST_CASE("format_double round-trips") {
  Rng rng(400);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-300.0, 300.0));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::strtod(format_double(std::numeric_limits<double>::denorm_min()).c_str(), nullptr) ==
        std::numeric_limits<double>::denorm_min());
}

TEST_CASE("embedding and assignment CSVs round-trip bit for bit") {
  TempDir dir;
  Rng rng(401);
  auto z = gen::random_dense(12, 4, rng, -1e3, 1e3);
  z(0, 0) = 1.0 / 3.0;
  z(1, 1) = -0.0;
  std::vector<std::string> ids;
  for (int i = 0; i < 12; ++i) ids.push_back("n" + std::to_string(i));
  write_embedding_csv(dir / "z.csv", ids, z);
  auto [ids_back, z_back] = read_embedding_csv(dir / "z.csv");
  CHECK(ids_back == ids);
  CHECK(z_back == z);

  Labels labels{0, 1, 2, 0, 1, 2, 0, 1, 2, 3, 3, 0};
  write_assignment_csv(dir / "a.csv", ids, labels);
  auto [ids2, labels_back] = read_assignment_csv(dir / "a.csv");
  CHECK(ids2 == ids);
  CHECK(labels_back == labels);

  CHECK_THROWS_AS(write_embedding_csv(dir / "bad.csv", {"x"}, z), ShapeError);
  CHECK_THROWS_AS(read_assignment_csv(write(dir / "h.csv", "id,label\nx,1\n")), ParseError);
}

TEST_CASE("atomic write leaves no temporary behind") {
  TempDir dir;
  write_file_atomic(dir / "out.json", "{\"a\":1}\n");
  write_file_atomic(dir / "out.json", "{\"a\":2}\n");
  std::ifstream in(dir / "out.json");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text == "{\"a\":2}\n");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path())) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS_AS(write_file_atomic(dir / "no" / "such" / "dir.json", "x"), Error);
}

}  // TEST_SUITE
