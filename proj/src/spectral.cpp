#include "hyperclust/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hyperclust/error.hpp"
#include "hyperclust/rng.hpp"

namespace hyperclust {

namespace {

void sort_ascending(std::vector<double>& values, DenseMatrix& vectors) {
  const std::size_t n = vectors.rows();
  const std::size_t m = values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> sorted_vals(m);
  DenseMatrix sorted_vecs(n, m);
  for (std::size_t c = 0; c < m; ++c) {
    sorted_vals[c] = values[order[c]];
    for (std::size_t r = 0; r < n; ++r) sorted_vecs(r, c) = vectors(r, order[c]);
  }
  values = std::move(sorted_vals);
  vectors = std::move(sorted_vecs);
}

// Flip each column so its largest-magnitude entry (first on ties) is positive.
void fix_signs(DenseMatrix& vectors) {
  for (std::size_t c = 0; c < vectors.cols(); ++c) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < vectors.rows(); ++r) {
      if (std::abs(vectors(r, c)) > best + 1e-12) {
        best = std::abs(vectors(r, c));
        arg = r;
      }
    }
    if (vectors(arg, c) < 0.0) {
      for (std::size_t r = 0; r < vectors.rows(); ++r) vectors(r, c) = -vectors(r, c);
    }
  }
}

// Implicit QL on a symmetric tridiagonal matrix. `diag` receives the
// eigenvalues, `z` (m x m, identity on entry) the eigenvectors by column.
void tridiagonal_ql(std::vector<double>& diag, std::vector<double> off, DenseMatrix& z) {
  const std::size_t m = diag.size();
  if (m == 0) return;
  off.push_back(0.0);  // off[i] couples i and i+1
  for (std::size_t l = 0; l < m; ++l) {
    std::size_t iter = 0;
    for (;;) {
      std::size_t mm = l;
      for (; mm + 1 < m; ++mm) {
        const double dd = std::abs(diag[mm]) + std::abs(diag[mm + 1]);
        if (std::abs(off[mm]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (mm == l) break;
      if (++iter > 60) throw ConvergenceError("tridiagonal QL did not converge", std::abs(off[l]));
      double g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
      double r = std::hypot(g, 1.0);
      g = diag[mm] - diag[l] + off[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      bool underflow = false;
      for (std::size_t ii = mm; ii-- > l;) {
        double f = s * off[ii];
        const double b = c * off[ii];
        r = std::hypot(f, g);
        off[ii + 1] = r;
        if (r == 0.0) {
          diag[ii + 1] -= p;
          off[mm] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = diag[ii + 1] - p;
        r = (diag[ii] - g) * s + 2.0 * c * b;
        p = s * r;
        diag[ii + 1] = g + p;
        g = c * r - b;
        for (std::size_t k = 0; k < m; ++k) {
          f = z(k, ii + 1);
          z(k, ii + 1) = s * z(k, ii) + c * f;
          z(k, ii) = c * z(k, ii) - s * f;
        }
      }
      if (underflow) continue;
      diag[l] -= p;
      off[l] = g;
      off[mm] = 0.0;
    }
  }
}

void sym_matvec(const SparseMatrix& s, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(s.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto cols = s.row_cols(i);
    const auto vals = s.row_values(i);
    double acc = 0.0;
    for (std::size_t p = 0; p < cols.size(); ++p) acc += vals[p] * x[cols[p]];
    y[i] = acc;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void project_out(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (const auto& b : basis) {
    const double proj = dot(v, b);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
  }
}

// Two Gram-Schmidt passes against every basis vector.
void orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass) project_out(v, basis);
}

// Krylov vectors carry rounding-level components along the locked
// eigenvectors, so projecting against them after the locked set would feed
// those components back in, amplified by alpha/beta every step. Each pass
// ends with the locked set instead.
void orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& krylov,
                   const std::vector<std::vector<double>>& locked) {
  for (int pass = 0; pass < 2; ++pass) {
    project_out(v, krylov);
    project_out(v, locked);
  }
}

struct RitzPair {
  double value;
  std::vector<double> vector;
  double residual;
};

// Smallest Ritz pair of a Lanczos run of at most `steps` steps in the
// orthogonal complement of `locked`.
RitzPair lanczos_smallest_pair(const SparseMatrix& s, const std::vector<std::vector<double>>& locked,
                               std::size_t steps, Rng& rng) {
  const std::size_t n = s.rows();
  std::vector<std::vector<double>> q;
  std::vector<double> alpha;
  std::vector<double> beta;

  std::vector<double> v(n);
  double v_norm = 0.0;
  for (int attempt = 0; attempt < 8 && !(v_norm > 1e-8); ++attempt) {
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    orthogonalize(v, locked);
    v_norm = norm(v);
  }
  if (!(v_norm > 1e-8)) throw ConvergenceError("no start vector outside the locked subspace", 0.0);
  for (double& x : v) x /= v_norm;

  std::vector<double> w(n);
  for (std::size_t j = 0; j < steps; ++j) {
    q.push_back(v);
    sym_matvec(s, q.back(), w);
    const double a = dot(w, q.back());
    alpha.push_back(a);
    orthogonalize(w, q, locked);
    const double b = norm(w);
    if (j + 1 == steps || b <= 1e-12 * std::max(1.0, std::abs(a))) {
      beta.push_back(b);
      break;
    }
    beta.push_back(b);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / b;
  }

  const std::size_t m = alpha.size();
  std::vector<double> diag = alpha;
  std::vector<double> off(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(m - 1));
  DenseMatrix z = DenseMatrix::identity(m);
  tridiagonal_ql(diag, off, z);
  const auto smallest = static_cast<std::size_t>(std::min_element(diag.begin(), diag.end()) - diag.begin());

  RitzPair out;
  out.value = diag[smallest];
  out.vector.assign(n, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double coef = z(j, smallest);
    for (std::size_t i = 0; i < n; ++i) out.vector[i] += coef * q[j][i];
  }
  orthogonalize(out.vector, locked);
  const double len = norm(out.vector);
  for (double& x : out.vector) x /= len;

  sym_matvec(s, out.vector, w);
  out.value = dot(out.vector, w);  // Rayleigh quotient of the cleaned vector
  for (std::size_t i = 0; i < n; ++i) w[i] -= out.value * out.vector[i];
  out.residual = norm(w);
  return out;
}

EigenPairs lanczos_smallest(const SparseMatrix& s, std::size_t k, const EigenOptions& options) {
  const std::size_t n = s.rows();
  std::vector<std::vector<double>> locked;
  std::vector<double> values;
  Rng rng(options.seed, 0x1A2C305ULL);
  while (locked.size() < k) {
    const std::size_t room = n - locked.size();
    std::size_t steps = std::min<std::size_t>(room, 100);
    for (;;) {
      RitzPair pair = lanczos_smallest_pair(s, locked, steps, rng);
      const double tol = options.residual_tolerance * std::max(1.0, std::abs(pair.value));
      if (pair.residual <= tol) {
        values.push_back(pair.value);
        locked.push_back(std::move(pair.vector));
        break;
      }
      if (steps == room) {
        throw ConvergenceError("Lanczos did not converge for eigenpair " + std::to_string(locked.size()),
                               pair.residual);
      }
      steps = std::min(room, steps * 2);
    }
  }
  EigenPairs out;
  out.values = std::move(values);
  out.vectors = DenseMatrix(n, k);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = locked[c][r];
  }
  sort_ascending(out.values, out.vectors);
  return out;
}

}  // namespace

EigenPairs jacobi_eigen(const DenseMatrix& s) {
  if (s.rows() != s.cols()) throw ShapeError("jacobi_eigen needs a square matrix, got " + s.shape_string());
  const std::size_t n = s.rows();
  DenseMatrix a = s;
  DenseMatrix v = DenseMatrix::identity(n);
  double frob = 0.0;
  for (double x : a.values()) frob += x * x;
  frob = std::sqrt(frob);

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= 1e-15 * frob || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == kMaxSweeps) throw ConvergenceError("Jacobi sweeps exhausted", 0.0);

  EigenPairs out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
  out.vectors = std::move(v);
  sort_ascending(out.values, out.vectors);
  return out;
}

EigenPairs sym_eigen_smallest(const SparseMatrix& s, std::size_t k, const EigenOptions& options) {
  if (s.rows() != s.cols()) throw ShapeError("eigensolver needs a square matrix, got " + s.shape_string());
  const std::size_t n = s.rows();
  if (k > n) throw InvalidInput("requested " + std::to_string(k) + " eigenpairs of a " + s.shape_string() + " matrix");
  if (!s.is_symmetric(options.symmetry_tolerance)) throw InvalidInput("eigensolver input is not symmetric");

  const bool dense = options.method == EigenMethod::Jacobi ||
                     (options.method == EigenMethod::Auto && n <= options.dense_limit);
  EigenPairs out;
  if (dense) {
    EigenPairs full = jacobi_eigen(s.to_dense());
    out.values.assign(full.values.begin(), full.values.begin() + static_cast<std::ptrdiff_t>(k));
    out.vectors = DenseMatrix(n, k);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < k; ++c) out.vectors(r, c) = full.vectors(r, c);
    }
  } else {
    out = lanczos_smallest(s, k, options);
  }
  fix_signs(out.vectors);
  return out;
}

SparseMatrix normalized_laplacian(const SparseMatrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw ShapeError("Laplacian needs a square adjacency, got " + adjacency.shape_string());
  }
  if (!adjacency.is_symmetric()) throw InvalidInput("Laplacian input is not symmetric");
  const std::size_t n = adjacency.rows();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (double v : adjacency.row_values(i)) degree += v;
    inv_sqrt[i] = 1.0 / std::sqrt(degree > 0.0 ? degree : 1.0);
  }
  std::vector<Triplet> triplets;
  triplets.reserve(adjacency.nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    triplets.push_back({i, i, 1.0});
    const auto cols = adjacency.row_cols(i);
    const auto vals = adjacency.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      triplets.push_back({i, cols[p], -inv_sqrt[i] * vals[p] * inv_sqrt[cols[p]]});
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(triplets));
}

DenseMatrix spectral_embedding(const SparseMatrix& adjacency, std::size_t k, std::uint64_t seed) {
  EigenOptions options;
  options.seed = seed;
  const EigenPairs eig = sym_eigen_smallest(normalized_laplacian(adjacency), k, options);
  DenseMatrix rows = eig.vectors;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    auto row = rows.row(r);
    double len = 0.0;
    for (double v : row) len += v * v;
    len = std::sqrt(len);
    if (len > 0.0) {
      for (double& v : row) v /= len;
    }
  }
  return rows;
}

ClusterAssignment spectral_clustering(const SparseMatrix& adjacency, std::size_t k, std::uint64_t seed,
                                      const KMeansOptions& kmeans_options) {
  if (k < 2) throw InvalidInput("spectral clustering needs k >= 2");
  return kmeans(spectral_embedding(adjacency, k, seed), k, seed, kmeans_options);
}

}  // namespace hyperclust
