#include "oracles.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

using goa::Complex;

CMatrix random_unitary(std::size_t k, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const auto kk = static_cast<Eigen::Index>(k);
  CMatrix z(kk, kk);
  for (Eigen::Index j = 0; j < kk; ++j) {
    for (Eigen::Index i = 0; i < kk; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      z(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < kk; ++j) {
    const Complex d = r(j, j);
    q.col(j) *= std::abs(d) > 0 ? d / std::abs(d) : Complex(1.0);
  }
  return q;
}

Matrix random_orthogonal(std::size_t k, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const auto kk = static_cast<Eigen::Index>(k);
  Matrix z(kk, kk);
  for (Eigen::Index j = 0; j < kk; ++j) {
    for (Eigen::Index i = 0; i < kk; ++i) z(i, j) = g(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < kk; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = g(rng);
  }
  return m;
}

Vector random_vector(std::size_t n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = g(rng);
  return v;
}

CMatrix mzi(double theta, double phi) {
  const Complex i(0.0, 1.0);
  const Complex pre = i * std::exp(i * (theta / 2.0));
  const Complex ep = std::exp(i * phi);
  CMatrix t(2, 2);
  t(0, 0) = pre * ep * std::sin(theta / 2.0);
  t(0, 1) = pre * std::cos(theta / 2.0);
  t(1, 0) = pre * ep * std::cos(theta / 2.0);
  t(1, 1) = -pre * std::sin(theta / 2.0);
  return t;
}

CMatrix mesh_matrix(const goa::MeshProgram& program) {
  const auto k = static_cast<Eigen::Index>(program.size);
  CMatrix total = CMatrix::Identity(k, k);
  for (Eigen::Index p = 0; p < k; ++p) total(p, p) = program.diagonal[static_cast<std::size_t>(p)];
  for (const auto& column : program.columns) {
    CMatrix layer = CMatrix::Identity(k, k);
    for (const auto& placed : column) {
      const auto p = static_cast<Eigen::Index>(placed.port);
      layer.block(p, p, 2, 2) = mzi(placed.setting.theta(), placed.setting.phi());
    }
    total = layer * total;
  }
  CMatrix phases = CMatrix::Identity(k, k);
  for (Eigen::Index p = 0; p < k; ++p) {
    phases(p, p) = std::exp(Complex(0.0, program.output_phases[static_cast<std::size_t>(p)]));
  }
  return phases * total;
}

Matrix grid_matrix(const goa::GridProgram& grid) {
  const std::size_t m = grid.arch.m;
  const std::size_t n = grid.arch.n;
  const auto k = static_cast<Eigen::Index>(grid.arch.k);
  CMatrix g = CMatrix::Zero(static_cast<Eigen::Index>(n) * k, static_cast<Eigen::Index>(m) * k);
  for (std::size_t r = 0; r < m; ++r) {
    CMatrix chain;  // product of modules feeding into the current one
    bool chained = false;
    for (std::size_t c = 0; c < n; ++c) {
      const auto& module = grid.at(r, c);
      if (!module) {
        chained = false;
        continue;
      }
      const CMatrix here = mesh_matrix(*module);
      const CMatrix product = chained ? CMatrix(here * chain) : here;
      if (grid.feeds_right[r * n + c]) {
        chain = product;
        chained = true;
      } else {
        g.block(static_cast<Eigen::Index>(c) * k, static_cast<Eigen::Index>(r) * k, k, k) += product;
        chained = false;
      }
    }
  }
  return g.real();
}

std::size_t min_passes(const std::vector<std::pair<std::size_t, std::size_t>>& rects, std::size_t m,
                       std::size_t n) {
  using Grid = std::vector<std::vector<bool>>;
  std::vector<Grid> passes;
  std::size_t best = rects.size() + 1;

  auto fits = [&](const Grid& g, std::size_t r0, std::size_t c0, std::size_t w, std::size_t h) {
    if (r0 + h > m || c0 + w > n) return false;
    for (std::size_t r = r0; r < r0 + h; ++r) {
      for (std::size_t c = c0; c < c0 + w; ++c) {
        if (g[r][c]) return false;
      }
    }
    return true;
  };
  auto paint = [&](Grid& g, std::size_t r0, std::size_t c0, std::size_t w, std::size_t h, bool v) {
    for (std::size_t r = r0; r < r0 + h; ++r) {
      for (std::size_t c = c0; c < c0 + w; ++c) g[r][c] = v;
    }
  };

  std::function<void(std::size_t)> place = [&](std::size_t i) {
    if (passes.size() >= best) return;
    if (i == rects.size()) {
      best = passes.size();
      return;
    }
    const auto [w, h] = rects[i];
    // Index access: the recursion grows and shrinks `passes`.
    for (std::size_t p = 0; p < passes.size(); ++p) {
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          if (!fits(passes[p], r, c, w, h)) continue;
          paint(passes[p], r, c, w, h, true);
          place(i + 1);
          paint(passes[p], r, c, w, h, false);
        }
      }
    }
    passes.emplace_back(m, std::vector<bool>(n, false));
    if (fits(passes.back(), 0, 0, w, h)) {
      paint(passes.back(), 0, 0, w, h, true);
      place(i + 1);
    }
    passes.pop_back();
  };
  place(0);
  return best;
}

double scan_scale(const Vector& w, const Vector& u, double lo, double hi, double step) {
  auto f = [&](double s) { return (w - s * u).squaredNorm(); };
  double best = lo;
  double best_f = f(lo);
  for (double s = lo; s <= hi; s += step) {
    if (const double v = f(s); v < best_f) {
      best_f = v;
      best = s;
    }
  }
  // The objective is convex, so the minimizer lies within one coarse step.
  const double fine = 1e-6;
  const double a = best - 2.0 * step;
  const std::size_t count = static_cast<std::size_t>(4.0 * step / fine) + 1;
  for (std::size_t i = 0; i <= count; ++i) {
    const double s = a + static_cast<double>(i) * fine;
    if (const double v = f(s); v < best_f) {
      best_f = v;
      best = s;
    }
  }
  return best;
}

goa::Gradients finite_difference(const goa::ToyNet& net, const goa::Dataset& batch, goa::Loss kind, double h) {
  goa::Gradients g;
  goa::ToyNet probe = net;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Matrix gw(net.weights[l].rows(), net.weights[l].cols());
    for (Eigen::Index i = 0; i < gw.rows(); ++i) {
      for (Eigen::Index j = 0; j < gw.cols(); ++j) {
        const double x = probe.weights[l](i, j);
        probe.weights[l](i, j) = x + h;
        const double up = goa::loss(probe, batch, kind);
        probe.weights[l](i, j) = x - h;
        const double down = goa::loss(probe, batch, kind);
        probe.weights[l](i, j) = x;
        gw(i, j) = (up - down) / (2.0 * h);
      }
    }
    Vector gb(net.biases[l].size());
    for (Eigen::Index i = 0; i < gb.size(); ++i) {
      const double x = probe.biases[l](i);
      probe.biases[l](i) = x + h;
      const double up = goa::loss(probe, batch, kind);
      probe.biases[l](i) = x - h;
      const double down = goa::loss(probe, batch, kind);
      probe.biases[l](i) = x;
      gb(i) = (up - down) / (2.0 * h);
    }
    g.weights.push_back(std::move(gw));
    g.biases.push_back(std::move(gb));
  }
  return g;
}

}  // namespace oracle
