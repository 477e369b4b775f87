#include "goa/photonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "goa/error.hpp"

namespace goa {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

// Signal-order MZI operation produced by the nulling procedure.
struct MeshOp {
  std::size_t port;
  MziSetting setting;
};

// M = diag(d1, d2) * T(theta, phi) for an arbitrary 2x2 unitary M. The
// factorization always exists: unitarity fixes arg M00 + arg M11 - arg M01 -
// arg M10 = pi, which is exactly the phase relation T carries.
struct DiagMzi {
  Complex d1, d2;
  MziSetting setting;
};

DiagMzi factor_diag_mzi(const Eigen::Matrix2cd& m) {
  const double s = std::abs(m(0, 0));
  const double c = std::abs(m(0, 1));
  const double half = std::atan2(s, c);  // theta/2 in [0, pi/2]
  const double theta = 2.0 * half;
  const double sn = std::sin(half);
  const double cs = std::cos(half);
  const Complex g = kI * std::exp(kI * half);

  Complex eiphi{1.0, 0.0};
  Complex d1, d2;
  if (cs >= sn) {
    d1 = m(0, 1) / (cs * g);
    if (sn > 1e-300) eiphi = m(0, 0) / (d1 * g * sn);
    d2 = m(1, 0) / (cs * g * eiphi);
  } else {
    d2 = -m(1, 1) / (sn * g);
    if (cs > 1e-300) eiphi = m(1, 0) / (d2 * g * cs);
    d1 = m(0, 0) / (sn * g * eiphi);
  }
  return {d1, d2, MziSetting(theta, std::arg(eiphi))};
}

void apply_rows(CMatrix& target, std::size_t port, const Eigen::Matrix2cd& t) {
  for (Eigen::Index col = 0; col < target.cols(); ++col) {
    const Complex a = target(port, col);
    const Complex b = target(port + 1, col);
    target(port, col) = t(0, 0) * a + t(0, 1) * b;
    target(port + 1, col) = t(1, 0) * a + t(1, 1) * b;
  }
}

void apply_cols(CMatrix& target, std::size_t port, const Eigen::Matrix2cd& t) {
  for (Eigen::Index row = 0; row < target.rows(); ++row) {
    const Complex a = target(row, port);
    const Complex b = target(row, port + 1);
    target(row, port) = a * t(0, 0) + b * t(1, 0);
    target(row, port + 1) = a * t(0, 1) + b * t(1, 1);
  }
}

}  // namespace

double normalize_angle(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

MziSetting::MziSetting(double theta, double phi)
    : theta_(normalize_angle(theta)), phi_(normalize_angle(phi)) {}

MziSetting MziSetting::bar() noexcept {
  MziSetting s;
  s.theta_ = std::numbers::pi;
  s.phi_ = std::numbers::pi;
  return s;
}

MziSetting MziSetting::cross() noexcept { return MziSetting{}; }

Eigen::Matrix2cd mzi_transfer(const MziSetting& setting) {
  const double half = 0.5 * setting.theta();
  const Complex g = kI * std::exp(kI * half);
  const Complex eiphi = std::exp(kI * setting.phi());
  const double s = std::sin(half);
  const double c = std::cos(half);
  Eigen::Matrix2cd t;
  t << g * eiphi * s, g * c,  //
      g * eiphi * c, -g * s;
  return t;
}

MeshProgram MeshProgram::identity(std::size_t k) {
  MeshProgram p;
  p.size = k;
  p.columns.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t port = c % 2; port + 1 < k; port += 2) {
      p.columns[c].push_back({port, MziSetting::bar()});
    }
  }
  while (!p.columns.empty() && p.columns.back().empty()) p.columns.pop_back();
  p.diagonal.assign(k, 1.0);
  p.output_phases.assign(k, 0.0);
  return p;
}

std::size_t MeshProgram::mzi_count() const {
  std::size_t total = 0;
  for (const auto& col : columns) total += col.size();
  return total;
}

void MeshProgram::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorKind::invariant, "invalid mesh program: " + msg);
  };
  if (diagonal.size() != size) fail("diagonal length != size");
  if (output_phases.size() != size) fail("output phase length != size");
  for (double d : diagonal) {
    if (!std::isfinite(d) || d < 0.0) fail("diagonal entries must be finite and >= 0");
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::size_t expected = c % 2;
    for (const auto& mzi : columns[c]) {
      if (mzi.port + 1 >= size) fail("MZI port out of range in column " + std::to_string(c));
      if (mzi.port < expected || (mzi.port - c % 2) % 2 != 0) {
        fail("column " + std::to_string(c) + " breaks the interleaved pattern");
      }
      expected = mzi.port + 2;
    }
  }
}

CVector mesh_forward(const MeshProgram& program, const CVector& input) {
  if (static_cast<std::size_t>(input.size()) != program.size) {
    throw Error(ErrorKind::dimension_mismatch,
                "mesh_forward: input length " + std::to_string(input.size()) +
                    " != mesh size " + std::to_string(program.size));
  }
  CVector signal = input;
  for (std::size_t i = 0; i < program.size; ++i) signal(i) *= program.diagonal[i];
  for (const auto& column : program.columns) {
    for (const auto& mzi : column) {
      const Eigen::Matrix2cd t = mzi_transfer(mzi.setting);
      const Complex a = signal(mzi.port);
      const Complex b = signal(mzi.port + 1);
      signal(mzi.port) = t(0, 0) * a + t(0, 1) * b;
      signal(mzi.port + 1) = t(1, 0) * a + t(1, 1) * b;
    }
  }
  for (std::size_t i = 0; i < program.size; ++i) {
    signal(i) *= std::exp(kI * program.output_phases[i]);
  }
  return signal;
}

ComplexSignalVector mesh_forward(const MeshProgram& program,
                                 const ComplexSignalVector& input) {
  return {mesh_forward(program, input.amplitudes), input.wavelength};
}

CMatrix reconstruct(const MeshProgram& program) {
  const auto k = static_cast<Eigen::Index>(program.size);
  CMatrix result = CMatrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) result(i, i) = program.diagonal[i];
  for (const auto& column : program.columns) {
    for (const auto& mzi : column) apply_rows(result, mzi.port, mzi_transfer(mzi.setting));
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    result.row(i) *= std::exp(kI * program.output_phases[i]);
  }
  return result;
}

double unitarity_deviation(const CMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols())).norm();
}

MeshProgram decompose_unitary(const CMatrix& unitary, double tolerance) {
  if (unitary.rows() != unitary.cols() || unitary.rows() < 1) {
    throw Error(ErrorKind::dimension_mismatch, "decompose_unitary: matrix must be square");
  }
  if (!unitary.allFinite()) {
    throw Error(ErrorKind::non_unitary, "decompose_unitary: non-finite entries");
  }
  const double deviation = unitarity_deviation(unitary);
  if (!(deviation < tolerance)) {
    throw Error(ErrorKind::non_unitary,
                "decompose_unitary: matrix is not unitary (deviation ||U^H U - I||_F = " +
                    std::to_string(deviation) + ")");
  }

  const auto n = static_cast<std::size_t>(unitary.rows());
  CMatrix work = unitary;
  std::vector<MeshOp> right_ops;  // applied first, in this order
  std::vector<MeshOp> left_ops;   // as found; undone in reverse later

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (i % 2 == 0) {
      // Null work(n-1-j, i-j) by mixing columns (i-j, i-j+1) from the right.
      for (std::size_t j = 0; j <= i; ++j) {
        const std::size_t row = n - 1 - j;
        const std::size_t col = i - j;
        const Complex a = work(row, col);
        const Complex b = work(row, col + 1);
        const double theta = 2.0 * std::atan2(std::abs(b), std::abs(a));
        const double phi = std::arg(a) - std::arg(-b);
        const MziSetting setting(theta, phi);
        apply_cols(work, col, mzi_transfer(setting).adjoint());
        right_ops.push_back({col, setting});
      }
    } else {
      // Null work(n+j-i-2, j-1) by mixing rows (n+j-i-3, n+j-i-2) from the left.
      for (std::size_t j = 1; j <= i + 1; ++j) {
        const std::size_t row = n + j - i - 2;
        const std::size_t col = j - 1;
        const Complex a = work(row - 1, col);
        const Complex b = work(row, col);
        const double theta = 2.0 * std::atan2(std::abs(a), std::abs(b));
        const double phi = std::arg(b) - std::arg(a);
        const MziSetting setting(theta, phi);
        apply_rows(work, row - 1, mzi_transfer(setting));
        left_ops.push_back({row - 1, setting});
      }
    }
  }

  // work is now diagonal with unit-modulus entries D, and
  //   U = L1^H ... Lp^H D Rq ... R1.
  // Commute D to the outputs: Lt^H D = D' T'.
  std::vector<Complex> phases(n);
  for (std::size_t i = 0; i < n; ++i) phases[i] = work(i, i) / std::abs(work(i, i));
  std::vector<MeshOp> moved(left_ops.size());
  for (std::size_t t = left_ops.size(); t-- > 0;) {
    const auto& op = left_ops[t];
    Eigen::Matrix2cd local = mzi_transfer(op.setting).adjoint();
    local.col(0) *= phases[op.port];
    local.col(1) *= phases[op.port + 1];
    const DiagMzi f = factor_diag_mzi(local);
    phases[op.port] = f.d1;
    phases[op.port + 1] = f.d2;
    moved[t] = {op.port, f.setting};
  }

  // Signal order: R1..Rq, then T'_p..T'_1.
  std::vector<MeshOp> sequence = right_ops;
  for (std::size_t t = moved.size(); t-- > 0;) sequence.push_back(moved[t]);

  MeshProgram program = MeshProgram::identity(n);
  std::vector<std::size_t> depth(n, 0);
  std::vector<std::vector<bool>> filled(program.columns.size());
  for (std::size_t c = 0; c < program.columns.size(); ++c) {
    filled[c].assign(program.columns[c].size(), false);
  }
  for (const auto& op : sequence) {
    const std::size_t layer = std::max(depth[op.port], depth[op.port + 1]);
    if (layer >= program.columns.size() || (op.port % 2) != (layer % 2)) {
      throw Error(ErrorKind::invariant, "decompose_unitary: MZI schedule left the rectangular mesh");
    }
    const std::size_t slot = (op.port - layer % 2) / 2;
    if (filled[layer][slot]) {
      throw Error(ErrorKind::invariant, "decompose_unitary: duplicate MZI slot");
    }
    program.columns[layer][slot].setting = op.setting;
    filled[layer][slot] = true;
    depth[op.port] = depth[op.port + 1] = layer + 1;
  }
  for (std::size_t i = 0; i < n; ++i) program.output_phases[i] = normalize_angle(std::arg(phases[i]));
  return program;
}

Vector accumulate_column(std::span<const CVector> outputs,
                         std::span<const std::size_t> wavelengths,
                         std::size_t column) {
  if (outputs.size() != wavelengths.size()) {
    throw Error(ErrorKind::dimension_mismatch,
                "accumulate_column: one wavelength per module output required");
  }
  for (std::size_t a = 0; a < wavelengths.size(); ++a) {
    for (std::size_t b = a + 1; b < wavelengths.size(); ++b) {
      if (wavelengths[a] == wavelengths[b]) {
        throw RoutingViolation(column, a, b, wavelengths[a]);
      }
    }
  }
  if (outputs.empty()) return {};
  CVector sum = CVector::Zero(outputs.front().size());
  for (const auto& out : outputs) {
    if (out.size() != sum.size()) {
      throw Error(ErrorKind::dimension_mismatch, "accumulate_column: output lengths differ");
    }
    sum += out;
  }
  return sum.real();
}

void GoaArch::validate() const {
  if (m < 1 || n < 1) throw Error(ErrorKind::invalid_argument, "arch: m and n must be >= 1");
  if (k < 2) throw Error(ErrorKind::invalid_argument, "arch: k must be >= 2");
  if (m > wavelengths) {
    throw Error(ErrorKind::invalid_argument,
                "arch: m = " + std::to_string(m) + " rows need distinct wavelengths but only W = " +
                    std::to_string(wavelengths) + " are available");
  }
}

GridProgram::GridProgram(const GoaArch& a)
    : arch(a), modules(a.m * a.n), feeds_right(a.m * a.n, false), row_wavelengths(a.m) {
  for (std::size_t r = 0; r < a.m; ++r) row_wavelengths[r] = r;
}

Vector simulate_goa(const GridProgram& grid, const Vector& input) {
  const auto& arch = grid.arch;
  const std::size_t k = arch.k;
  if (static_cast<std::size_t>(input.size()) != arch.m * k) {
    throw Error(ErrorKind::dimension_mismatch,
                "simulate_goa: input length " + std::to_string(input.size()) + " != m*k = " +
                    std::to_string(arch.m * k));
  }
  if (grid.modules.size() != arch.m * arch.n || grid.feeds_right.size() != arch.m * arch.n ||
      grid.row_wavelengths.size() != arch.m) {
    throw Error(ErrorKind::invalid_argument, "simulate_goa: grid program does not match arch");
  }
  for (std::size_t r = 0; r < arch.m; ++r) {
    if (grid.row_wavelengths[r] >= arch.wavelengths) {
      throw Error(ErrorKind::invalid_argument,
                  "simulate_goa: row " + std::to_string(r) + " uses wavelength " +
                      std::to_string(grid.row_wavelengths[r]) + " >= W");
    }
  }

  Vector detected = Vector::Zero(static_cast<Eigen::Index>(arch.n * k));
  // Light travelling horizontally into the next column, per row.
  std::vector<std::optional<CVector>> carry(arch.m);
  for (std::size_t c = 0; c < arch.n; ++c) {
    std::vector<CVector> outputs;
    std::vector<std::size_t> channels;
    std::vector<std::optional<CVector>> next_carry(arch.m);
    for (std::size_t r = 0; r < arch.m; ++r) {
      const auto& module = grid.at(r, c);
      const bool feeds = grid.feeds_right[r * arch.n + c];
      if (!module) {
        if (feeds || carry[r]) {
          throw Error(ErrorKind::invalid_argument,
                      "simulate_goa: horizontal link at empty module (" + std::to_string(r) +
                          ", " + std::to_string(c) + ")");
        }
        continue;
      }
      if (module->size != k) {
        throw Error(ErrorKind::dimension_mismatch, "simulate_goa: module size != k");
      }
      CVector in;
      if (carry[r]) {
        in = *carry[r];
      } else {
        in = input.segment(static_cast<Eigen::Index>(r * k), static_cast<Eigen::Index>(k))
                 .cast<Complex>();
      }
      CVector out = mesh_forward(*module, in);
      if (feeds) {
        if (c + 1 >= arch.n) {
          throw Error(ErrorKind::invalid_argument,
                      "simulate_goa: module (" + std::to_string(r) + ", " + std::to_string(c) +
                          ") feeds right off the grid edge");
        }
        next_carry[r] = std::move(out);
      } else {
        outputs.push_back(std::move(out));
        channels.push_back(grid.row_wavelengths[r]);
      }
    }
    if (!outputs.empty()) {
      // Report conflicting grid rows, not positions in the local list.
      std::vector<std::size_t> rows;
      for (std::size_t r = 0; r < arch.m; ++r) {
        if (grid.at(r, c) && !grid.feeds_right[r * arch.n + c]) rows.push_back(r);
      }
      try {
        detected.segment(static_cast<Eigen::Index>(c * k), static_cast<Eigen::Index>(k)) =
            accumulate_column(outputs, channels, c);
      } catch (const RoutingViolation& v) {
        throw RoutingViolation(c, rows[v.row_a()], rows[v.row_b()], v.wavelength());
      }
    }
    carry = std::move(next_carry);
  }
  return detected;
}

}  // namespace goa
