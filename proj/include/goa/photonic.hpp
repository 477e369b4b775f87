#pragma once

// MZI, interleaved-mesh and module-grid simulation.
//
// Conventions: an MZI acting on ports (p, p+1) has the transfer matrix
//
//   T(theta, phi) = i e^{i theta/2} [[e^{i phi} sin(theta/2),  cos(theta/2)],
//                                    [e^{i phi} cos(theta/2), -sin(theta/2)]]
//
// Light enters a module from the left: the diagonal input column is applied
// first, then the mesh columns in order, then the per-port output phases.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace goa {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class MziSetting {
 public:
  MziSetting() = default;
  MziSetting(double theta, double phi);

  double theta() const noexcept { return theta_; }
  double phi() const noexcept { return phi_; }

  /// theta = pi, phi = pi: T is exactly the 2x2 identity.
  static MziSetting bar() noexcept;
  /// theta = 0, phi = 0: full crossing with a global factor i.
  static MziSetting cross() noexcept;

  friend bool operator==(const MziSetting&, const MziSetting&) = default;

 private:
  double theta_ = 0.0;
  double phi_ = 0.0;
};

/// Wraps an angle into [0, 2pi).
double normalize_angle(double radians);

Eigen::Matrix2cd mzi_transfer(const MziSetting& setting);

struct PlacedMzi {
  std::size_t port = 0;  // the MZI couples ports `port` and `port + 1`
  MziSetting setting;

  friend bool operator==(const PlacedMzi&, const PlacedMzi&) = default;
};

/// A k-port rectangular (interleaved) mesh preceded by a diagonal amplitude
/// column. Column c (0-based) holds MZIs on ports c%2, c%2+2, ...
struct MeshProgram {
  std::size_t size = 0;
  std::vector<std::vector<PlacedMzi>> columns;
  std::vector<double> diagonal;       // Sigma, applied at the inputs
  std::vector<double> output_phases;  // radians, applied at the outputs

  /// Full rectangular mesh with every MZI in the bar state, unit diagonal and
  /// zero output phases: reconstructs to exactly I.
  static MeshProgram identity(std::size_t k);

  std::size_t mzi_count() const;

  /// Throws goa::Error(invariant) if the column structure is not the
  /// interleaved pattern, ports overlap, or vector lengths disagree.
  void validate() const;

  friend bool operator==(const MeshProgram&, const MeshProgram&) = default;
};

struct ComplexSignalVector {
  CVector amplitudes;
  std::size_t wavelength = 0;
};

CVector mesh_forward(const MeshProgram& program, const CVector& input);
ComplexSignalVector mesh_forward(const MeshProgram& program,
                                 const ComplexSignalVector& input);

CMatrix reconstruct(const MeshProgram& program);

/// Rectangular nulling decomposition of a unitary into a mesh program with
/// unit diagonal. Residual phases land in `output_phases`, so
/// reconstruct(decompose_unitary(U)) == U.
MeshProgram decompose_unitary(const CMatrix& unitary, double tolerance = 1e-8);

/// ||A^H A - I||_F.
double unitarity_deviation(const CMatrix& m);

/// WDM accumulation at the bottom of one grid column. `wavelengths[r]` is the
/// channel of `outputs[r]`. Returns the detected real partial sums. Throws
/// RoutingViolation naming the first pair of conflicting entries.
Vector accumulate_column(std::span<const CVector> outputs,
                         std::span<const std::size_t> wavelengths,
                         std::size_t column = 0);

struct GoaArch {
  std::size_t m = 1;  // module rows
  std::size_t n = 1;  // module columns
  std::size_t k = 2;  // ports per module
  std::size_t wavelengths = 1;

  std::size_t modules() const noexcept { return m * n; }
  /// Throws goa::Error(invalid_argument) on m, n < 1, k < 2 or m > W.
  void validate() const;

  friend bool operator==(const GoaArch&, const GoaArch&) = default;
};

/// Programming of every module slot for one pass.
struct GridProgram {
  GoaArch arch;
  std::vector<std::optional<MeshProgram>> modules;  // m*n, row-major
  /// feeds_right[r*n + c]: the MRRs after module (r, c) pass light
  /// horizontally into module (r, c+1) instead of dropping it into column c.
  std::vector<bool> feeds_right;
  std::vector<std::size_t> row_wavelengths;  // one channel per module row

  explicit GridProgram(const GoaArch& arch);

  std::optional<MeshProgram>& at(std::size_t row, std::size_t col) {
    return modules[row * arch.n + col];
  }
  const std::optional<MeshProgram>& at(std::size_t row, std::size_t col) const {
    return modules[row * arch.n + col];
  }
};

/// One optical pass: every module row receives its k-slice of `input`
/// (length m*k) through the 1-to-n splitters; each column's module outputs
/// are summed by WDM and detected. Returns n*k detected values.
Vector simulate_goa(const GridProgram& grid, const Vector& input);

}  // namespace goa
