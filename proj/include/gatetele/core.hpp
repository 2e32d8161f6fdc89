#pragma once

// Dense complex linear algebra for small multi-qubit registers (n <= 4).
//
// Qubits are labelled 1..n and qubit 1 is the most significant bit of the
// basis index, so |10> on (1,2) is index 2. Polarization uses H = |0>,
// V = |1>; path qubits use their path label verbatim.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gatetele {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr int kMaxQubits = 4;
inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-8;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kImpossibleBranch = 1e-14;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ImpossibleOutcome : public Error {
 public:
  using Error::Error;
};

class ReconstructionError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline int qubits_for_dim(Eigen::Index dim) {
  int n = 0;
  Eigen::Index d = 1;
  while (d < dim) {
    d *= 2;
    ++n;
  }
  if (d != dim || dim < 2) {
    throw DimensionError("dimension " + std::to_string(dim) + " is not 2^n with n >= 1");
  }
  return n;
}

// Bit position (from the least significant end) of 1-based qubit q in an
// n-qubit register.
inline int bit_of(int qubit, int num_qubits) { return num_qubits - qubit; }

inline void check_targets(std::span<const int> targets, int num_qubits) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 1 || targets[i] > num_qubits) {
      throw InvalidArgument("qubit " + std::to_string(targets[i]) + " out of range 1.." +
                            std::to_string(num_qubits));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i] == targets[j]) {
        throw InvalidArgument("duplicate qubit " + std::to_string(targets[i]));
      }
    }
  }
}

// Index of the sub-register formed by `targets` (first target most
// significant) inside full basis index `full`.
inline Eigen::Index sub_index(Eigen::Index full, std::span<const int> targets, int num_qubits) {
  Eigen::Index s = 0;
  for (int q : targets) {
    s = (s << 1) | ((full >> bit_of(q, num_qubits)) & 1);
  }
  return s;
}

inline Eigen::Index with_sub_index(Eigen::Index full, Eigen::Index sub, std::span<const int> targets,
                                   int num_qubits) {
  const auto k = static_cast<int>(targets.size());
  for (int i = 0; i < k; ++i) {
    const int bit = bit_of(targets[static_cast<std::size_t>(i)], num_qubits);
    const Eigen::Index v = (sub >> (k - 1 - i)) & 1;
    full = (full & ~(Eigen::Index{1} << bit)) | (v << bit);
  }
  return full;
}

}  // namespace detail

/// Normalized state vector over 1..4 qubits.
class PureState {
 public:
  explicit PureState(CVector amplitudes) : amps_(std::move(amplitudes)) {
    num_qubits_ = detail::qubits_for_dim(amps_.size());
    if (num_qubits_ > kMaxQubits) {
      throw DimensionError("pure states are limited to " + std::to_string(kMaxQubits) + " qubits");
    }
    if (std::abs(amps_.squaredNorm() - 1.0) > kNormTol) {
      throw InvalidArgument("state is not normalized (norm^2 = " +
                            std::to_string(amps_.squaredNorm()) + ")");
    }
  }

  /// Rescales `amplitudes` to unit norm. Throws on the zero vector.
  static PureState normalized(CVector amplitudes) {
    const double n = amplitudes.norm();
    if (n < kImpossibleBranch) throw InvalidArgument("cannot normalize the zero vector");
    return PureState(amplitudes / n);
  }

  static PureState basis(int num_qubits, Eigen::Index index) {
    CVector v = CVector::Zero(Eigen::Index{1} << num_qubits);
    if (index < 0 || index >= v.size()) throw InvalidArgument("basis index out of range");
    v(index) = 1.0;
    return PureState(std::move(v));
  }

  [[nodiscard]] int num_qubits() const noexcept { return num_qubits_; }
  [[nodiscard]] Eigen::Index dim() const noexcept { return amps_.size(); }
  [[nodiscard]] const CVector& amplitudes() const noexcept { return amps_; }
  [[nodiscard]] Complex operator[](Eigen::Index i) const { return amps_(i); }

 private:
  CVector amps_;
  int num_qubits_ = 0;
};

/// Hermitian, unit-trace, positive semidefinite matrix (within tolerances).
class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix elements) : rho_(std::move(elements)) {
    if (rho_.rows() != rho_.cols()) throw DimensionError("density matrix must be square");
    num_qubits_ = detail::qubits_for_dim(rho_.rows());
    if (num_qubits_ > kMaxQubits) {
      throw DimensionError("density matrices are limited to " + std::to_string(kMaxQubits) + " qubits");
    }
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kHermTol) {
      throw InvalidArgument("density matrix is not Hermitian");
    }
    if (std::abs(rho_.trace() - Complex(1.0)) > kTraceTol) {
      throw InvalidArgument("density matrix trace is not 1");
    }
    if (min_eigenvalue() < -kPsdTol) {
      throw InvalidArgument("density matrix has a negative eigenvalue " +
                            std::to_string(min_eigenvalue()));
    }
  }

  static DensityMatrix from_pure(const PureState& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
  }

  static DensityMatrix maximally_mixed(int num_qubits) {
    const Eigen::Index d = Eigen::Index{1} << num_qubits;
    return DensityMatrix(CMatrix::Identity(d, d) / static_cast<double>(d));
  }

  [[nodiscard]] int num_qubits() const noexcept { return num_qubits_; }
  [[nodiscard]] Eigen::Index dim() const noexcept { return rho_.rows(); }
  [[nodiscard]] const CMatrix& elements() const noexcept { return rho_; }
  [[nodiscard]] Complex operator()(Eigen::Index r, Eigen::Index c) const { return rho_(r, c); }

  [[nodiscard]] double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  CMatrix rho_;
  int num_qubits_ = 0;
};

/// Square operator on 2^n dimensions; records whether it is unitary.
class Operator {
 public:
  explicit Operator(CMatrix elements) : m_(std::move(elements)) {
    if (m_.rows() != m_.cols()) throw DimensionError("operator must be square");
    num_qubits_ = detail::qubits_for_dim(m_.rows());
    const CMatrix id = CMatrix::Identity(m_.rows(), m_.cols());
    is_unitary_ = (m_.adjoint() * m_ - id).cwiseAbs().maxCoeff() <= kUnitaryTol;
  }

  [[nodiscard]] int num_qubits() const noexcept { return num_qubits_; }
  [[nodiscard]] Eigen::Index dim() const noexcept { return m_.rows(); }
  [[nodiscard]] const CMatrix& elements() const noexcept { return m_; }
  [[nodiscard]] bool is_unitary() const noexcept { return is_unitary_; }

  [[nodiscard]] Operator adjoint() const { return Operator(m_.adjoint()); }

  friend Operator operator*(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw DimensionError("operator product dimension mismatch");
    return Operator(a.m_ * b.m_);
  }
  friend Operator operator*(Complex s, const Operator& a) { return Operator(s * a.m_); }

 private:
  CMatrix m_;
  int num_qubits_ = 0;
  bool is_unitary_ = false;
};

// ---------------------------------------------------------------------------
// Named single- and two-qubit objects

namespace gates {

inline Operator identity(int num_qubits = 1) {
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  return Operator(CMatrix::Identity(d, d));
}

inline Operator pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return Operator(m);
}

inline Operator pauli_y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return Operator(m);
}

inline Operator pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return Operator(m);
}

inline Operator hadamard() {
  CMatrix m(2, 2);
  m << 1, 1, 1, -1;
  return Operator(m / std::numbers::sqrt2);
}

/// CNOT with the first qubit as control.
inline Operator cnot() {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = 1;
  m(2, 3) = m(3, 2) = 1;
  return Operator(m);
}

/// Pauli index 0..3 -> I, X, Y, Z.
inline Operator pauli(int k) {
  switch (k) {
    case 0: return identity();
    case 1: return pauli_x();
    case 2: return pauli_y();
    case 3: return pauli_z();
    default: throw InvalidArgument("pauli index must be 0..3");
  }
}

}  // namespace gates

/// Single-qubit polarization state by label: H, V, D, A, R, L.
inline PureState polarization_state(char label) {
  const double s = 1.0 / std::numbers::sqrt2;
  CVector v(2);
  switch (label) {
    case 'H': v << 1, 0; break;
    case 'V': v << 0, 1; break;
    case 'D': v << s, s; break;
    case 'A': v << s, -s; break;
    case 'R': v << s, Complex(0, s); break;
    case 'L': v << s, Complex(0, -s); break;
    default: throw InvalidArgument(std::string("unknown polarization label '") + label + "'");
  }
  return PureState(v);
}

/// Path-qubit diagonal basis states |+> and |->.
inline PureState plus_state() { return polarization_state('D'); }
inline PureState minus_state() { return polarization_state('A'); }

// ---------------------------------------------------------------------------
// Composition

namespace detail {
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}
}  // namespace detail

inline PureState tensor(const PureState& a, const PureState& b) {
  return PureState(CVector(detail::kron(a.amplitudes(), b.amplitudes())));
}

inline Operator tensor(const Operator& a, const Operator& b) {
  return Operator(detail::kron(a.elements(), b.elements()));
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(detail::kron(a.elements(), b.elements()));
}

/// Rearranges qubits so that new qubit k+1 is old qubit order[k].
inline CVector reorder_qubits(const CVector& v, std::span<const int> order) {
  const int n = detail::qubits_for_dim(v.size());
  if (static_cast<int>(order.size()) != n) throw InvalidArgument("reorder needs a full permutation");
  detail::check_targets(order, n);
  CVector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) out(j) = v(detail::with_sub_index(0, j, order, n));
  return out;
}

inline CMatrix reorder_qubits(const CMatrix& m, std::span<const int> order) {
  const int n = detail::qubits_for_dim(m.rows());
  if (static_cast<int>(order.size()) != n) throw InvalidArgument("reorder needs a full permutation");
  detail::check_targets(order, n);
  std::vector<Eigen::Index> src(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    src[static_cast<std::size_t>(j)] = detail::with_sub_index(0, j, order, n);
  }
  CMatrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out(r, c) = m(src[static_cast<std::size_t>(r)], src[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

/// Lifts `op` acting on `targets` (first target = most significant qubit of
/// op) to the full n-qubit space.
inline CMatrix embed(const Operator& op, std::span<const int> targets, int num_qubits) {
  detail::check_targets(targets, num_qubits);
  if (op.dim() != (Eigen::Index{1} << targets.size())) {
    throw DimensionError("operator dimension " + std::to_string(op.dim()) + " does not match " +
                         std::to_string(targets.size()) + " target qubit(s)");
  }
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  const CMatrix& m = op.elements();
  CMatrix full = CMatrix::Zero(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const Eigen::Index sc = detail::sub_index(c, targets, num_qubits);
    for (Eigen::Index sr = 0; sr < m.rows(); ++sr) {
      const Complex v = m(sr, sc);
      if (v == Complex(0.0)) continue;
      full(detail::with_sub_index(c, sr, targets, num_qubits), c) += v;
    }
  }
  return full;
}

inline CMatrix embed(const Operator& op, std::initializer_list<int> targets, int num_qubits) {
  return embed(op, std::span<const int>(targets.begin(), targets.size()), num_qubits);
}

/// Applies a unitary to the listed qubits of a pure state.
inline PureState apply(const Operator& op, const PureState& state, std::span<const int> targets) {
  if (!op.is_unitary()) throw InvalidArgument("apply() on a pure state requires a unitary operator");
  CVector out = embed(op, targets, state.num_qubits()) * state.amplitudes();
  return PureState::normalized(std::move(out));
}

inline PureState apply(const Operator& op, const PureState& state, std::initializer_list<int> targets) {
  return apply(op, state, std::span<const int>(targets.begin(), targets.size()));
}

/// Unitary conjugation U rho U^dagger on the listed qubits.
inline DensityMatrix apply(const Operator& op, const DensityMatrix& rho, std::span<const int> targets) {
  if (!op.is_unitary()) throw InvalidArgument("apply() on a density matrix requires a unitary operator");
  const CMatrix u = embed(op, targets, rho.num_qubits());
  CMatrix out = u * rho.elements() * u.adjoint();
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

inline DensityMatrix apply(const Operator& op, const DensityMatrix& rho, std::initializer_list<int> targets) {
  return apply(op, rho, std::span<const int>(targets.begin(), targets.size()));
}

/// Reduced matrix on `keep` (in the given order) of an arbitrary square matrix.
inline CMatrix partial_trace(const CMatrix& m, std::span<const int> keep, int num_qubits) {
  if (keep.empty()) throw InvalidArgument("partial_trace needs at least one qubit to keep");
  detail::check_targets(keep, num_qubits);
  std::vector<int> traced;
  for (int q = 1; q <= num_qubits; ++q) {
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) traced.push_back(q);
  }
  const Eigen::Index dk = Eigen::Index{1} << keep.size();
  const Eigen::Index dt = Eigen::Index{1} << traced.size();
  CMatrix out = CMatrix::Zero(dk, dk);
  for (Eigen::Index r = 0; r < dk; ++r) {
    for (Eigen::Index c = 0; c < dk; ++c) {
      Complex acc = 0.0;
      for (Eigen::Index t = 0; t < dt; ++t) {
        Eigen::Index fr = detail::with_sub_index(0, r, keep, num_qubits);
        Eigen::Index fc = detail::with_sub_index(0, c, keep, num_qubits);
        fr = detail::with_sub_index(fr, t, traced, num_qubits);
        fc = detail::with_sub_index(fc, t, traced, num_qubits);
        acc += m(fr, fc);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  CMatrix out = partial_trace(rho.elements(), keep, rho.num_qubits());
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

// ---------------------------------------------------------------------------
// Measurement

enum class Basis { computational, diagonal };

/// Outcome 0 is |0> (computational) or |+> (diagonal); outcome 1 is |1> or |->.
inline PureState basis_vector(Basis basis, int outcome) {
  if (outcome != 0 && outcome != 1) throw InvalidArgument("measurement outcome must be 0 or 1");
  if (basis == Basis::computational) return PureState::basis(1, outcome);
  return outcome == 0 ? plus_state() : minus_state();
}

inline Operator basis_projector(Basis basis, int outcome) {
  const CVector v = basis_vector(basis, outcome).amplitudes();
  return Operator(v * v.adjoint());
}

struct Measurement {
  int outcome = 0;
  double probability = 0.0;
  PureState collapsed;
};

namespace detail {
inline std::pair<double, CVector> project(const PureState& state, int qubit, Basis basis, int outcome) {
  const int t[] = {qubit};
  const CVector v = embed(basis_projector(basis, outcome), t, state.num_qubits()) * state.amplitudes();
  return {v.squaredNorm(), v};
}
}  // namespace detail

/// Projects `qubit` onto the requested outcome. Throws ImpossibleOutcome when
/// that branch has probability below 1e-14.
inline Measurement project_measure(const PureState& state, int qubit, Basis basis, int outcome) {
  auto [p, v] = detail::project(state, qubit, basis, outcome);
  if (p < kImpossibleBranch) {
    throw ImpossibleOutcome("measurement branch has probability " + std::to_string(p));
  }
  return Measurement{outcome, std::min(p, 1.0), PureState(v / std::sqrt(p))};
}

/// Samples the outcome by the Born rule.
template <std::uniform_random_bit_generator Rng>
Measurement project_measure(const PureState& state, int qubit, Basis basis, Rng& rng) {
  const double p0 = detail::project(state, qubit, basis, 0).first;
  std::bernoulli_distribution one(std::clamp(1.0 - p0, 0.0, 1.0));
  return project_measure(state, qubit, basis, one(rng) ? 1 : 0);
}

// ---------------------------------------------------------------------------
// Metrics

/// <psi|rho|psi>.
inline double state_fidelity(const DensityMatrix& rho, const PureState& target) {
  if (rho.dim() != target.dim()) throw DimensionError("state_fidelity dimension mismatch");
  const CVector& t = target.amplitudes();
  return std::clamp(t.dot(rho.elements() * t).real(), 0.0, 1.0 + kHermTol);
}

/// |<phi|psi>|^2.
inline double state_fidelity(const PureState& psi, const PureState& phi) {
  if (psi.dim() != phi.dim()) throw DimensionError("state_fidelity dimension mismatch");
  return std::norm(phi.amplitudes().dot(psi.amplitudes()));
}

inline double trace_distance(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("trace_distance dimension mismatch");
  const CMatrix d = a - b;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.elements(), b.elements());
}

/// Haar-random pure state from normalized complex Gaussians.
template <std::uniform_random_bit_generator Rng>
PureState haar_random_state(int num_qubits, Rng& rng) {
  std::normal_distribution<double> g;
  CVector v(Eigen::Index{1} << num_qubits);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(g(rng), g(rng));
  return PureState::normalized(std::move(v));
}

/// Hermiticity, trace and eigenvalue report for an arbitrary square matrix.
struct PhysicalityReport {
  double hermiticity_error = 0.0;
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;

  [[nodiscard]] bool passes(double psd_floor = -kPsdTol) const {
    return hermiticity_error <= kHermTol && trace_error <= kTraceTol && min_eigenvalue >= psd_floor;
  }
};

inline PhysicalityReport check_physicality(const CMatrix& m) {
  PhysicalityReport r;
  r.hermiticity_error = (m - m.adjoint()).cwiseAbs().maxCoeff();
  r.trace_error = std::abs(m.trace() - Complex(1.0));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  return r;
}

}  // namespace gatetele
