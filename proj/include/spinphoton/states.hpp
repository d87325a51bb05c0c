#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <json.hpp>

#include "spinphoton/bases.hpp"

namespace spinphoton {

inline constexpr double kUnitarityTol = 1e-12;
inline constexpr double kPhaseCompareTol = 1e-10;

/// Normalized ket over a declared ordered basis. Immutable after construction.
class StateVector {
 public:
  StateVector(Eigen::VectorXcd amplitudes, BasisTag basis)
      : amps_(std::move(amplitudes)), basis_(basis) {
    if (static_cast<std::size_t>(amps_.size()) != basis_dimension(basis_))
      throw std::invalid_argument("StateVector: dimension does not match basis");
    const double n = amps_.norm();
    if (!(n > 0.0)) throw std::invalid_argument("StateVector: zero norm");
    if (std::abs(n - 1.0) > 1e-9) amps_ /= n;
  }

  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  BasisTag basis() const { return basis_; }
  Eigen::Index dimension() const { return amps_.size(); }
  std::complex<double> operator[](Eigen::Index i) const { return amps_[i]; }

  /// Equality up to a unit-modulus global phase.
  bool equal_up_to_phase(const StateVector& other, double tol = kPhaseCompareTol) const {
    if (basis_ != other.basis_) return false;
    const std::complex<double> overlap = amps_.dot(other.amps_);
    return std::abs(std::abs(overlap) - 1.0) < tol;
  }

  nlohmann::json to_json() const;
  static StateVector from_json(const nlohmann::json& j);

 private:
  Eigen::VectorXcd amps_;
  BasisTag basis_;
};

inline StateVector make_state(BasisTag basis, std::initializer_list<std::complex<double>> amps) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(amps.size()));
  Eigen::Index i = 0;
  for (const auto& a : amps) v[i++] = a;
  return StateVector(std::move(v), basis);
}

inline StateVector basis_ket(BasisTag basis, int index) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis_dimension(basis)));
  v[index] = 1.0;
  return StateVector(std::move(v), basis);
}

/// Density operator over a declared basis; validated on construction.
class DensityMatrix {
 public:
  DensityMatrix(Eigen::MatrixXcd elements, BasisTag basis)
      : rho_(std::move(elements)), basis_(basis) {
    const auto dim = static_cast<Eigen::Index>(basis_dimension(basis_));
    if (rho_.rows() != dim || rho_.cols() != dim)
      throw std::invalid_argument("DensityMatrix: dimension does not match basis");
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("DensityMatrix: not Hermitian");
    if (std::abs(rho_.trace().real() - 1.0) > 1e-10 || std::abs(rho_.trace().imag()) > 1e-12)
      throw std::invalid_argument("DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw std::invalid_argument("DensityMatrix: negative eigenvalue");
  }

  static DensityMatrix from_pure(const StateVector& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint(), psi.basis());
  }

  const Eigen::MatrixXcd& elements() const { return rho_; }
  BasisTag basis() const { return basis_; }
  double population(Eigen::Index i) const { return rho_(i, i).real(); }

  nlohmann::json to_json() const;
  static DensityMatrix from_json(const nlohmann::json& j);

 private:
  Eigen::MatrixXcd rho_;
  BasisTag basis_;
};

enum class OperatorKind { Hamiltonian, Collapse, Rotation, Evolution };

/// Labeled matrix over a declared basis. Rotation and evolution operators
/// are checked for unitarity on construction.
class OperatorMatrix {
 public:
  OperatorMatrix(Eigen::MatrixXcd m, BasisTag basis, OperatorKind kind)
      : m_(std::move(m)), basis_(basis), kind_(kind) {
    const auto dim = static_cast<Eigen::Index>(basis_dimension(basis_));
    if (m_.rows() != dim || m_.cols() != dim)
      throw std::invalid_argument("OperatorMatrix: dimension does not match basis");
    if (kind_ == OperatorKind::Rotation || kind_ == OperatorKind::Evolution) {
      const Eigen::MatrixXcd err =
          m_.adjoint() * m_ - Eigen::MatrixXcd::Identity(m_.rows(), m_.cols());
      if (err.cwiseAbs().maxCoeff() > kUnitarityTol)
        throw std::invalid_argument("OperatorMatrix: operator is not unitary");
    }
  }

  const Eigen::MatrixXcd& matrix() const { return m_; }
  BasisTag basis() const { return basis_; }
  OperatorKind kind() const { return kind_; }

  StateVector apply(const StateVector& psi) const {
    if (psi.basis() != basis_)
      throw std::invalid_argument("OperatorMatrix::apply: basis mismatch");
    return StateVector(m_ * psi.amplitudes(), basis_);
  }

  nlohmann::json to_json() const;

 private:
  Eigen::MatrixXcd m_;
  BasisTag basis_;
  OperatorKind kind_;
};

// --- serialization (ordered basis labels + [re, im] pairs) ---

namespace detail {
inline nlohmann::json complex_list(const Eigen::VectorXcd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    arr.push_back({v[i].real(), v[i].imag()});
  return arr;
}

inline nlohmann::json basis_labels(BasisTag tag) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < basis_dimension(tag); ++i) arr.push_back(basis_label(tag, i));
  return arr;
}
}  // namespace detail

inline nlohmann::json StateVector::to_json() const {
  return {{"basis", basis_name(basis_)},
          {"labels", detail::basis_labels(basis_)},
          {"amplitudes", detail::complex_list(amps_)}};
}

inline StateVector StateVector::from_json(const nlohmann::json& j) {
  const BasisTag tag = basis_from_name(j.at("basis").get<std::string>());
  const auto& arr = j.at("amplitudes");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = {arr[i][0].get<double>(), arr[i][1].get<double>()};
  return StateVector(std::move(v), tag);
}

inline nlohmann::json DensityMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < rho_.rows(); ++r)
    rows.push_back(detail::complex_list(rho_.row(r).transpose()));
  return {{"basis", basis_name(basis_)},
          {"labels", detail::basis_labels(basis_)},
          {"elements", rows}};
}

inline DensityMatrix DensityMatrix::from_json(const nlohmann::json& j) {
  const BasisTag tag = basis_from_name(j.at("basis").get<std::string>());
  const auto& rows = j.at("elements");
  const auto dim = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXcd m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c)
      m(r, c) = {rows[r][c][0].get<double>(), rows[r][c][1].get<double>()};
  return DensityMatrix(std::move(m), tag);
}

inline nlohmann::json OperatorMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m_.rows(); ++r)
    rows.push_back(detail::complex_list(m_.row(r).transpose()));
  return {{"basis", basis_name(basis_)},
          {"labels", detail::basis_labels(basis_)},
          {"elements", rows}};
}

// --- entanglement measures for the 4-dim joint photon (x) spin space ---

/// Concurrence of a pure joint state, 2|a0 a3 - a1 a2|.
inline double concurrence(const StateVector& joint) {
  if (joint.dimension() != 4)
    throw std::invalid_argument("concurrence: expected a 4-dim joint state");
  const auto& a = joint.amplitudes();
  return 2.0 * std::abs(a[0] * a[3] - a[1] * a[2]);
}

/// Schmidt coefficients (singular values of the 2x2 amplitude matrix).
inline Eigen::Vector2d schmidt_coefficients(const StateVector& joint) {
  if (joint.dimension() != 4)
    throw std::invalid_argument("schmidt_coefficients: expected a 4-dim joint state");
  Eigen::Matrix2cd m;
  m << joint[0], joint[1], joint[2], joint[3];
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m);
  return svd.singularValues();
}

}  // namespace spinphoton
