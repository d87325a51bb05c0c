#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spinphoton {

// Basis conventions used throughout.
//
// Spin (electron ground states), x basis order {x+, x-}.
// The z basis is defined by
//   |z+> = (|x+> + |x->)/sqrt(2),   |z-> = (|x+> - |x->)/sqrt(2)
// so that detection of a sigma+ photon projects the spin onto |z->.
//
// Photon polarization, linear basis order {H, V}; circular basis
//   |sigma+-> = (|H> +- i|V>)/sqrt(2), order {sigma+, sigma-}.
//
// Four-level system order {x+, x-, Tx-, Tx+}.
// Joint photon (x) spin space order {H x+, H x-, V x+, V x-}.

enum class SpinState { XPlus = 0, XMinus = 1 };
enum class TrionState { TxMinus = 0, TxPlus = 1 };
enum class PhotonPol { H, V, SigmaPlus, SigmaMinus };
enum class Channel { A, B };

/// Indices into the four-level basis {x+, x-, Tx-, Tx+}.
inline constexpr int kIdxXPlus = 0;
inline constexpr int kIdxXMinus = 1;
inline constexpr int kIdxTxMinus = 2;
inline constexpr int kIdxTxPlus = 3;

constexpr int level_index(SpinState s) { return s == SpinState::XPlus ? kIdxXPlus : kIdxXMinus; }
constexpr int level_index(TrionState t) {
  return t == TrionState::TxMinus ? kIdxTxMinus : kIdxTxPlus;
}

enum class BasisTag {
  SpinX,        // {x+, x-}
  SpinZ,        // {z+, z-}
  PhotonLinear, // {H, V}
  PhotonCircular, // {sigma+, sigma-}
  JointLinearX, // {H x+, H x-, V x+, V x-}
  JointCircularZ, // {s+ z+, s+ z-, s- z+, s- z-}
  FourLevel,    // {x+, x-, Tx-, Tx+}
};

constexpr std::size_t basis_dimension(BasisTag tag) {
  switch (tag) {
    case BasisTag::SpinX:
    case BasisTag::SpinZ:
    case BasisTag::PhotonLinear:
    case BasisTag::PhotonCircular:
      return 2;
    default:
      return 4;
  }
}

inline std::string basis_name(BasisTag tag) {
  switch (tag) {
    case BasisTag::SpinX: return "spin_x";
    case BasisTag::SpinZ: return "spin_z";
    case BasisTag::PhotonLinear: return "photon_linear";
    case BasisTag::PhotonCircular: return "photon_circular";
    case BasisTag::JointLinearX: return "joint_linear_x";
    case BasisTag::JointCircularZ: return "joint_circular_z";
    case BasisTag::FourLevel: return "four_level";
  }
  return "?";
}

inline BasisTag basis_from_name(std::string_view name) {
  if (name == "spin_x") return BasisTag::SpinX;
  if (name == "spin_z") return BasisTag::SpinZ;
  if (name == "photon_linear") return BasisTag::PhotonLinear;
  if (name == "photon_circular") return BasisTag::PhotonCircular;
  if (name == "joint_linear_x") return BasisTag::JointLinearX;
  if (name == "joint_circular_z") return BasisTag::JointCircularZ;
  if (name == "four_level") return BasisTag::FourLevel;
  throw std::invalid_argument("unknown basis name: " + std::string(name));
}

inline const char* basis_label(BasisTag tag, std::size_t i) {
  static const char* spin_x[] = {"x+", "x-"};
  static const char* spin_z[] = {"z+", "z-"};
  static const char* pol_lin[] = {"H", "V"};
  static const char* pol_circ[] = {"s+", "s-"};
  static const char* joint_lin[] = {"H x+", "H x-", "V x+", "V x-"};
  static const char* joint_circ[] = {"s+ z+", "s+ z-", "s- z+", "s- z-"};
  static const char* four[] = {"x+", "x-", "Tx-", "Tx+"};
  switch (tag) {
    case BasisTag::SpinX: return spin_x[i];
    case BasisTag::SpinZ: return spin_z[i];
    case BasisTag::PhotonLinear: return pol_lin[i];
    case BasisTag::PhotonCircular: return pol_circ[i];
    case BasisTag::JointLinearX: return joint_lin[i];
    case BasisTag::JointCircularZ: return joint_circ[i];
    case BasisTag::FourLevel: return four[i];
  }
  return "?";
}

inline std::string to_string(PhotonPol pol) {
  switch (pol) {
    case PhotonPol::H: return "H";
    case PhotonPol::V: return "V";
    case PhotonPol::SigmaPlus: return "s+";
    case PhotonPol::SigmaMinus: return "s-";
  }
  return "?";
}

inline PhotonPol photon_pol_from_string(std::string_view s) {
  if (s == "H") return PhotonPol::H;
  if (s == "V") return PhotonPol::V;
  if (s == "s+" || s == "sigma+") return PhotonPol::SigmaPlus;
  if (s == "s-" || s == "sigma-") return PhotonPol::SigmaMinus;
  throw std::invalid_argument("unknown polarization: " + std::string(s));
}

}  // namespace spinphoton
