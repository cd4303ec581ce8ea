#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace anelkin {

inline constexpr const char* kVersion = "0.1.0";

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

template <int N>
using Mat = Eigen::Matrix<double, N, N>;

/// Default tolerances. All user-facing entry points take explicit overrides.
inline constexpr double kTolRel = 1e-9;          // relative comparison tolerance
inline constexpr double kTolFactor = 1e-12;      // factorization residual bound
inline constexpr double kTolClass = 1e-10;       // cellwise class-membership bound
inline constexpr double kDegeneracyTol = 1e-14;  // |det| threshold scale for cells
inline constexpr double kCondLimit = 1e12;       // reject tangents beyond this
inline constexpr double kFdRelTol = 1e-5;        // finite-difference spot check
inline constexpr std::size_t kClosureBound = 100000;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct MeshError : Error { using Error::Error; };
struct DegenerateCell : Error { using Error::Error; };
struct DisconnectedBody : Error { using Error::Error; };
struct BodyMismatch : Error { using Error::Error; };
struct OrientationViolation : Error { using Error::Error; };
struct TangentMismatch : Error { using Error::Error; };
struct AxiomsNotVerified : Error { using Error::Error; };
struct ClosureExplosion : Error { using Error::Error; };
struct WitnessInconsistency : Error { using Error::Error; };
struct CoreOnFacet : Error { using Error::Error; };
struct SegmentOnFacet : Error { using Error::Error; };
struct SegmentOutsideBody : Error { using Error::Error; };
struct WindowUnbounded : Error { using Error::Error; };
struct DegenerateFrame : Error { using Error::Error; };
struct ProvidedRepresentativeNotInClass : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };

/// Frobenius difference of A and B relative to max(1, larger operand norm).
template <int N>
double rel_diff(const Mat<N>& a, const Mat<N>& b) {
  const double scale = std::max({1.0, a.norm(), b.norm()});
  return (a - b).norm() / scale;
}

/// 2-norm condition number; infinity when singular.
template <int N>
double cond(const Mat<N>& m) {
  Eigen::JacobiSVD<Mat<N>> svd(m);
  const double smin = svd.singularValues()(N - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return svd.singularValues()(0) / smin;
}

/// Partial-pivot inverse guarded by a condition-number cap.
template <int N>
Mat<N> guarded_inverse(const Mat<N>& m, double cond_limit = kCondLimit,
                       const char* what = "matrix") {
  const double c = cond<N>(m);
  if (!(c <= cond_limit))
    throw DegenerateCell(std::string(what) + ": condition number " +
                         std::to_string(c) + " exceeds limit");
  Eigen::PartialPivLU<Mat<N>> lu(m);
  return lu.inverse();
}

}  // namespace anelkin
