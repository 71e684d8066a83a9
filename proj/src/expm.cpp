#include "graphdiff/expm.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace graphdiff {

namespace {

using Eigen::MatrixXd;

// Largest 1-norms for which the [m/m] Pade approximant meets unit roundoff.
constexpr std::array<double, 5> kTheta = {1.495585217958292e-2, 2.539398330063230e-1,
                                          9.504178996162932e-1, 2.097847961257068e0,
                                          5.371920351148152e0};
constexpr std::array<int, 5> kDegree = {3, 5, 7, 9, 13};

void pade_low(const MatrixXd& a, int degree, MatrixXd& u, MatrixXd& v) {
  static const double b3[] = {120., 60., 12., 1.};
  static const double b5[] = {30240., 15120., 3360., 420., 30., 1.};
  static const double b7[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
  static const double b9[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                              2162160.,     110880.,     3960.,       90.,        1.};
  const double* b = degree == 3 ? b3 : degree == 5 ? b5 : degree == 7 ? b7 : b9;
  const auto n = a.rows();
  const MatrixXd ident = MatrixXd::Identity(n, n);
  const MatrixXd a2 = a * a;
  MatrixXd power = ident;
  MatrixXd odd = b[1] * ident;
  v = b[0] * ident;
  for (int k = 2; k <= degree; k += 2) {
    power = power * a2;
    v += b[k] * power;
    odd += b[k + 1] * power;
  }
  u = a * odd;
}

void pade13(const MatrixXd& a, MatrixXd& u, MatrixXd& v) {
  static const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                             1187353796428800.,  129060195264000.,   10559470521600.,
                             670442572800.,      33522128640.,       1323241920.,
                             40840800.,          960960.,            16380.,
                             182.,               1.};
  const auto n = a.rows();
  const MatrixXd ident = MatrixXd::Identity(n, n);
  const MatrixXd a2 = a * a;
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a4 * a2;
  MatrixXd tmp = b[13] * a6 + b[11] * a4 + b[9] * a2;
  MatrixXd inner = a6 * tmp;
  inner += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident;
  u.noalias() = a * inner;
  tmp = b[12] * a6 + b[10] * a4 + b[8] * a2;
  v.noalias() = a6 * tmp;
  v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
}

}  // namespace

MatrixXd expm(const MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("expm: matrix must be square");
  const auto n = a.rows();
  if (n == 0) return a;
  if (!a.allFinite()) throw std::invalid_argument("expm: non-finite entries");

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  MatrixXd u, v;
  int squarings = 0;

  bool done = false;
  for (std::size_t k = 0; k + 1 < kDegree.size(); ++k) {
    if (norm1 <= kTheta[k]) {
      pade_low(a, kDegree[k], u, v);
      done = true;
      break;
    }
  }
  if (!done) {
    if (norm1 > kTheta.back()) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta.back()))));
    const MatrixXd scaled = a / std::ldexp(1.0, squarings);
    pade13(scaled, u, v);
  }

  MatrixXd result = (v - u).partialPivLu().solve(v + u);
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

}  // namespace graphdiff
