#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace graphdiff {

struct Interval {
  double a = 0.0;
  double b = 1.0;
  double length() const { return b - a; }
};

/// Polynomial sum_k coeffs[k] (x - origin)^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs, double origin = 0.0);

  double operator()(double x) const { return derivative(x, 0); }
  /// k-th derivative at x.
  double derivative(double x, int order) const;
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double origin() const { return origin_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

 private:
  std::vector<double> coeffs_;
  double origin_ = 0.0;
};

/// Source term phi on an interval, held as a piecewise polynomial so that the
/// exponential-kernel integrals of the resolvent are computed exactly.
///
/// Grid samples and generic callables are replaced by their piecewise linear
/// interpolant (a second-order product-integration rule).
class EdgeSource {
 public:
  static EdgeSource polynomial(Interval iv, std::vector<double> coeffs);
  static EdgeSource piecewise(std::vector<double> breaks, std::vector<Polynomial> pieces);
  /// Values at uniformly spaced nodes a = y_0 < ... < y_n = b.
  static EdgeSource samples(Interval iv, std::span<const double> values);
  static EdgeSource function(Interval iv, const std::function<double(double)>& f,
                             std::size_t nodes = 4097);

  Interval interval() const { return {breaks_.front(), breaks_.back()}; }
  double operator()(double x) const;
  double integral() const;
  double mean() const { return integral() / interval().length(); }
  double l1_norm() const;

  /// Integral over the interval of exp(-mu |shift + direction * y|) phi(y) dy,
  /// direction = +1 or -1.
  double kernel_integral(double mu, double shift, int direction) const;
  /// Same with the kernel's derivative with respect to `shift`.
  double kernel_integral_dshift(double mu, double shift, int direction) const;

 private:
  EdgeSource(std::vector<double> breaks, std::vector<Polynomial> pieces);

  std::vector<double> breaks_;
  std::vector<Polynomial> pieces_;
};

/// psi = (lambda - G)^{-1} phi for the Neumann Laplacian G on (a, b):
/// psi(x) = J(x) + c e^{mu x} + d e^{-mu x}, mu = sqrt(lambda), with
/// J(x) = (2 mu)^{-1} int e^{-mu |x - y|} phi(y) dy and c, d fixed by
/// psi'(a) = psi'(b) = 0.
///
/// Evaluation uses the rescaled coefficients c_hat = c e^{mu b} and
/// d_hat = d e^{-mu a}, which stay bounded for large mu (b - a).
class ResolventClosedForm {
 public:
  ResolventClosedForm(Interval iv, double lambda, EdgeSource phi);

  double operator()(double x) const;
  /// Exact first derivative.
  double derivative(double x) const;
  double convolution(double x) const;  // J_mu(x)

  Interval interval() const { return iv_; }
  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  double xi() const { return xi_; }
  double zeta() const { return zeta_; }
  /// Coefficients of e^{mu x} and e^{-mu x}; may overflow for huge mu (b - a).
  double c_mu() const;
  double d_mu() const;

 private:
  Interval iv_;
  double lambda_;
  double mu_;
  EdgeSource phi_;
  double xi_ = 0.0;
  double zeta_ = 0.0;
  double c_hat_ = 0.0;
  double d_hat_ = 0.0;
};

std::vector<double> resolvent_apply(Interval iv, double lambda, const EdgeSource& phi,
                                    std::span<const double> xs);

struct ImageSeriesResult {
  std::vector<double> values;
  /// Terms with |k| <= terms were summed.
  int terms = 0;
  double tail_bound = 0.0;
};

/// Smallest K whose tail bound e^{-2 mu K D} (1 + e^{-mu D})^2 / (1 - e^{-2 mu D})
/// * ||phi||_1 / (2 mu) is below tol (D = b - a).
int image_series_terms(Interval iv, double lambda, double phi_l1, double tol);

/// psi(x) as the method-of-images sum over reflected free-space kernels.
ImageSeriesResult resolvent_image_series(Interval iv, double lambda, const EdgeSource& phi,
                                         std::span<const double> xs, double tol);

struct AveragingRow {
  double lambda = 0.0;
  /// || lambda psi_lambda - mean(phi) ||_{L^1(a,b)}
  double distance = 0.0;
};

/// For each lambda (strictly decreasing, positive) the L^1 distance between
/// lambda (lambda - G)^{-1} phi and the mean of phi.
std::vector<AveragingRow> averaging_limit_check(Interval iv, const EdgeSource& phi,
                                                std::span<const double> lambdas);

/// True if each distance is at most (1 + slack) times its predecessor.
bool is_nonincreasing(const std::vector<AveragingRow>& rows, double slack = 0.05);

/// L^1 norm over (a, b) of a function, by composite Simpson on `intervals` panels.
double l1_distance(Interval iv, const std::function<double(double)>& f,
                   std::size_t intervals = 4000);

}  // namespace graphdiff
