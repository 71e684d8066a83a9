#include "graphdiff/edge_resolvent.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace graphdiff {

namespace {

void require_interval(Interval iv) {
  if (!(iv.a < iv.b) || !std::isfinite(iv.a) || !std::isfinite(iv.b))
    throw std::invalid_argument("interval requires a < b");
}

void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("resolvent requires lambda > 0");
}

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 4> kGaussX = {0.1834346424956498, 0.5255324099163290,
                                           0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGaussW = {0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};

template <typename F>
double gauss8(F&& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double acc = 0.0;
  for (std::size_t k = 0; k < kGaussX.size(); ++k)
    acc += kGaussW[k] * (f(mid - half * kGaussX[k]) + f(mid + half * kGaussX[k]));
  return acc * half;
}

// Integral over [lo, hi] of exp(-mu (s + eps y)) p(y), assuming s + eps y >= 0 there.
double exp_poly_integral(const Polynomial& p, double mu, double s, int eps, double lo, double hi) {
  if (hi <= lo) return 0.0;
  const double w = hi - lo;
  if (mu * w <= 1.0) {
    // The closed form cancels like (mu w)^-(deg+1) here. Expand instead:
    // e^{-mu(s + eps lo)} sum_{n,k} (-mu eps)^n / n! * p^(k)(lo) / k! * w^{n+k+1} / (n+k+1).
    std::vector<double> taylor(static_cast<std::size_t>(p.degree()) + 1);
    double fact = 1.0;
    for (int k = 0; k <= p.degree(); ++k) {
      if (k > 0) fact *= k;
      taylor[static_cast<std::size_t>(k)] = p.derivative(lo, k) / fact;
    }
    double acc = 0.0;
    double term = 1.0;  // (-mu eps w)^n / n!
    for (int n = 0; n < 60; ++n) {
      double inner = 0.0;
      double wpow = w;
      for (std::size_t k = 0; k < taylor.size(); ++k, wpow *= w)
        inner += taylor[k] * wpow / static_cast<double>(n + static_cast<int>(k) + 1);
      acc += term * inner;
      term *= -mu * eps * w / (n + 1);
      if (std::abs(term) < 1e-18) break;
    }
    return std::exp(-mu * std::max(0.0, s + eps * lo)) * acc;
  }
  const double me = mu * eps;
  auto primitive = [&](double y) {
    double sum = 0.0;
    double scale = 1.0 / me;
    for (int k = 0; k <= p.degree(); ++k) {
      sum += p.derivative(y, k) * scale;
      scale /= me;
    }
    return -std::exp(-mu * std::max(0.0, s + eps * y)) * sum;
  };
  return primitive(hi) - primitive(lo);
}

}  // namespace

Polynomial::Polynomial(std::vector<double> coeffs, double origin)
    : coeffs_(std::move(coeffs)), origin_(origin) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
}

double Polynomial::derivative(double x, int order) const {
  const double u = x - origin_;
  double acc = 0.0;
  for (int k = degree(); k >= order; --k) {
    double falling = 1.0;
    for (int j = 0; j < order; ++j) falling *= static_cast<double>(k - j);
    acc = acc * u + falling * coeffs_[static_cast<std::size_t>(k)];
  }
  return acc;
}

EdgeSource::EdgeSource(std::vector<double> breaks, std::vector<Polynomial> pieces)
    : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
  if (breaks_.size() < 2 || pieces_.size() + 1 != breaks_.size())
    throw std::invalid_argument("source: need n+1 breakpoints for n pieces");
  for (std::size_t k = 0; k + 1 < breaks_.size(); ++k)
    if (!(breaks_[k] < breaks_[k + 1]))
      throw std::invalid_argument("source: breakpoints must increase");
}

EdgeSource EdgeSource::polynomial(Interval iv, std::vector<double> coeffs) {
  require_interval(iv);
  return EdgeSource({iv.a, iv.b}, {Polynomial(std::move(coeffs), 0.0)});
}

EdgeSource EdgeSource::piecewise(std::vector<double> breaks, std::vector<Polynomial> pieces) {
  return EdgeSource(std::move(breaks), std::move(pieces));
}

EdgeSource EdgeSource::samples(Interval iv, std::span<const double> values) {
  require_interval(iv);
  if (values.size() < 2) throw std::invalid_argument("source: need at least two samples");
  const std::size_t n = values.size() - 1;
  const double h = iv.length() / static_cast<double>(n);
  std::vector<double> breaks(n + 1);
  std::vector<Polynomial> pieces;
  pieces.reserve(n);
  for (std::size_t k = 0; k <= n; ++k) breaks[k] = iv.a + static_cast<double>(k) * h;
  breaks[n] = iv.b;
  for (std::size_t k = 0; k < n; ++k) {
    const double slope = (values[k + 1] - values[k]) / (breaks[k + 1] - breaks[k]);
    pieces.emplace_back(std::vector<double>{values[k], slope}, breaks[k]);
  }
  return EdgeSource(std::move(breaks), std::move(pieces));
}

EdgeSource EdgeSource::function(Interval iv, const std::function<double(double)>& f,
                                std::size_t nodes) {
  require_interval(iv);
  if (nodes < 2) throw std::invalid_argument("source: need at least two nodes");
  std::vector<double> values(nodes);
  const double h = iv.length() / static_cast<double>(nodes - 1);
  for (std::size_t k = 0; k < nodes; ++k)
    values[k] = f(k + 1 == nodes ? iv.b : iv.a + static_cast<double>(k) * h);
  return samples(iv, values);
}

double EdgeSource::operator()(double x) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  std::size_t k = it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
  k = std::min(k, pieces_.size() - 1);
  return pieces_[k](x);
}

namespace {

double poly_integral(const Polynomial& p, double lo, double hi) {
  auto antiderivative = [&](double x) {
    const double u = x - p.origin();
    double s = 0.0;
    for (int j = p.degree(); j >= 0; --j)
      s = s * u + p.coeffs()[static_cast<std::size_t>(j)] / (j + 1);
    return s * u;
  };
  return antiderivative(hi) - antiderivative(lo);
}

}  // namespace

double EdgeSource::integral() const {
  double acc = 0.0;
  for (std::size_t k = 0; k < pieces_.size(); ++k)
    acc += poly_integral(pieces_[k], breaks_[k], breaks_[k + 1]);
  return acc;
}

double EdgeSource::l1_norm() const {
  // Split each piece at sign changes (located on a fine sample, then bisected)
  // and integrate exactly between them.
  constexpr int kSamples = 256;
  double acc = 0.0;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const auto& p = pieces_[k];
    const double lo = breaks_[k];
    const double step = (breaks_[k + 1] - lo) / kSamples;
    double from = lo;
    for (int j = 0; j < kSamples; ++j) {
      double x0 = lo + j * step;
      double x1 = j + 1 == kSamples ? breaks_[k + 1] : x0 + step;
      if ((p(x0) < 0.0) != (p(x1) < 0.0)) {
        for (int it = 0; it < 80 && x1 - x0 > 0.0; ++it) {
          const double mid = 0.5 * (x0 + x1);
          if ((p(mid) < 0.0) == (p(x0) < 0.0)) x0 = mid; else x1 = mid;
        }
        acc += std::abs(poly_integral(p, from, x0));
        from = x0;
      }
    }
    acc += std::abs(poly_integral(p, from, breaks_[k + 1]));
  }
  return acc;
}

double EdgeSource::kernel_integral(double mu, double shift, int direction) const {
  double acc = 0.0;
  const double kink = -shift * direction;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const double lo = breaks_[k];
    const double hi = breaks_[k + 1];
    auto part = [&](double from, double to) {
      if (to <= from) return 0.0;
      const double mid = 0.5 * (from + to);
      return shift + direction * mid >= 0.0
                 ? exp_poly_integral(pieces_[k], mu, shift, direction, from, to)
                 : exp_poly_integral(pieces_[k], mu, -shift, -direction, from, to);
    };
    if (kink > lo && kink < hi) {
      acc += part(lo, kink) + part(kink, hi);
    } else {
      acc += part(lo, hi);
    }
  }
  return acc;
}

double EdgeSource::kernel_integral_dshift(double mu, double shift, int direction) const {
  double acc = 0.0;
  const double kink = -shift * direction;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const double lo = breaks_[k];
    const double hi = breaks_[k + 1];
    auto part = [&](double from, double to) {
      if (to <= from) return 0.0;
      const double mid = 0.5 * (from + to);
      return shift + direction * mid >= 0.0
                 ? -mu * exp_poly_integral(pieces_[k], mu, shift, direction, from, to)
                 : mu * exp_poly_integral(pieces_[k], mu, -shift, -direction, from, to);
    };
    if (kink > lo && kink < hi) {
      acc += part(lo, kink) + part(kink, hi);
    } else {
      acc += part(lo, hi);
    }
  }
  return acc;
}

ResolventClosedForm::ResolventClosedForm(Interval iv, double lambda, EdgeSource phi)
    : iv_(iv), lambda_(lambda), mu_(std::sqrt(lambda)), phi_(std::move(phi)) {
  require_interval(iv);
  require_lambda(lambda);
  const Interval src = phi_.interval();
  if (std::abs(src.a - iv.a) > 1e-12 * iv.length() || std::abs(src.b - iv.b) > 1e-12 * iv.length())
    throw std::invalid_argument("resolvent: source defined on a different interval");

  xi_ = 0.5 * phi_.kernel_integral(mu_, -iv.a, +1);
  zeta_ = 0.5 * phi_.kernel_integral(mu_, iv.b, -1);
  const double decay = std::exp(-mu_ * iv.length());       // 1 / e^{mu (b - a)}
  const double denom = -mu_ * std::expm1(-2.0 * mu_ * iv.length());  // mu (1 - e^{-2 mu D})
  c_hat_ = (xi_ * decay + zeta_) / denom;
  d_hat_ = (xi_ + zeta_ * decay) / denom;
}

double ResolventClosedForm::convolution(double x) const {
  return phi_.kernel_integral(mu_, x, -1) / (2.0 * mu_);
}

double ResolventClosedForm::operator()(double x) const {
  return convolution(x) + c_hat_ * std::exp(-mu_ * (iv_.b - x)) +
         d_hat_ * std::exp(-mu_ * (x - iv_.a));
}

double ResolventClosedForm::derivative(double x) const {
  const double dj = phi_.kernel_integral_dshift(mu_, x, -1) / (2.0 * mu_);
  return dj + mu_ * c_hat_ * std::exp(-mu_ * (iv_.b - x)) -
         mu_ * d_hat_ * std::exp(-mu_ * (x - iv_.a));
}

double ResolventClosedForm::c_mu() const { return c_hat_ * std::exp(-mu_ * iv_.b); }
double ResolventClosedForm::d_mu() const { return d_hat_ * std::exp(mu_ * iv_.a); }

std::vector<double> resolvent_apply(Interval iv, double lambda, const EdgeSource& phi,
                                    std::span<const double> xs) {
  const ResolventClosedForm psi(iv, lambda, phi);
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(psi(x));
  return out;
}

int image_series_terms(Interval iv, double lambda, double phi_l1, double tol) {
  require_interval(iv);
  require_lambda(lambda);
  if (!(tol > 0.0)) throw std::invalid_argument("image series: tolerance must be positive");
  const double mu = std::sqrt(lambda);
  const double d = iv.length();
  const double head = std::pow(1.0 + std::exp(-mu * d), 2) /
                      (-std::expm1(-2.0 * mu * d)) * phi_l1 / (2.0 * mu);
  if (head <= tol) return 0;
  // head * e^{-2 mu D K} < tol
  const double k = std::log(head / tol) / (2.0 * mu * d);
  int terms = static_cast<int>(std::floor(k)) + 1;
  while (terms > 0 && head * std::exp(-2.0 * mu * d * (terms - 1)) < tol) --terms;
  return terms;
}

ImageSeriesResult resolvent_image_series(Interval iv, double lambda, const EdgeSource& phi,
                                         std::span<const double> xs, double tol) {
  require_interval(iv);
  require_lambda(lambda);
  const double mu = std::sqrt(lambda);
  const double d = iv.length();
  const double l1 = phi.l1_norm();

  ImageSeriesResult out;
  out.terms = image_series_terms(iv, lambda, l1, tol);
  out.tail_bound = std::exp(-2.0 * mu * d * out.terms) * std::pow(1.0 + std::exp(-mu * d), 2) /
                   (-std::expm1(-2.0 * mu * d)) * l1 / (2.0 * mu);
  out.values.reserve(xs.size());
  for (double x : xs) {
    double acc = 0.0;
    // Sum from the outermost images inwards to limit rounding.
    for (int m = out.terms; m >= 0; --m) {
      for (int k : {m, -m}) {
        const double offset = 2.0 * k * d;
        acc += phi.kernel_integral(mu, offset + x, -1);
        acc += phi.kernel_integral(mu, offset + x - 2.0 * iv.a, +1);
        if (m == 0) break;
      }
    }
    out.values.push_back(acc / (2.0 * mu));
  }
  return out;
}

double l1_distance(Interval iv, const std::function<double(double)>& f, std::size_t intervals) {
  if (intervals % 2 == 1) ++intervals;
  const double h = iv.length() / static_cast<double>(intervals);
  double acc = std::abs(f(iv.a)) + std::abs(f(iv.b));
  for (std::size_t k = 1; k < intervals; ++k)
    acc += (k % 2 == 1 ? 4.0 : 2.0) * std::abs(f(iv.a + static_cast<double>(k) * h));
  return acc * h / 3.0;
}

std::vector<AveragingRow> averaging_limit_check(Interval iv, const EdgeSource& phi,
                                                std::span<const double> lambdas) {
  require_interval(iv);
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    require_lambda(lambdas[k]);
    if (k > 0 && !(lambdas[k] < lambdas[k - 1]))
      throw std::invalid_argument("averaging check: lambdas must decrease");
  }
  const double avg = phi.mean();
  std::vector<AveragingRow> rows;
  for (double lambda : lambdas) {
    const ResolventClosedForm psi(iv, lambda, phi);
    const double dist = l1_distance(iv, [&](double x) { return lambda * psi(x) - avg; });
    rows.push_back({lambda, dist});
  }
  return rows;
}

bool is_nonincreasing(const std::vector<AveragingRow>& rows, double slack) {
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (rows[k].distance > (1.0 + slack) * rows[k - 1].distance) return false;
  return true;
}

}  // namespace graphdiff
