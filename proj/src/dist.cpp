#include "bnmc/dist.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bnmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void require_finite(double v, const char* what) {
  if (std::isnan(v)) throw std::domain_error(std::string("NaN ") + what);
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::Gaussian: return "Gaussian";
    case Family::Dirichlet: return "Dirichlet";
    case Family::Categorical: return "Categorical";
    case Family::InverseGamma: return "InverseGamma";
    case Family::Gamma: return "Gamma";
    case Family::Beta: return "Beta";
    case Family::Bernoulli: return "Bernoulli";
    case Family::Uniform: return "Uniform";
  }
  return "?";
}

bool lookup_family(std::string_view name, Family* out) {
  static constexpr Family all[] = {Family::Gaussian,  Family::Dirichlet, Family::Categorical,
                                   Family::InverseGamma, Family::Gamma,  Family::Beta,
                                   Family::Bernoulli, Family::Uniform};
  for (Family f : all) {
    if (name == family_name(f)) {
      *out = f;
      return true;
    }
  }
  return false;
}

int family_arity(Family f) {
  switch (f) {
    case Family::Bernoulli: return 1;
    default: return 2;
  }
}

bool family_is_discrete(Family f) {
  return f == Family::Categorical || f == Family::Bernoulli;
}

// --- log densities ---------------------------------------------------------

double log_pdf_gaussian(double x, double mean, double var) {
  require_finite(x, "Gaussian point");
  require_finite(mean, "Gaussian mean");
  require_finite(var, "Gaussian variance");
  if (!(var > 0.0)) return kNegInf;
  const double d = x - mean;
  return -0.5 * (d * d / var + std::log(var) + kLog2Pi);
}

double log_pdf_uniform(double x, double lo, double hi) {
  require_finite(x, "Uniform point");
  if (!(hi > lo)) return kNegInf;
  if (x < lo || x > hi) return kNegInf;
  return -std::log(hi - lo);
}

double log_pdf_beta(double x, double a, double b) {
  require_finite(x, "Beta point");
  if (!(a > 0.0) || !(b > 0.0)) return kNegInf;
  if (!(x > 0.0) || !(x < 1.0)) return kNegInf;
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double log_pdf_gamma(double x, double shape, double scale) {
  require_finite(x, "Gamma point");
  if (!(shape > 0.0) || !(scale > 0.0)) return kNegInf;
  if (!(x > 0.0)) return kNegInf;
  return (shape - 1.0) * std::log(x) - x / scale - shape * std::log(scale) - std::lgamma(shape);
}

double log_pdf_inverse_gamma(double x, double shape, double scale) {
  require_finite(x, "InverseGamma point");
  if (!(shape > 0.0) || !(scale > 0.0)) return kNegInf;
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double log_pmf_bernoulli(long long x, double p) {
  require_finite(p, "Bernoulli probability");
  if (p < 0.0 || p > 1.0) return kNegInf;
  if (x == 1) return p > 0.0 ? std::log(p) : kNegInf;
  if (x == 0) return p < 1.0 ? std::log1p(-p) : kNegInf;
  return kNegInf;
}

double log_pmf_categorical(long long x, std::span<const double> probs) {
  if (x < 0 || static_cast<std::size_t>(x) >= probs.size()) return kNegInf;
  const double p = probs[static_cast<std::size_t>(x)];
  require_finite(p, "Categorical probability");
  if (!(p > 0.0)) return kNegInf;
  return std::log(p);
}

double log_pdf_dirichlet(std::span<const double> x, std::span<const double> alpha) {
  if (x.size() != alpha.size() || x.empty()) return kNegInf;
  double sum = 0.0, lp = 0.0, norm = 0.0, asum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require_finite(x[i], "Dirichlet point");
    require_finite(alpha[i], "Dirichlet concentration");
    if (!(alpha[i] > 0.0)) return kNegInf;
    if (!(x[i] > 0.0)) return kNegInf;
    sum += x[i];
    lp += (alpha[i] - 1.0) * std::log(x[i]);
    norm += std::lgamma(alpha[i]);
    asum += alpha[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) return kNegInf;
  return lp - norm + std::lgamma(asum);
}

// --- draws ------------------------------------------------------------------

// Marsaglia-Tsang squeeze method; for shape < 1 draws at shape+1 and applies
// the u^(1/shape) boost.
double draw_gamma(RngStream& rng, double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("Gamma shape must be positive");
  if (shape < 1.0) {
    const double g = draw_gamma(rng, shape + 1.0);
    return g * std::pow(rng.next_unit(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.next_gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_unit();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double draw_gamma_scaled(RngStream& rng, double shape, double scale) {
  return scale * draw_gamma(rng, shape);
}

double draw_gaussian(RngStream& rng, double mean, double var) {
  return mean + std::sqrt(var) * rng.next_gaussian();
}

double draw_uniform(RngStream& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.next_unit();
}

double draw_beta(RngStream& rng, double a, double b) {
  const double x = draw_gamma(rng, a);
  const double y = draw_gamma(rng, b);
  return x / (x + y);
}

double draw_inverse_gamma(RngStream& rng, double shape, double scale) {
  return scale / draw_gamma(rng, shape);
}

long long draw_bernoulli(RngStream& rng, double p) {
  return rng.next_unit() < p ? 1 : 0;
}

long long draw_categorical(RngStream& rng, std::span<const double> probs) {
  const double u = rng.next_unit();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<long long>(i);
  }
  return static_cast<long long>(probs.size()) - 1;
}

void draw_dirichlet(RngStream& rng, std::span<const double> alpha, std::span<double> out) {
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = draw_gamma(rng, alpha[i]);
    sum += out[i];
  }
  for (std::size_t i = 0; i < alpha.size(); ++i) out[i] /= sum;
}

long long draw_from_log_weights(RngStream& rng, std::span<const double> logw) {
  double mx = kNegInf;
  for (double w : logw) mx = std::max(mx, w);
  if (!std::isfinite(mx)) throw std::domain_error("all candidate log-weights are -inf");
  double total = 0.0;
  for (double w : logw) total += std::exp(w - mx);
  const double u = rng.next_unit() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    acc += std::exp(logw[i] - mx);
    if (u < acc) return static_cast<long long>(i);
  }
  return static_cast<long long>(logw.size()) - 1;
}

// --- Distribution -----------------------------------------------------------

namespace {
void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

Distribution Distribution::gaussian(double mean, double var) {
  check(std::isfinite(mean) && var > 0.0, "Gaussian requires finite mean and variance > 0");
  return {Family::Gaussian, {mean, var}};
}

Distribution Distribution::uniform(double lo, double hi) {
  check(hi > lo, "Uniform requires hi > lo");
  return {Family::Uniform, {lo, hi}};
}

Distribution Distribution::beta(double a, double b) {
  check(a > 0.0 && b > 0.0, "Beta requires positive shapes");
  return {Family::Beta, {a, b}};
}

Distribution Distribution::gamma(double shape, double scale) {
  check(shape > 0.0 && scale > 0.0, "Gamma requires positive shape and scale");
  return {Family::Gamma, {shape, scale}};
}

Distribution Distribution::inverse_gamma(double shape, double scale) {
  check(shape > 0.0 && scale > 0.0, "InverseGamma requires positive shape and scale");
  return {Family::InverseGamma, {shape, scale}};
}

Distribution Distribution::bernoulli(double p) {
  check(p >= 0.0 && p <= 1.0, "Bernoulli requires p in [0,1]");
  return {Family::Bernoulli, {p}};
}

Distribution Distribution::categorical(std::vector<double> probs) {
  check(!probs.empty(), "Categorical requires a nonempty probability vector");
  double sum = 0.0;
  for (double p : probs) {
    check(p >= 0.0, "Categorical probabilities must be nonnegative");
    sum += p;
  }
  check(std::abs(sum - 1.0) <= 1e-9, "Categorical probabilities must sum to 1");
  return {Family::Categorical, std::move(probs)};
}

Distribution Distribution::dirichlet(std::vector<double> alpha) {
  check(!alpha.empty(), "Dirichlet requires a nonempty concentration vector");
  for (double a : alpha) check(a > 0.0, "Dirichlet concentrations must be positive");
  return {Family::Dirichlet, std::move(alpha)};
}

double Distribution::log_pdf(double x) const {
  switch (family_) {
    case Family::Gaussian: return log_pdf_gaussian(x, params_[0], params_[1]);
    case Family::Uniform: return log_pdf_uniform(x, params_[0], params_[1]);
    case Family::Beta: return log_pdf_beta(x, params_[0], params_[1]);
    case Family::Gamma: return log_pdf_gamma(x, params_[0], params_[1]);
    case Family::InverseGamma: return log_pdf_inverse_gamma(x, params_[0], params_[1]);
    case Family::Bernoulli: return log_pmf_bernoulli(static_cast<long long>(x), params_[0]);
    case Family::Categorical: return log_pmf_categorical(static_cast<long long>(x), params_);
    case Family::Dirichlet: throw std::invalid_argument("Dirichlet takes a vector point");
  }
  return kNegInf;
}

double Distribution::log_pdf(std::span<const double> x) const {
  if (family_ != Family::Dirichlet) throw std::invalid_argument("vector point requires Dirichlet");
  return log_pdf_dirichlet(x, params_);
}

double Distribution::draw_scalar(RngStream& rng) const {
  switch (family_) {
    case Family::Gaussian: return draw_gaussian(rng, params_[0], params_[1]);
    case Family::Uniform: return draw_uniform(rng, params_[0], params_[1]);
    case Family::Beta: return draw_beta(rng, params_[0], params_[1]);
    case Family::Gamma: return draw_gamma_scaled(rng, params_[0], params_[1]);
    case Family::InverseGamma: return draw_inverse_gamma(rng, params_[0], params_[1]);
    case Family::Bernoulli: return static_cast<double>(draw_bernoulli(rng, params_[0]));
    case Family::Categorical: return static_cast<double>(draw_categorical(rng, params_));
    case Family::Dirichlet: throw std::invalid_argument("Dirichlet draw needs a vector output");
  }
  return 0.0;
}

void Distribution::draw_vector(RngStream& rng, std::span<double> out) const {
  if (family_ != Family::Dirichlet) throw std::invalid_argument("vector draw requires Dirichlet");
  if (out.size() != params_.size()) throw std::invalid_argument("Dirichlet output size mismatch");
  draw_dirichlet(rng, params_, out);
}

}  // namespace bnmc
