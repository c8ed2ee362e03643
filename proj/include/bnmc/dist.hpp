#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "bnmc/rng.hpp"

namespace bnmc {

enum class Family {
  Gaussian,
  Dirichlet,
  Categorical,
  InverseGamma,
  Gamma,
  Beta,
  Bernoulli,
  Uniform,
};

const char* family_name(Family f);
bool lookup_family(std::string_view name, Family* out);

// Number of arguments the family takes in the modeling language. Dirichlet
// and Categorical take (dimension, vector); the rest take scalars.
int family_arity(Family f);

// True for families whose draws are integer-valued.
bool family_is_discrete(Family f);

// --- log densities -------------------------------------------------------
// Points outside the support and invalid parameters yield -infinity, so a
// Metropolis proposal into an invalid region is rejected rather than failing.
// NaN inputs throw std::domain_error.

double log_pdf_gaussian(double x, double mean, double var);
double log_pdf_uniform(double x, double lo, double hi);
double log_pdf_beta(double x, double a, double b);
double log_pdf_gamma(double x, double shape, double scale);
double log_pdf_inverse_gamma(double x, double shape, double scale);
double log_pmf_bernoulli(long long x, double p);
double log_pmf_categorical(long long x, std::span<const double> probs);
double log_pdf_dirichlet(std::span<const double> x, std::span<const double> alpha);

// --- draws ----------------------------------------------------------------
// All draws consume counters only from the given stream, so a draw is fully
// determined by the stream's key.

double draw_gamma(RngStream& rng, double shape);  // scale 1
double draw_gaussian(RngStream& rng, double mean, double var);
double draw_uniform(RngStream& rng, double lo, double hi);
double draw_beta(RngStream& rng, double a, double b);
double draw_gamma_scaled(RngStream& rng, double shape, double scale);
double draw_inverse_gamma(RngStream& rng, double shape, double scale);
long long draw_bernoulli(RngStream& rng, double p);
long long draw_categorical(RngStream& rng, std::span<const double> probs);
void draw_dirichlet(RngStream& rng, std::span<const double> alpha, std::span<double> out);

// Draws an index from an unnormalized log-mass vector, using the
// max-subtraction trick to stay in range.
long long draw_from_log_weights(RngStream& rng, std::span<const double> logw);

// A distribution with concrete, validated parameters. Construction checks the
// parameter domain (variance > 0, concentrations > 0, probability vectors
// summing to 1 within 1e-9, Bernoulli p in [0,1]) and throws
// std::invalid_argument on violation.
class Distribution {
 public:
  static Distribution gaussian(double mean, double var);
  static Distribution uniform(double lo, double hi);
  static Distribution beta(double a, double b);
  static Distribution gamma(double shape, double scale);
  static Distribution inverse_gamma(double shape, double scale);
  static Distribution bernoulli(double p);
  static Distribution categorical(std::vector<double> probs);
  static Distribution dirichlet(std::vector<double> alpha);

  Family family() const { return family_; }
  std::span<const double> params() const { return params_; }

  bool scalar_variate() const { return family_ != Family::Dirichlet; }
  std::size_t dimension() const { return params_.size(); }  // Dirichlet/Categorical

  double log_pdf(double x) const;                  // scalar families
  double log_pdf(std::span<const double> x) const;  // Dirichlet

  double draw_scalar(RngStream& rng) const;
  void draw_vector(RngStream& rng, std::span<double> out) const;

 private:
  Distribution(Family f, std::vector<double> params) : family_(f), params_(std::move(params)) {}

  Family family_;
  std::vector<double> params_;
};

}  // namespace bnmc
