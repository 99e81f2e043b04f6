#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "floorkit/floor_metric.hpp"

namespace floorkit {

// Row-major design matrix with a count response.
struct DesignMatrix {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> x;  // n*p, row-major
    std::vector<double> y;  // length n

    double at(std::size_t i, std::size_t j) const { return x[i * p + j]; }
};

// Column names of the full model: log(mu) = b0 + b1*d + b2*c + b3*d*c.
inline constexpr std::array<const char*, 4> kModelTerms = {
    "intercept", "turn_duration", "cardinality", "turn_duration_x_cardinality"};

// Rows [1, d, c, d*c] with response y, in observation order.
// Requires at least 4 observations.
DesignMatrix build_design(const std::vector<Observation>& obs);

// Single intercept column; for the closed-form beta0 = ln(mean(y)) model.
DesignMatrix build_intercept_design(const std::vector<Observation>& obs);

struct GlmFit {
    std::vector<double> beta;
    std::vector<double> std_err;
    std::vector<double> z;
    std::vector<double> p;
    std::vector<double> covariance;  // p*p, row-major
    double deviance = 0.0;
    int iterations = 0;
    bool converged = false;
    // Deviance after each IRLS iteration (the initialization mu = y + 0.5 is
    // not an iterate of the model family and is excluded).
    std::vector<double> deviance_trace;
    std::size_t n_obs = 0;
    std::size_t n_coef = 0;

    double cov(std::size_t i, std::size_t j) const { return covariance[i * n_coef + j]; }
};

// Poisson regression with log link, fit by Fisher scoring / IRLS:
//   mu = y + 0.5, eta = log mu
//   repeat: W = diag(mu), z_w = eta + (y - mu)/mu, beta = WLS(X, W, z_w)
//   stop when |delta deviance| < tol * (|deviance| + 0.1)
// Deviance is 2*sum[y*log(y/mu) - (y - mu)] with 0*log(0) = 0. The
// covariance is (X' W X)^-1 at the final iterate. Throws
// "rank-deficient design" when a Cholesky pivot falls below 1e-12;
// running past max_iter returns the fit with converged = false.
GlmFit fit_poisson_irls(const DesignMatrix& design, double tol = 1e-8, int max_iter = 50);

// Fills z = beta/std_err and two-sided p = 2*(1 - Phi(|z|)).
// Throws on a zero standard error.
void wald_inference(GlmFit& fit);

// Standard normal distribution function.
double normal_cdf(double x);

// min(1, n_tests * nominal_p)
double bonferroni_correct(double nominal_p, std::size_t n_tests);

struct PosthocEntry {
    int cardinality_a = 0;
    int cardinality_b = 0;
    std::size_t n_obs = 0;
    bool fitted = false;
    std::string note;  // set when not fitted, e.g. "insufficient data"
    GlmFit fit;
    std::vector<double> corrected_p;
    std::vector<bool> significant;
};

struct PosthocTable {
    double alpha = 0.001;
    std::size_t n_pairs = 0;
    std::vector<PosthocEntry> entries;
};

// Fits the full model on each pair's observations only. Corrected p-values
// use m = pairs.size() regardless of how many pairs could be fitted; a pair
// with fewer observations than coefficients (or a singular design) is
// reported unfitted and the rest proceed.
PosthocTable posthoc_pairwise(const std::vector<Observation>& obs,
                              const std::vector<std::pair<int, int>>& pairs, double alpha = 0.001);

// All unordered pairs of the distinct cardinalities present, ascending.
std::vector<std::pair<int, int>> cardinality_pairs(const std::vector<Observation>& obs);

} // namespace floorkit
