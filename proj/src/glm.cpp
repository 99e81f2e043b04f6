#include "floorkit/glm.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace floorkit {

DesignMatrix build_design(const std::vector<Observation>& obs) {
    if (obs.empty()) throw std::invalid_argument("empty observation list");
    if (obs.size() < 4) {
        throw std::invalid_argument("need at least 4 observations to fit 4 coefficients");
    }
    DesignMatrix design;
    design.n = obs.size();
    design.p = 4;
    design.x.reserve(design.n * 4);
    design.y.reserve(design.n);
    for (const auto& o : obs) {
        const double d = o.d_s;
        const double c = o.cardinality;
        design.x.insert(design.x.end(), {1.0, d, c, d * c});
        design.y.push_back(o.y);
    }
    return design;
}

DesignMatrix build_intercept_design(const std::vector<Observation>& obs) {
    if (obs.empty()) throw std::invalid_argument("empty observation list");
    DesignMatrix design;
    design.n = obs.size();
    design.p = 1;
    design.x.assign(design.n, 1.0);
    design.y.reserve(design.n);
    for (const auto& o : obs) design.y.push_back(o.y);
    return design;
}

namespace {

constexpr double kPivotTol = 1e-12;

// Cholesky A = L L' in the lower triangle of a (p*p, row-major).
// Returns false when a pivot drops below the tolerance.
bool cholesky(std::vector<double>& a, std::size_t p) {
    for (std::size_t j = 0; j < p; ++j) {
        double diag = a[j * p + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * p + k] * a[j * p + k];
        if (!(diag > kPivotTol)) return false;
        const double root = std::sqrt(diag);
        a[j * p + j] = root;
        for (std::size_t i = j + 1; i < p; ++i) {
            double v = a[i * p + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * p + k] * a[j * p + k];
            a[i * p + j] = v / root;
        }
    }
    return true;
}

// Solves L L' x = b in place.
void cholesky_solve(const std::vector<double>& l, std::size_t p, std::vector<double>& b) {
    for (std::size_t i = 0; i < p; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= l[i * p + k] * b[k];
        b[i] = v / l[i * p + i];
    }
    for (std::size_t i = p; i-- > 0;) {
        double v = b[i];
        for (std::size_t k = i + 1; k < p; ++k) v -= l[k * p + i] * b[k];
        b[i] = v / l[i * p + i];
    }
}

// (L L')^-1 via L^-1; the result is filled symmetrically.
std::vector<double> cholesky_inverse(const std::vector<double>& l, std::size_t p) {
    std::vector<double> linv(p * p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        linv[j * p + j] = 1.0 / l[j * p + j];
        for (std::size_t i = j + 1; i < p; ++i) {
            double v = 0.0;
            for (std::size_t k = j; k < i; ++k) v -= l[i * p + k] * linv[k * p + j];
            linv[i * p + j] = v / l[i * p + i];
        }
    }
    std::vector<double> inv(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double v = 0.0;
            for (std::size_t k = i; k < p; ++k) v += linv[k * p + i] * linv[k * p + j];
            inv[i * p + j] = v;
            inv[j * p + i] = v;
        }
    }
    return inv;
}

double poisson_deviance(const std::vector<double>& y, const std::vector<double>& mu) {
    double dev = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] > 0.0) dev += y[i] * std::log(y[i] / mu[i]);
        dev -= y[i] - mu[i];
    }
    return 2.0 * dev;
}

} // namespace

GlmFit fit_poisson_irls(const DesignMatrix& design, double tol, int max_iter) {
    if (tol <= 0) throw std::invalid_argument("tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    const std::size_t n = design.n;
    const std::size_t p = design.p;
    if (n == 0 || p == 0 || design.x.size() != n * p || design.y.size() != n) {
        throw std::invalid_argument("malformed design matrix");
    }
    for (double v : design.x) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite design entry");
    }
    for (double v : design.y) {
        if (!std::isfinite(v) || v < 0) throw std::invalid_argument("negative or non-finite response");
    }

    GlmFit fit;
    fit.n_obs = n;
    fit.n_coef = p;
    fit.beta.assign(p, 0.0);

    std::vector<double> mu(n), eta(n);
    for (std::size_t i = 0; i < n; ++i) {
        mu[i] = design.y[i] + 0.5;
        eta[i] = std::log(mu[i]);
    }
    double prev_deviance = poisson_deviance(design.y, mu);

    std::vector<double> xtwx(p * p), xtwz(p), factor;
    const auto accumulate_normal_equations = [&](bool with_response) {
        std::fill(xtwx.begin(), xtwx.end(), 0.0);
        std::fill(xtwz.begin(), xtwz.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = mu[i];
            const double z = with_response ? eta[i] + (design.y[i] - mu[i]) / mu[i] : 0.0;
            const double* row = &design.x[i * p];
            for (std::size_t a = 0; a < p; ++a) {
                const double wa = w * row[a];
                xtwz[a] += wa * z;
                for (std::size_t b = 0; b <= a; ++b) xtwx[a * p + b] += wa * row[b];
            }
        }
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a + 1; b < p; ++b) xtwx[a * p + b] = xtwx[b * p + a];
        }
    };

    for (int iter = 1; iter <= max_iter; ++iter) {
        accumulate_normal_equations(true);
        factor = xtwx;
        if (!cholesky(factor, p)) throw std::runtime_error("rank-deficient design");
        fit.beta = xtwz;
        cholesky_solve(factor, p, fit.beta);

        for (std::size_t i = 0; i < n; ++i) {
            double e = 0.0;
            const double* row = &design.x[i * p];
            for (std::size_t a = 0; a < p; ++a) e += row[a] * fit.beta[a];
            eta[i] = e;
            mu[i] = std::exp(e);
        }

        fit.deviance = poisson_deviance(design.y, mu);
        fit.deviance_trace.push_back(fit.deviance);
        fit.iterations = iter;
        if (std::abs(fit.deviance - prev_deviance) < tol * (std::abs(fit.deviance) + 0.1)) {
            fit.converged = true;
            break;
        }
        prev_deviance = fit.deviance;
    }

    // Covariance uses the weights of the final iterate, not the ones that
    // produced it.
    accumulate_normal_equations(false);
    factor = xtwx;
    if (!cholesky(factor, p)) throw std::runtime_error("rank-deficient design");
    fit.covariance = cholesky_inverse(factor, p);
    fit.std_err.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
        const double var = fit.cov(k, k);
        if (!(var > 0)) throw std::runtime_error("non-positive coefficient variance");
        fit.std_err[k] = std::sqrt(var);
    }
    return fit;
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

void wald_inference(GlmFit& fit) {
    fit.z.resize(fit.n_coef);
    fit.p.resize(fit.n_coef);
    for (std::size_t k = 0; k < fit.n_coef; ++k) {
        if (fit.std_err[k] <= 0.0) throw std::domain_error("zero standard error");
        fit.z[k] = fit.beta[k] / fit.std_err[k];
        // 2*(1 - Phi(|z|)) == erfc(|z|/sqrt(2)), which stays accurate in the tail
        fit.p[k] = std::erfc(std::abs(fit.z[k]) / std::sqrt(2.0));
    }
}

double bonferroni_correct(double nominal_p, std::size_t n_tests) {
    return std::min(1.0, static_cast<double>(n_tests) * nominal_p);
}

std::vector<std::pair<int, int>> cardinality_pairs(const std::vector<Observation>& obs) {
    std::set<int> cards;
    for (const auto& o : obs) cards.insert(o.cardinality);
    std::vector<int> sorted(cards.begin(), cards.end());
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        for (std::size_t j = i + 1; j < sorted.size(); ++j) pairs.emplace_back(sorted[i], sorted[j]);
    }
    return pairs;
}

PosthocTable posthoc_pairwise(const std::vector<Observation>& obs,
                              const std::vector<std::pair<int, int>>& pairs, double alpha) {
    PosthocTable table;
    table.alpha = alpha;
    table.n_pairs = pairs.size();

    for (const auto& [card_a, card_b] : pairs) {
        PosthocEntry entry;
        entry.cardinality_a = card_a;
        entry.cardinality_b = card_b;

        std::vector<Observation> subset;
        std::size_t n_a = 0, n_b = 0;
        for (const auto& o : obs) {
            if (o.cardinality == card_a) ++n_a;
            if (o.cardinality == card_b) ++n_b;
            if (o.cardinality == card_a || o.cardinality == card_b) subset.push_back(o);
        }
        entry.n_obs = subset.size();

        if (n_a == 0 || n_b == 0 || subset.size() < 4) {
            entry.note = "insufficient data";
            table.entries.push_back(std::move(entry));
            continue;
        }
        try {
            entry.fit = fit_poisson_irls(build_design(subset));
            wald_inference(entry.fit);
        } catch (const std::exception& err) {
            entry.note = err.what();
            table.entries.push_back(std::move(entry));
            continue;
        }

        entry.fitted = true;
        entry.corrected_p.resize(entry.fit.n_coef);
        entry.significant.resize(entry.fit.n_coef);
        for (std::size_t k = 0; k < entry.fit.n_coef; ++k) {
            entry.corrected_p[k] = bonferroni_correct(entry.fit.p[k], table.n_pairs);
            entry.significant[k] = entry.corrected_p[k] < alpha;
        }
        table.entries.push_back(std::move(entry));
    }
    return table;
}

} // namespace floorkit
