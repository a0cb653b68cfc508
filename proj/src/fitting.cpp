#include "iontrap/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "iontrap/errors.hpp"

namespace iontrap {

namespace {

using Vec4 = Eigen::Vector4d;
enum Param { kAmp = 0, kOmega = 1, kGamma = 2, kOffset = 3 };

double model(const Vec4& p, double t)
{
    return 0.5 + p(kOffset) + 0.5 * p(kAmp) * std::cos(p(kOmega) * t) * std::exp(-p(kGamma) * t);
}

double periodogram(const std::vector<double>& t, const std::vector<double>& d, double omega)
{
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
        acc += d[j] * std::polar(1.0, -omega * t[j]);
    }
    return std::norm(acc);
}

double dominant_frequency(const std::vector<double>& t, const std::vector<double>& d)
{
    const double span = t.back() - t.front();
    const double bin = 2.0 * std::numbers::pi / span;
    const int n_bins = static_cast<int>(t.size() / 2);
    int best = 1;
    double best_power = -1.0;
    for (int k = 1; k <= n_bins; ++k) {
        const double pw = periodogram(t, d, k * bin);
        if (pw > best_power) {
            best_power = pw;
            best = k;
        }
    }
    // Golden-section refinement inside the neighbouring bins.
    double lo = std::max(0.5 * bin, (best - 1) * bin);
    double hi = (best + 1) * bin;
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = periodogram(t, d, x1);
    double f2 = periodogram(t, d, x2);
    for (int it = 0; it < 80 && hi - lo > 1e-12 * bin; ++it) {
        if (f1 > f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = periodogram(t, d, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = periodogram(t, d, x2);
        }
    }
    return 0.5 * (lo + hi);
}

// Slope and intercept of log|d| over local extrema.
std::pair<double, double> envelope_regression(const std::vector<double>& t, const std::vector<double>& d)
{
    const double peak = std::abs(*std::max_element(d.begin(), d.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    }));
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t j = 0; j < d.size(); ++j) {
        const double here = std::abs(d[j]);
        const bool left = j == 0 || here >= std::abs(d[j - 1]);
        const bool right = j + 1 == d.size() || here >= std::abs(d[j + 1]);
        if (left && right && here > 1e-3 * peak) {
            xs.push_back(t[j]);
            ys.push_back(std::log(here));
        }
    }
    if (xs.size() < 2) {
        return {0.0, std::log(peak)};
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) {
        return {0.0, sy / n};
    }
    const double slope = (n * sxy - sx * sy) / denom;
    return {slope, (sy - slope * sx) / n};
}

} // namespace

DampedCosineFit fit_damped_cosine(const PopulationTrace& trace, const FitOptions& opts)
{
    const std::vector<double> t = trace.grid.times();
    const std::vector<double>& y = trace.pg;
    if (y.size() != t.size() || y.size() < 8) {
        throw FitError("fit_damped_cosine: need at least 8 samples matching the grid");
    }
    const std::size_t m = y.size();

    std::vector<double> w(m, 1.0);
    if (opts.use_stderr_weights && trace.std_error) {
        const auto& se = *trace.std_error;
        for (std::size_t j = 0; j < m; ++j) {
            const double s = std::max(se[j], 1e-6);
            w[j] = 1.0 / (s * s);
        }
    }

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(m);
    std::vector<double> d(m);
    double spread = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        d[j] = y[j] - mean;
        spread = std::max(spread, std::abs(d[j]));
    }

    DampedCosineFit fit;
    if (spread < 1e-9) {
        fit.degenerate = true;
        fit.offset = mean - 0.5;
        return fit;
    }

    const double omega0 = dominant_frequency(t, d);
    const double span = t.back() - t.front();
    if (omega0 * span / (2.0 * std::numbers::pi) < opts.min_periods) {
        std::ostringstream os;
        os << "fit_damped_cosine: trace covers only " << omega0 * span / (2.0 * std::numbers::pi)
           << " oscillation periods (need " << opts.min_periods << ")";
        throw FitError(os.str());
    }
    const auto [slope, intercept] = envelope_regression(t, d);
    const double sign = d.front() >= 0.0 ? 1.0 : -1.0;

    Vec4 p;
    p(kAmp) = sign * 2.0 * std::exp(intercept + slope * t.front());
    p(kOmega) = omega0;
    p(kGamma) = std::max(0.0, -slope);
    p(kOffset) = mean - 0.5;

    auto evaluate = [&](const Vec4& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        double cost = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double tj = t[j];
            const double e = std::exp(-q(kGamma) * tj);
            const double c = std::cos(q(kOmega) * tj);
            const double s = std::sin(q(kOmega) * tj);
            const double sw = std::sqrt(w[j]);
            r(j) = sw * (y[j] - (0.5 + q(kOffset) + 0.5 * q(kAmp) * c * e));
            cost += r(j) * r(j);
            if (jac) {
                (*jac)(j, kAmp) = sw * 0.5 * c * e;
                (*jac)(j, kOmega) = -sw * 0.5 * q(kAmp) * tj * s * e;
                (*jac)(j, kGamma) = -sw * 0.5 * q(kAmp) * tj * c * e;
                (*jac)(j, kOffset) = sw;
            }
        }
        return cost;
    };

    Eigen::VectorXd r(m);
    Eigen::VectorXd r_trial(m);
    Eigen::MatrixXd jac(m, 4);
    double cost = evaluate(p, r, &jac);
    double mu = 1e-3;
    bool converged = false;
    int iter = 0;
    while (iter < opts.max_iterations) {
        ++iter;
        const Eigen::Matrix4d h = jac.transpose() * jac;
        const Vec4 grad = jac.transpose() * r;
        Eigen::Matrix4d damped = h;
        for (int i = 0; i < 4; ++i) damped(i, i) += mu * std::max(h(i, i), 1e-300);
        const Vec4 delta = damped.ldlt().solve(grad);
        const double rel = delta.norm() / (p.norm() + 1e-300);
        const Vec4 trial = p + delta;
        const double trial_cost = evaluate(trial, r_trial, nullptr);
        if (trial_cost <= cost) {
            p = trial;
            cost = evaluate(p, r, &jac);
            mu = std::max(mu / 10.0, 1e-12);
        } else {
            mu *= 10.0;
        }
        if (rel < opts.relative_tolerance) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "fit_damped_cosine: no convergence after " << opts.max_iterations << " iterations";
        throw FitError(os.str());
    }

    if (p(kOmega) < 0.0) p(kOmega) = -p(kOmega);
    if (p(kGamma) < 0.0) {
        if (p(kGamma) < -1e-8 * std::max(1.0, p(kOmega))) {
            throw FitError("fit_damped_cosine: fitted envelope grows (gamma < 0)");
        }
        p(kGamma) = 0.0;
    }

    fit.amplitude = p(kAmp);
    fit.omega = p(kOmega);
    fit.gamma = p(kGamma);
    fit.offset = p(kOffset);
    fit.iterations = iter;
    double unweighted = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double res = y[j] - model(p, t[j]);
        unweighted += res * res;
    }
    fit.residual_rms = std::sqrt(unweighted / static_cast<double>(m));
    if (m > 4) {
        const double s2 = cost / static_cast<double>(m - 4);
        const Eigen::Matrix4d cov = s2 * (jac.transpose() * jac).ldlt().solve(Eigen::Matrix4d::Identity());
        fit.sigma_omega = std::sqrt(std::max(0.0, cov(kOmega, kOmega)));
        fit.sigma_gamma = std::sqrt(std::max(0.0, cov(kGamma, kGamma)));
    }
    return fit;
}

std::string_view to_string(RateNormalization n)
{
    return n == RateNormalization::Raw ? "raw" : "per-rabi-cycle";
}

PowerLawFit fit_power_law(std::span<const LevelRate> levels, RateNormalization normalization, double level_shift)
{
    if (levels.size() < 3) {
        throw FitError("fit_power_law: need at least 3 levels");
    }
    const std::size_t m = levels.size();
    Eigen::MatrixXd x(m, 2);
    Eigen::VectorXd y(m);
    for (std::size_t i = 0; i < m; ++i) {
        const LevelRate& l = levels[i];
        const double level = l.n + level_shift;
        if (!(l.gamma > 0.0)) {
            throw FitError("fit_power_law: non-positive rate at n = " + std::to_string(l.n));
        }
        if (!(level > 0.0)) {
            throw FitError("fit_power_law: non-positive level n + shift at n = " + std::to_string(l.n));
        }
        double value = l.gamma;
        if (normalization == RateNormalization::PerRabiCycle) {
            if (!(l.omega > 0.0)) {
                throw FitError("fit_power_law: non-positive frequency at n = " + std::to_string(l.n));
            }
            value /= l.omega;
        }
        x(i, 0) = 1.0;
        x(i, 1) = std::log(level);
        y(i) = std::log(value);
    }
    const Eigen::Matrix2d xtx = x.transpose() * x;
    const Eigen::Vector2d beta = xtx.ldlt().solve(x.transpose() * y);
    const Eigen::VectorXd resid = y - x * beta;
    const double rss = resid.squaredNorm();
    const double s2 = m > 2 ? rss / static_cast<double>(m - 2) : 0.0;
    const Eigen::Matrix2d cov_log = s2 * xtx.inverse();

    PowerLawFit fit;
    fit.gamma0 = std::exp(beta(0));
    fit.p = beta(1);
    // Delta method from (log gamma0, p) to (gamma0, p).
    Eigen::Matrix2d jac = Eigen::Matrix2d::Identity();
    jac(0, 0) = fit.gamma0;
    fit.covariance = jac * cov_log * jac.transpose();
    fit.normalization = normalization;
    fit.level_shift = level_shift;
    fit.n_levels = static_cast<int>(m);
    fit.residual_rms = std::sqrt(rss / static_cast<double>(m));
    return fit;
}

ExponentComparison exponent_comparison(const PowerLawFit& fit, double z, double resolution)
{
    ExponentComparison out;
    if (!fit.normalization) {
        out.refused = true;
        out.reason = "the rate normalization (raw or per-Rabi-cycle) is not recorded; the exponent cannot be "
                     "compared with either reference without it";
        return out;
    }
    out.p = fit.p;
    out.sigma = std::sqrt(std::max(0.0, fit.covariance(1, 1)));
    const double half_width = std::max(z * out.sigma, resolution);
    out.ci_low = fit.p - half_width;
    out.ci_high = fit.p + half_width;
    out.consistent_with_derived = std::abs(fit.p - kDerivedExponent) <= half_width;
    out.consistent_with_experimental = std::abs(fit.p - kExperimentalExponent) <= half_width;

    std::ostringstream os;
    if (out.consistent_with_derived && out.consistent_with_experimental) {
        os << "consistent with both 0.5 and 0.7";
    } else if (out.consistent_with_derived) {
        os << "consistent with 0.5, inconsistent with 0.7";
    } else if (out.consistent_with_experimental) {
        os << "consistent with 0.7, inconsistent with 0.5";
    } else {
        os << "inconsistent with both 0.5 and 0.7";
    }
    os << " at 95% (p = " << fit.p << ", " << to_string(*fit.normalization) << ")";
    out.verdict = os.str();
    return out;
}

} // namespace iontrap
