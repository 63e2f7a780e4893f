#pragma once

#include <cmath>
#include <utility>
#include <string>
#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "ntree/errors.hpp"
#include "ntree/rng.hpp"

namespace ntree {

// Idealized sequential-measurement model of the movement search: the live
// maze is tracked through the original path coordinates, each measurement is
// on the path with probability p and uniform over the remaining coordinates.
// Exact and closed-form trial-count formulas, all stable in log space.
class TrialModel {
public:
    enum class Mode { ExactSum, ClosedForm, Asymptote };

    TrialModel(int depth, double p) : m_(depth), p_(p) {
        if (depth < 1) throw InvalidParameters("depth M must be >= 1");
        if (!(p > 0.0) || p > 1.0) throw InvalidParameters("p must be in (0, 1]");
    }

    int depth() const { return m_; }
    double p() const { return p_; }

    // Probability of observing the monotone coordinate sequence x1 <= ... <= xn:
    // p^n / (M+1) * prod_{j<n} 1/(M - x_j + 2).
    double p_sequence(std::span<const int> xs) const {
        if (xs.empty()) throw InvalidSequence("sequence must be non-empty");
        int prev = 1;
        for (int x : xs) {
            if (x < prev || x > m_ + 1)
                throw InvalidSequence("coordinates must be nondecreasing in [1, M+1]");
            prev = x;
        }
        double log_p = static_cast<double>(xs.size()) * std::log(p_) -
                       std::log(double(m_ + 1));
        for (std::size_t j = 0; j + 1 < xs.size(); ++j)
            log_p -= std::log(double(m_ - xs[j] + 2));
        return std::exp(log_p);
    }

    // Probability that the F edge is measured on exactly the y-th trial.
    // ExactSum evaluates the nested sums over monotone prefixes; ClosedForm
    // is the integral approximation p^y [ln((M+2)/2)]^(y-1) / ((M+1)(y-1)!).
    double p_succ(std::int64_t y, Mode mode = Mode::ExactSum) const {
        if (y < 1) throw InvalidSequence("trial index must be >= 1");
        if (mode == Mode::Asymptote)
            throw InvalidSequence("per-trial probabilities have no asymptotic mode");
        if (mode == Mode::ClosedForm) {
            const double h = std::log((m_ + 2) / 2.0);
            const double log_p = y * std::log(p_) + (y - 1) * std::log(h) -
                                 std::lgamma(double(y)) - std::log(double(m_ + 1));
            return std::exp(log_p);
        }
        // S_k = sum over nondecreasing k-tuples in [1, M] of prod 1/(M-x_j+2),
        // accumulated by the prefix recursion T_k(v) = sum_{w<=v} T_{k-1}(w)/w
        // over the substituted values w = M - x + 2 in [2, M+1].
        const double s = monotone_sum(y - 1);
        const double log_p = y * std::log(p_) + std::log(s) - std::log(double(m_ + 1));
        return std::exp(log_p);
    }

    // Probability of finding F within the first z trials (cumulative sum of
    // per-trial successes); Mode::Asymptote ignores z and returns the large-z
    // value of the closed form.
    double p_find(std::int64_t z, Mode mode = Mode::ExactSum) const {
        if (mode == Mode::Asymptote) return p_find_asymptote();
        double total = 0.0;
        for (std::int64_t y = 1; y <= z; ++y) total += p_succ(y, mode);
        return total;
    }

    // Large-z asymptote of the closed-form cumulative, valid for p near 1:
    // p (M+2) / (2 (M+1)).
    double p_find_asymptote() const {
        return p_ * (m_ + 2) / (2.0 * (m_ + 1));
    }

    // Monte Carlo of the model itself: returns empirical P_find(z) for
    // z = 1..z_max. A run draws coordinates until it leaves the path (dead,
    // no success ever) or draws M+1 (success at that trial).
    std::vector<double> simulate_p_find(std::int64_t z_max, std::int64_t runs,
                                        RandomStream& rng) const {
        std::vector<std::int64_t> success_at(static_cast<std::size_t>(z_max) + 1, 0);
        for (std::int64_t r = 0; r < runs; ++r) {
            int x = 1;
            for (std::int64_t y = 1; y <= z_max; ++y) {
                if (rng.uniform01() >= p_) break;  // off the path: dead run
                const int span = m_ + 2 - x;       // remaining coordinates x..M+1
                x = x + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
                if (x == m_ + 1) {
                    ++success_at[static_cast<std::size_t>(y)];
                    break;
                }
            }
        }
        std::vector<double> cumulative(static_cast<std::size_t>(z_max));
        std::int64_t acc = 0;
        for (std::int64_t z = 1; z <= z_max; ++z) {
            acc += success_at[static_cast<std::size_t>(z)];
            cumulative[static_cast<std::size_t>(z - 1)] =
                static_cast<double>(acc) / static_cast<double>(runs);
        }
        return cumulative;
    }

private:
    double monotone_sum(std::int64_t k) const {
        if (k == 0) return 1.0;
        // T[v-2] = T_j(v), v = 2..M+1
        std::vector<double> t(static_cast<std::size_t>(m_), 1.0);
        for (std::int64_t j = 1; j <= k; ++j) {
            double acc = 0.0;
            for (int v = 2; v <= m_ + 1; ++v) {
                acc += t[static_cast<std::size_t>(v - 2)] / v;
                t[static_cast<std::size_t>(v - 2)] = acc;
            }
        }
        return t.back();
    }

    int m_;
    double p_;
};

// A fitted eigenangle sample: the dominant eigenangle of the (N, M) walk,
// in degrees.
struct AngleSample {
    int branching;
    int depth;
    double theta_degrees;
};

// Power-law model of the dominant eigenangle and the peak step schedule:
// epsilon(N,M) = alpha M^beta N^(rho + gamma M) degrees, U(N,M) = 90/epsilon.
struct StepModel {
    double alpha = 0.0;
    double beta = 0.0;
    double rho = 0.0;
    double gamma = 0.0;
    int max_branching = 0;  // fitted domain
    int max_depth = 0;

    double epsilon_degrees(int branching, int depth) const {
        return alpha * std::pow(double(depth), beta) *
               std::pow(double(branching), rho + gamma * depth);
    }

    // Scheduled number of unitary steps to the path-probability peak.
    std::int64_t u_steps(int branching, int depth) const {
        const double u = 90.0 / epsilon_degrees(branching, depth);
        return std::max<std::int64_t>(1, std::llround(u));
    }
};

struct FitResidual {
    int branching;
    int depth;
    double theta_degrees;
    double fitted_degrees;
    double rel_error;
};

struct FitReport {
    StepModel model;
    std::vector<FitResidual> residuals;
    double max_rel_residual = 0.0;
};

namespace detail {

// Unweighted least squares y = slope*x + intercept.
inline std::pair<double, double> linear_fit(const std::vector<double>& xs,
                                            const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30)
        throw InsufficientData("degenerate abscissae in regression stage");
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    return {slope, intercept};
}

}  // namespace detail

// Two-stage power-law fit: per-M log-log regression of theta on N gives
// (A(M), B(M)); then A(M) = alpha M^beta in log-log and B(M) = rho + gamma M
// in linear coordinates.
inline FitReport fit_step_model(const std::vector<AngleSample>& samples) {
    std::map<int, std::vector<const AngleSample*>> by_depth;
    for (const auto& s : samples) by_depth[s.depth].push_back(&s);
    if (by_depth.size() < 2)
        throw InsufficientData("need at least 2 distinct depths to fit");

    std::vector<double> ms, log_ms, log_as, bs;
    for (const auto& [m, rows] : by_depth) {
        std::vector<double> xs, ys;
        for (const auto* s : rows) {
            xs.push_back(std::log(double(s->branching)));
            ys.push_back(std::log(s->theta_degrees));
        }
        if (xs.size() < 2)
            throw InsufficientData("need at least 2 distinct N at depth " +
                                   std::to_string(m));
        const auto [b, log_a] = detail::linear_fit(xs, ys);
        ms.push_back(double(m));
        log_ms.push_back(std::log(double(m)));
        log_as.push_back(log_a);
        bs.push_back(b);
    }
    FitReport report;
    const auto [beta, log_alpha] = detail::linear_fit(log_ms, log_as);
    const auto [gamma, rho] = detail::linear_fit(ms, bs);
    report.model.alpha = std::exp(log_alpha);
    report.model.beta = beta;
    report.model.rho = rho;
    report.model.gamma = gamma;
    for (const auto& s : samples) {
        report.model.max_branching = std::max(report.model.max_branching, s.branching);
        report.model.max_depth = std::max(report.model.max_depth, s.depth);
    }
    for (const auto& s : samples) {
        const double fitted = report.model.epsilon_degrees(s.branching, s.depth);
        const double rel = std::abs(fitted - s.theta_degrees) / s.theta_degrees;
        report.residuals.push_back({s.branching, s.depth, s.theta_degrees, fitted, rel});
        report.max_rel_residual = std::max(report.max_rel_residual, rel);
    }
    return report;
}

}  // namespace ntree
