#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <tuple>
#include <string>
#include <array>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "ntree/errors.hpp"
#include "ntree/maze.hpp"
#include "ntree/peaks.hpp"
#include "ntree/walk.hpp"

namespace ntree {

// One effective edge: the orbit of all undirected edges sharing (depth,
// shared-prefix-with-the-F-path) under the maze symmetries fixing S and F.
struct EffectiveEdge {
    int depth = 1;   // 1..M+1, live coordinates
    int prefix = 1;  // 1..depth; prefix == depth means "on the path"
    bool on_path() const { return prefix == depth; }
};

// Orbit basis of the live maze. There are D = (M+1)(M+2)/2 effective edges;
// each carries two directed states (down/up), so reduced amplitude vectors
// have 2D entries laid out as [2*class + dir]. Within a class every concrete
// directed state shares one amplitude for all time, with per-state weight
// 1/sqrt(class size).
class ReducedBasis {
public:
    explicit ReducedBasis(const TreeMaze& maze) : maze_(maze) {
        if (!maze.f_live())
            throw InvalidParameters("reduced basis requires a live final node");
        m_ = maze.live_depth();
        n_ = maze.branching();
        classes_.reserve(class_count());
        for (int d = 1; d <= m_ + 1; ++d)
            for (int l = 1; l <= d; ++l) classes_.push_back({d, l});
    }

    int branching() const { return n_; }
    int live_depth() const { return m_; }
    const TreeMaze& maze() const { return maze_; }

    // D = (M+1)(M+2)/2
    int class_count() const { return (m_ + 1) * (m_ + 2) / 2; }
    int state_count() const { return 2 * class_count(); }

    const std::vector<EffectiveEdge>& classes() const { return classes_; }

    static int class_index_of(int depth, int prefix) {
        return depth * (depth - 1) / 2 + (prefix - 1);
    }
    const EffectiveEdge& class_at(int idx) const { return classes_[idx]; }

    // Number of concrete undirected edges in a class.
    std::int64_t class_size(int idx) const {
        const EffectiveEdge& c = classes_[idx];
        if (c.on_path()) return 1;
        std::int64_t s = n_ - 1;
        for (int j = 0; j < c.depth - c.prefix - 1; ++j) s *= n_;
        return s;
    }

    // Class of a concrete live directed state.
    int class_of(const DirectedEdgeState& st) const {
        const Edge e{st.child};
        const int d = maze_.live_edge_depth(e);
        const int top_level = maze_.level_of(maze_.live_top());
        // deepest common ancestor of the edge's child and F
        NodeId a = st.child;
        NodeId b = maze_.f_node();
        int la = maze_.level_of(a);
        int lb = maze_.level_of(b);
        if (la > lb) a = maze_.ancestor_at(a, lb), la = lb;
        if (lb > la) b = maze_.ancestor_at(b, la), lb = la;
        while (a != b) {
            a = maze_.parent(a);
            b = maze_.parent(b);
            --la;
        }
        const int prefix = la - top_level + 1;
        return class_index_of(d, prefix);
    }
    int state_index_of(const DirectedEdgeState& st) const {
        return 2 * class_of(st) + static_cast<int>(st.dir);
    }

    // Reduced coordinates of the uniform full state: r_c = sqrt(|c| / 2E').
    Eigen::VectorXd initial_state() const {
        Eigen::VectorXd r(state_count());
        const double twoE = 2.0 * static_cast<double>(maze_.live_edge_count());
        for (int c = 0; c < class_count(); ++c) {
            const double v = std::sqrt(static_cast<double>(class_size(c)) / twoE);
            r[2 * c] = v;
            r[2 * c + 1] = v;
        }
        return r;
    }

    // Orthogonal projection of a full state onto the symmetric subspace.
    Eigen::VectorXd project(const WalkEngine& engine, const WalkState& s) const {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(state_count());
        for (std::size_t i = 0; i < s.amp.size(); ++i)
            r[state_index_of(engine.state_at(i))] += s.amp[i];
        for (int c = 0; c < class_count(); ++c) {
            const double w = 1.0 / std::sqrt(static_cast<double>(class_size(c)));
            r[2 * c] *= w;
            r[2 * c + 1] *= w;
        }
        return r;
    }

    // Lift of reduced coordinates back to the full state space.
    WalkState lift(const WalkEngine& engine, const Eigen::VectorXd& r) const {
        WalkState s;
        s.amp.resize(engine.state_count());
        std::vector<double> per_state(state_count());
        for (int c = 0; c < class_count(); ++c) {
            const double w = 1.0 / std::sqrt(static_cast<double>(class_size(c)));
            per_state[2 * c] = r[2 * c] * w;
            per_state[2 * c + 1] = r[2 * c + 1] * w;
        }
        for (std::size_t i = 0; i < s.amp.size(); ++i)
            s.amp[i] = per_state[state_index_of(engine.state_at(i))];
        return s;
    }

private:
    TreeMaze maze_;
    int n_;
    int m_;
    std::vector<EffectiveEdge> classes_;
};

// The step operator restricted to the symmetric subspace: a real orthogonal
// 2D x 2D matrix over effective-edge states, built directly from the class
// combinatorics (no full-space pass), so it is usable far beyond the sizes
// the full engine can hold.
class ReducedOperator {
public:
    ReducedOperator(int branching, int live_depth)
        : n_(branching), m_(live_depth) {
        const int dim = (m_ + 1) * (m_ + 2);  // 2D
        mat_ = Eigen::MatrixXd::Zero(dim, dim);
        const double t = 2.0 / (n_ + 1);
        auto idx = [](int d, int l, int dir) {
            return 2 * ReducedBasis::class_index_of(d, l) + dir;
        };
        // root end node (+1) and leaves
        mat_(idx(1, 1, 0), idx(1, 1, 1)) += 1.0;
        mat_(idx(m_ + 1, m_ + 1, 1), idx(m_ + 1, m_ + 1, 0)) += -1.0;
        for (int l = 1; l <= m_; ++l)
            mat_(idx(m_ + 1, l, 1), idx(m_ + 1, l, 0)) += 1.0;
        // junctions on the path, level v
        for (int v = 1; v <= m_; ++v) {
            const double sw = std::sqrt(double(n_ - 1));
            const std::array<std::pair<int, double>, 3> ins = {{
                {idx(v, v, 0), 1.0},
                {idx(v + 1, v + 1, 1), 1.0},
                {idx(v + 1, v, 1), sw},
            }};
            const std::array<std::tuple<int, double, int>, 3> outs = {{
                {idx(v, v, 1), 1.0, idx(v, v, 0)},
                {idx(v + 1, v + 1, 0), 1.0, idx(v + 1, v + 1, 1)},
                {idx(v + 1, v, 0), sw, idx(v + 1, v, 1)},
            }};
            for (const auto& [out, scale, refl] : outs) {
                for (const auto& [in, coef] : ins) mat_(out, in) += scale * t * coef;
                mat_(out, refl) -= 1.0;
            }
        }
        // junctions off the path: parent class (v,l), child class (v+1,l)
        for (int v = 2; v <= m_; ++v) {
            for (int l = 1; l < v; ++l) {
                double s1 = n_ - 1;
                for (int j = 0; j < v - l - 1; ++j) s1 *= n_;
                const double s2 = s1 * n_;
                const std::array<std::pair<int, double>, 2> ins = {{
                    {idx(v, l, 0), 1.0 / std::sqrt(s1)},
                    {idx(v + 1, l, 1), n_ / std::sqrt(s2)},
                }};
                for (const auto& [in, coef] : ins)
                    mat_(idx(v, l, 1), in) += std::sqrt(s1) * t * coef;
                mat_(idx(v, l, 1), idx(v, l, 0)) -= 1.0;
                for (const auto& [in, coef] : ins)
                    mat_(idx(v + 1, l, 0), in) += std::sqrt(s2) * t * coef;
                mat_(idx(v + 1, l, 0), idx(v + 1, l, 1)) -= 1.0;
            }
        }
    }

    int branching() const { return n_; }
    int live_depth() const { return m_; }
    int class_count() const { return (m_ + 1) * (m_ + 2) / 2; }
    int dim() const { return static_cast<int>(mat_.rows()); }
    const Eigen::MatrixXd& matrix() const { return mat_; }

    Eigen::VectorXd step(const Eigen::VectorXd& r) const { return mat_ * r; }

    void evolve(Eigen::VectorXd& r, std::int64_t n_steps) const {
        for (std::int64_t i = 0; i < n_steps; ++i) r = mat_ * r;
    }

    double f_probability(const Eigen::VectorXd& r) const {
        const int c = ReducedBasis::class_index_of(m_ + 1, m_ + 1);
        return r[2 * c] * r[2 * c] + r[2 * c + 1] * r[2 * c + 1];
    }

    double path_probability(const Eigen::VectorXd& r, bool include_root_edge = false) const {
        double total = 0.0;
        for (int d = include_root_edge ? 1 : 2; d <= m_ + 1; ++d) {
            const int c = ReducedBasis::class_index_of(d, d);
            total += r[2 * c] * r[2 * c] + r[2 * c + 1] * r[2 * c + 1];
        }
        return total;
    }

    std::vector<TracePoint> trace(const Eigen::VectorXd& r0, std::int64_t max_steps) const {
        std::vector<TracePoint> rows;
        rows.reserve(static_cast<std::size_t>(max_steps) + 1);
        Eigen::VectorXd r = r0;
        rows.push_back({0, f_probability(r), path_probability(r)});
        for (std::int64_t n = 1; n <= max_steps; ++n) {
            r = mat_ * r;
            rows.push_back({n, f_probability(r), path_probability(r)});
        }
        return rows;
    }

    PeakResult find_first_peak(const Eigen::VectorXd& r0, Observable obs,
                               std::int64_t max_steps) const {
        return find_first_peak_in_trace(trace(r0, max_steps), obs);
    }

private:
    int n_;
    int m_;
    Eigen::MatrixXd mat_;
};

inline std::pair<ReducedBasis, ReducedOperator> build_reduced(const TreeMaze& maze) {
    ReducedBasis basis(maze);
    ReducedOperator op(maze.branching(), maze.live_depth());
    return {std::move(basis), std::move(op)};
}

// Complete eigensystem of a reduced step operator, with the overlaps against
// an initial vector. Built from the real Schur form: an orthogonal matrix has
// a block-diagonal Schur form of 2x2 rotations and +-1 entries, so conjugate
// pairing, orthonormality of eigenvectors, and sum(|beta|^2) = 1 hold by
// construction.
struct EigenSystem {
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd eigenvectors;  // columns, orthonormal
    Eigen::VectorXcd beta;          // <u_i | psi_initial>
    std::vector<int> conj_index;    // partner of each column (self for real)
    int dominant = -1;              // Im(lambda) > 0 member of the dominant pair
    double theta_lambda = 0.0;      // eigenangle of the dominant pair, in (0, pi)

    double beta_abs() const { return std::abs(beta[dominant]); }
    double theta_beta() const { return std::arg(beta[dominant]); }
    // overlap of a reduced basis state with the dominant eigenvector
    std::complex<double> z_of(int state_index) const {
        return eigenvectors(state_index, dominant);
    }
    // share of the initial state outside the dominant conjugate pair
    double truncation_mass() const {
        const double b = beta_abs();
        return 1.0 - 2.0 * b * b;
    }
};

inline EigenSystem eigensystem(const ReducedOperator& op, const Eigen::VectorXd& psi0) {
    const Eigen::MatrixXd& a = op.matrix();
    const int dim = static_cast<int>(a.rows());
    // Split the orthogonal operator into commuting symmetric and skew parts:
    // S carries cos(theta) and K the rotation planes. Two self-adjoint solves
    // replace nonsymmetric QR, which stalls on these unit-circle spectra, and
    // K^T K resolves eigenangles down to ~1e-10 rad without cancellation.
    const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
    const Eigen::MatrixXd skew = 0.5 * (a - a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ssolve(sym);
    if (ssolve.info() != Eigen::Success)
        throw NumericalFailure("symmetric eigensolve failed at dimension " +
                               std::to_string(dim));

    EigenSystem es;
    es.eigenvalues.resize(dim);
    es.eigenvectors.resize(dim, dim);
    es.conj_index.assign(dim, -1);
    const std::complex<double> iunit(0.0, 1.0);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    int emitted = 0;

    auto emit_real = [&](const Eigen::VectorXd& u, double lambda) {
        es.eigenvalues[emitted] = lambda;
        es.eigenvectors.col(emitted) = u.cast<std::complex<double>>();
        es.conj_index[emitted] = emitted;
        ++emitted;
    };
    auto emit_pair = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                         double c, double s) {
        Eigen::VectorXcd uplus =
            (p.cast<std::complex<double>>() - iunit * q.cast<std::complex<double>>()) *
            inv_sqrt2;
        // fix the phase: rotate the largest-magnitude component positive real
        int argmax = 0;
        for (int k = 1; k < dim; ++k)
            if (std::abs(uplus[k]) > std::abs(uplus[argmax])) argmax = k;
        const std::complex<double> piv = uplus[argmax];
        if (std::abs(piv) > 0) uplus *= std::conj(piv) / std::abs(piv);
        es.eigenvalues[emitted] = {c, s};
        es.eigenvalues[emitted + 1] = {c, -s};
        es.eigenvectors.col(emitted) = uplus;
        es.eigenvectors.col(emitted + 1) = uplus.conjugate();
        es.conj_index[emitted] = emitted + 1;
        es.conj_index[emitted + 1] = emitted;
        emitted += 2;
    };

    // Cluster cos(theta) values. Within one sign, distinct modes always have
    // distinct sin(theta), so generous clusters are safe (the Gram step
    // separates them); merging across zero is not, because theta and
    // pi - theta share sin(theta).
    int lo = 0;
    while (lo < dim) {
        int hi = lo + 1;
        while (hi < dim &&
               ssolve.eigenvalues()[hi] - ssolve.eigenvalues()[lo] < 1e-8 &&
               !(ssolve.eigenvalues()[lo] < -1e-9 && ssolve.eigenvalues()[hi] > 1e-9))
            ++hi;
        const int g = hi - lo;
        const Eigen::MatrixXd w = ssolve.eigenvectors().middleCols(lo, g);
        Eigen::MatrixXd kg = w.transpose() * skew * w;
        kg = 0.5 * (kg - kg.transpose().eval());
        const Eigen::MatrixXd gram = kg.transpose() * kg;  // PSD, eigenvalues s^2
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ksolve(gram);
        if (ksolve.info() != Eigen::Success)
            throw NumericalFailure("plane eigensolve failed at dimension " +
                                   std::to_string(dim));
        std::vector<Eigen::VectorXd> captured;
        for (int j = 0; j < g; ++j) {
            Eigen::VectorXd p = ksolve.eigenvectors().col(j);
            for (const auto& v : captured) p -= v.dot(p) * v;
            const double rest = p.norm();
            if (rest < 0.5) continue;  // plane already captured via its partner
            p /= rest;
            const double s2 = std::max(0.0, ksolve.eigenvalues()[j]);
            const double s = std::sqrt(s2);
            const Eigen::VectorXd full_p = w * p;
            const double c = full_p.dot(a * full_p);  // Rayleigh cos(theta)
            if (s < 1e-14) {
                emit_real(full_p, c);
                captured.push_back(p);
                continue;
            }
            const Eigen::VectorXd q = kg * p / s;
            emit_pair(full_p, w * q, c, s);
            captured.push_back(p);
            captured.push_back(q);
        }
        lo = hi;
    }
    if (emitted != dim)
        throw NumericalFailure("eigenbasis incomplete at dimension " +
                               std::to_string(dim));

    es.beta = es.eigenvectors.adjoint() * psi0.cast<std::complex<double>>();

    // residual validation
    double worst = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double res = (a.cast<std::complex<double>>() * es.eigenvectors.col(k) -
                            es.eigenvalues[k] * es.eigenvectors.col(k))
                               .norm();
        worst = std::max(worst, res);
    }
    if (worst > 1e-9)
        throw NumericalFailure("eigenpair residual " + std::to_string(worst) +
                               " at dimension " + std::to_string(dim));

    // dominant conjugate pair: largest |beta| among Im(lambda) > 0, ties
    // broken toward the smaller eigenangle
    double best = -1.0;
    double best_theta = 0.0;
    for (int k = 0; k < dim; ++k) {
        if (es.eigenvalues[k].imag() <= 1e-12) continue;
        const double b = std::abs(es.beta[k]);
        const double th = std::arg(es.eigenvalues[k]);
        if (b > best + 1e-12 || (std::abs(b - best) <= 1e-12 && th < best_theta)) {
            best = b;
            best_theta = th;
            es.dominant = k;
        }
    }
    if (es.dominant < 0)
        throw NumericalFailure("no complex eigenpair found at dimension " +
                               std::to_string(dim));
    es.theta_lambda = std::arg(es.eigenvalues[es.dominant]);
    return es;
}

// Two-term amplitude approximation for one reduced basis state:
// W_phi(n) = 2 |beta| |z_phi| cos(theta_beta + theta_z + theta_lambda n).
inline double approx_amplitude(const EigenSystem& es, int state_index, std::int64_t n) {
    const std::complex<double> z = es.z_of(state_index);
    const double mag = 2.0 * es.beta_abs() * std::abs(z);
    return mag * std::cos(es.theta_beta() + std::arg(z) +
                          es.theta_lambda * static_cast<double>(n));
}

// Predicted step of the first path-probability peak: pi/(2 theta) adjusted by
// the initial phase, which sits near -pi/2 for on-path states. The offset is
// the |z|^2-weighted circular mean over on-path states (x = 2..M+1).
inline std::int64_t predicted_peak_step(const EigenSystem& es, const ReducedBasis& basis) {
    std::complex<double> acc(0.0, 0.0);
    const double tb = es.theta_beta();
    for (int d = 2; d <= basis.live_depth() + 1; ++d) {
        const int c = ReducedBasis::class_index_of(d, d);
        for (int dir = 0; dir < 2; ++dir) {
            const std::complex<double> z = es.z_of(2 * c + dir);
            const double phi = tb + std::arg(z);
            acc += std::norm(z) * std::exp(std::complex<double>(0.0, 2.0 * phi));
        }
    }
    double angle = std::arg(acc);
    if (angle > 0.0) angle -= 2.0 * M_PI;
    const double n_star = -angle / (2.0 * es.theta_lambda);
    return std::max<std::int64_t>(1, std::llround(n_star));
}

}  // namespace ntree
