#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "liplab/util.hpp"

namespace liplab {

// ---------------------------------------------------------------------------
// Finite-dimensional normed spaces.
//
// Three norm kinds are supported:
//   * lp:          ||v|| = (sum |v_i|^p)^(1/p), p in [1,inf]
//   * weighted lp: ||v|| = (sum (w_i |v_i|)^p)^(1/p), positive weights
//   * polyhedral:  ||v|| = max_j |a_j . v| for a functional matrix whose rows
//                  span the dual space (so the max is a genuine norm)
//
// Dual norms are closed-form for (weighted) lp via the conjugate exponent and
// are computed exactly for polyhedral norms by enumerating the vertices of
// the unit ball (a bounded polytope once the rows span).  dual_norm_witness
// returns a unit vector attaining the supremum, which downstream code uses as
// a probe direction for slope estimators.
// ---------------------------------------------------------------------------

inline constexpr double kInfExponent = std::numeric_limits<double>::infinity();

struct DualNormResult {
    double value = 0.0;
    Vec witness;  // ||witness|| <= 1 and omega(witness) == value (up to solver tolerance)
};

class NormedSpace {
public:
    enum class Kind { Lp, WeightedLp, Polyhedral };

    /// Unset space (dim 0); any evaluation on it fails the dimension check.
    NormedSpace() = default;

    static NormedSpace lp(int dim, double p) {
        validate_exponent(p);
        if (dim <= 0) throw std::invalid_argument("NormedSpace: dim must be positive");
        NormedSpace s;
        s.kind_ = Kind::Lp;
        s.dim_ = dim;
        s.p_ = p;
        s.weights_.assign(static_cast<std::size_t>(dim), 1.0);
        return s;
    }

    static NormedSpace weighted_lp(Vec weights, double p) {
        validate_exponent(p);
        if (weights.empty()) throw std::invalid_argument("NormedSpace: empty weight vector");
        for (double w : weights)
            if (!(w > 0.0)) throw std::invalid_argument("NormedSpace: weights must be positive");
        NormedSpace s;
        s.kind_ = Kind::WeightedLp;
        s.dim_ = static_cast<int>(weights.size());
        s.p_ = p;
        s.weights_ = std::move(weights);
        return s;
    }

    static NormedSpace polyhedral(Mat functionals) {
        if (functionals.empty()) throw std::invalid_argument("NormedSpace: empty functional set");
        const std::size_t dim = functionals[0].size();
        if (dim == 0) throw std::invalid_argument("NormedSpace: zero-dimensional functionals");
        for (const auto& row : functionals)
            if (row.size() != dim) throw std::invalid_argument("NormedSpace: ragged functional matrix");
        if (matrix_rank(functionals) != static_cast<int>(dim))
            throw std::invalid_argument("NormedSpace: polyhedral functionals must span the dual");
        NormedSpace s;
        s.kind_ = Kind::Polyhedral;
        s.dim_ = static_cast<int>(dim);
        s.functionals_ = std::move(functionals);
        return s;
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    double exponent() const { return p_; }
    const Vec& weights() const { return weights_; }
    const Mat& functionals() const { return functionals_; }

    double norm(const Vec& v) const {
        check_dim(v);
        switch (kind_) {
            case Kind::Lp:
            case Kind::WeightedLp: {
                if (p_ == kInfExponent) {
                    double m = 0.0;
                    for (int i = 0; i < dim_; ++i)
                        m = std::max(m, weights_[static_cast<std::size_t>(i)] * std::abs(v[static_cast<std::size_t>(i)]));
                    return m;
                }
                if (p_ == 1.0) {
                    double s = 0.0;
                    for (int i = 0; i < dim_; ++i)
                        s += weights_[static_cast<std::size_t>(i)] * std::abs(v[static_cast<std::size_t>(i)]);
                    return s;
                }
                double s = 0.0;
                for (int i = 0; i < dim_; ++i)
                    s += std::pow(weights_[static_cast<std::size_t>(i)] * std::abs(v[static_cast<std::size_t>(i)]), p_);
                return std::pow(s, 1.0 / p_);
            }
            case Kind::Polyhedral: {
                double m = 0.0;
                for (const auto& row : functionals_) m = std::max(m, std::abs(dot(row, v)));
                return m;
            }
        }
        return 0.0;
    }

    /// sup { omega . v : ||v|| <= 1 }.
    double dual_norm(const Vec& omega) const { return dual_norm_witness(omega).value; }

    DualNormResult dual_norm_witness(const Vec& omega) const {
        check_dim(omega);
        if (kind_ == Kind::Polyhedral) return polyhedral_dual(omega);
        return lp_dual(omega);
    }

    /// Gradient of the norm at v (defined a.e.; a fixed subgradient selection
    /// is returned on the non-smooth set).  For any v != 0 the result has
    /// dual norm 1 and pairs with v to norm(v).
    Vec norm_gradient(const Vec& v) const {
        check_dim(v);
        Vec g(static_cast<std::size_t>(dim_), 0.0);
        const double n = norm(v);
        if (n == 0.0) return g;
        switch (kind_) {
            case Kind::Lp:
            case Kind::WeightedLp: {
                if (p_ == kInfExponent) {
                    std::size_t best = 0;
                    double bestval = -1.0;
                    for (int i = 0; i < dim_; ++i) {
                        const auto u = static_cast<std::size_t>(i);
                        const double s = weights_[u] * std::abs(v[u]);
                        if (s > bestval) {
                            bestval = s;
                            best = u;
                        }
                    }
                    g[best] = weights_[best] * (v[best] >= 0.0 ? 1.0 : -1.0);
                    return g;
                }
                if (p_ == 1.0) {
                    for (int i = 0; i < dim_; ++i) {
                        const auto u = static_cast<std::size_t>(i);
                        if (v[u] != 0.0) g[u] = weights_[u] * (v[u] > 0.0 ? 1.0 : -1.0);
                    }
                    return g;
                }
                for (int i = 0; i < dim_; ++i) {
                    const auto u = static_cast<std::size_t>(i);
                    const double s = weights_[u] * std::abs(v[u]);
                    if (s == 0.0) continue;
                    g[u] = weights_[u] * (v[u] > 0.0 ? 1.0 : -1.0) * std::pow(s / n, p_ - 1.0);
                }
                return g;
            }
            case Kind::Polyhedral: {
                std::size_t best = 0;
                double bestval = -1.0;
                for (std::size_t j = 0; j < functionals_.size(); ++j) {
                    const double s = std::abs(dot(functionals_[j], v));
                    if (s > bestval) {
                        bestval = s;
                        best = j;
                    }
                }
                const double sgn = dot(functionals_[best], v) >= 0.0 ? 1.0 : -1.0;
                for (int i = 0; i < dim_; ++i)
                    g[static_cast<std::size_t>(i)] = sgn * functionals_[best][static_cast<std::size_t>(i)];
                return g;
            }
        }
        return g;
    }

    /// Coordinate extent of the radius-r ball: |v_i| <= r / ||e_i|| whenever
    /// ||v|| <= r.  Used to enumerate lattice nodes and to sample balls.
    Vec ball_coordinate_extents(double r) const {
        Vec ext(static_cast<std::size_t>(dim_), 0.0);
        for (int i = 0; i < dim_; ++i) {
            Vec e(static_cast<std::size_t>(dim_), 0.0);
            e[static_cast<std::size_t>(i)] = 1.0;
            ext[static_cast<std::size_t>(i)] = r / norm(e);
        }
        return ext;
    }

    void check_dim(const Vec& v) const {
        if (static_cast<int>(v.size()) != dim_)
            throw std::invalid_argument("NormedSpace: dimension mismatch (expected " + std::to_string(dim_) +
                                        ", got " + std::to_string(v.size()) + ")");
    }

private:
    static void validate_exponent(double p) {
        if (!(p >= 1.0))
            throw std::invalid_argument("NormedSpace: exponent must be in [1, inf]");
    }

    DualNormResult lp_dual(const Vec& omega) const {
        DualNormResult r;
        r.witness.assign(static_cast<std::size_t>(dim_), 0.0);
        // s_i = |omega_i| / w_i, dual value = ||s||_q with 1/p + 1/q = 1.
        Vec s(static_cast<std::size_t>(dim_), 0.0);
        bool zero = true;
        for (int i = 0; i < dim_; ++i) {
            const auto u = static_cast<std::size_t>(i);
            s[u] = std::abs(omega[u]) / weights_[u];
            if (s[u] != 0.0) zero = false;
        }
        if (zero) return r;
        if (p_ == 1.0) {  // dual is weighted sup
            std::size_t best = 0;
            for (std::size_t i = 1; i < s.size(); ++i)
                if (s[i] > s[best]) best = i;
            r.value = s[best];
            r.witness[best] = (omega[best] >= 0.0 ? 1.0 : -1.0) / weights_[best];
            return r;
        }
        if (p_ == kInfExponent) {  // dual is weighted l1
            double sum = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                sum += s[i];
                if (omega[i] != 0.0) r.witness[i] = (omega[i] > 0.0 ? 1.0 : -1.0) / weights_[i];
            }
            r.value = sum;
            return r;
        }
        const double q = p_ / (p_ - 1.0);
        double sq = 0.0;
        for (double x : s) sq += std::pow(x, q);
        const double d = std::pow(sq, 1.0 / q);
        r.value = d;
        // witness attaining Hoelder equality: w_i v_i = sign(omega_i) (s_i/d)^(q-1)
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (omega[i] == 0.0) continue;
            r.witness[i] = (omega[i] > 0.0 ? 1.0 : -1.0) * std::pow(s[i] / d, q - 1.0) / weights_[i];
        }
        return r;
    }

    // Vertices of the polyhedral unit ball {v : |a_j . v| <= 1} sit on d
    // active constraints; enumerate d-subsets of rows with sign patterns and
    // keep the feasible solutions.  The dual norm is the max of omega over
    // the vertex set, attained at a reported witness.
    DualNormResult polyhedral_dual(const Vec& omega) const {
        const std::size_t m = functionals_.size();
        const auto d = static_cast<std::size_t>(dim_);
        if (m > 40) throw std::runtime_error("polyhedral dual norm: too many functionals for vertex enumeration");

        DualNormResult best;
        best.value = -1.0;
        std::vector<std::size_t> idx(d, 0);

        // iterate over d-subsets of {0..m-1}
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
            if (depth == d) {
                Mat a(d, Vec(d, 0.0));
                for (std::size_t r0 = 0; r0 < d; ++r0) a[r0] = functionals_[idx[r0]];
                // sign patterns with leading +1 (the mirrored vertex is -v)
                const std::size_t patterns = d == 1 ? 1 : (1ULL << (d - 1));
                for (std::size_t pat = 0; pat < patterns; ++pat) {
                    Vec b(d, 1.0);
                    for (std::size_t k = 0; k + 1 < d; ++k)
                        if (pat & (1ULL << k)) b[k + 1] = -1.0;
                    auto v = solve_linear(a, b);
                    if (!v) continue;
                    // feasibility of +-v w.r.t. every row
                    double maxabs = 0.0;
                    for (const auto& row : functionals_) maxabs = std::max(maxabs, std::abs(dot(row, *v)));
                    if (maxabs > 1.0 + 1e-9) continue;
                    for (int sgn : {+1, -1}) {
                        Vec cand = sgn > 0 ? *v : vec_scale(*v, -1.0);
                        const double val = dot(omega, cand);
                        if (val > best.value) {
                            best.value = val;
                            best.witness = std::move(cand);
                        }
                    }
                }
                return;
            }
            for (std::size_t i = start; i + (d - depth) <= m; ++i) {
                idx[depth] = i;
                rec(i + 1, depth + 1);
            }
        };
        rec(0, 0);

        if (best.value < 0.0)
            throw std::runtime_error("polyhedral dual norm: vertex enumeration failed to certify optimality");
        // guard against the +1e-9 feasibility slack
        const double n = norm(best.witness);
        if (n > 1.0) {
            best.witness = vec_scale(best.witness, 1.0 / n);
            best.value = dot(omega, best.witness);
        }
        if (sup_norm(omega) == 0.0) best.value = 0.0;
        return best;
    }

    Kind kind_ = Kind::Lp;
    int dim_ = 0;
    double p_ = 2.0;
    Vec weights_;
    Mat functionals_;
};

inline double norm_eval(const NormedSpace& space, const Vec& v) { return space.norm(v); }
inline double dual_norm_eval(const NormedSpace& space, const Vec& omega) { return space.dual_norm(omega); }

// ---------------------------------------------------------------------------
// Finite nets on the dual sphere and the induced embedding into l_inf(F).
//
// A DualNet is a finite family of dual-norm-1 functionals with
//     (1 - distortion) ||v|| <= max_omega omega(v) <= ||v||   for all v.
// Exact nets (distortion 0) exist for l1, l_inf, polyhedral norms and in
// dimension one; smooth lp norms get an angular grid whose density is chosen
// from the requested distortion (formulas below, then verified on a sample
// of directions).
// ---------------------------------------------------------------------------

struct DualNet {
    NormedSpace space;
    Mat functionals;     // each row has dual norm 1
    double distortion = 0.0;

    std::size_t size() const { return functionals.size(); }
};

/// (omega(v))_{omega in net} as a plain vector indexed like net.functionals.
inline Vec embed(const DualNet& net, const Vec& v) {
    net.space.check_dim(v);
    Vec out(net.functionals.size(), 0.0);
    for (std::size_t j = 0; j < net.functionals.size(); ++j) out[j] = dot(net.functionals[j], v);
    return out;
}

namespace detail {

inline Mat sign_pattern_functionals(const Vec& weights) {
    const std::size_t d = weights.size();
    Mat rows;
    rows.reserve(1ULL << d);
    for (std::size_t pat = 0; pat < (1ULL << d); ++pat) {
        Vec row(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) row[i] = (pat & (1ULL << i)) ? -weights[i] : weights[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

inline double measured_distortion(const NormedSpace& space, const Mat& functionals, std::uint64_t seed,
                                  int samples = 1000) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < samples; ++t) {
        Vec v(static_cast<std::size_t>(space.dim()), 0.0);
        double nn = 0.0;
        while (nn == 0.0) {
            for (auto& x : v) x = rng.normal();
            nn = space.norm(v);
        }
        double m = 0.0;
        for (const auto& row : functionals) m = std::max(m, dot(row, v));
        worst = std::max(worst, 1.0 - m / nn);
    }
    return worst;
}

}  // namespace detail

/// Finite dual-sphere net with tracked distortion.  delta is the requested
/// distortion in (0,1); kinds with exact finite nets return distortion 0.
inline DualNet dual_sphere_net(const NormedSpace& space, double delta, std::size_t budget = 200000,
                               std::uint64_t seed = 0x6e657464756c61ULL) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("dual_sphere_net: delta must be in (0,1)");
    const auto d = static_cast<std::size_t>(space.dim());
    DualNet net{space, {}, 0.0};

    const bool is_lp = space.kind() != NormedSpace::Kind::Polyhedral;
    const double p = space.exponent();

    if (space.kind() == NormedSpace::Kind::Polyhedral) {
        // The extreme dual functionals are among +-a_j, rescaled to dual
        // norm 1 (redundant rows have dual norm < 1 and must be inflated so
        // the net invariant holds; the inflated row still satisfies
        // omega(v) <= ||v|| by definition of the dual norm).
        for (const auto& row : space.functionals()) {
            const double dn = space.dual_norm(row);
            net.functionals.push_back(vec_scale(row, 1.0 / dn));
            net.functionals.push_back(vec_scale(row, -1.0 / dn));
        }
        net.distortion = 0.0;
        return net;
    }

    if (is_lp && p == 1.0) {
        // || v ||_{1,w} = max over sign patterns s of sum_i s_i w_i v_i ; 2^d functionals, exact.
        if ((1ULL << d) > budget) throw std::runtime_error("dual_sphere_net: net-size budget exceeded");
        net.functionals = detail::sign_pattern_functionals(space.weights());
        net.distortion = 0.0;
        return net;
    }
    if (is_lp && p == kInfExponent) {
        // || v ||_{inf,w} = max_i w_i |v_i| ; the 2d functionals +-w_i e_i are exact.
        for (std::size_t i = 0; i < d; ++i) {
            Vec row(d, 0.0);
            row[i] = space.weights()[i];
            net.functionals.push_back(row);
            row[i] = -space.weights()[i];
            net.functionals.push_back(row);
        }
        net.distortion = 0.0;
        return net;
    }
    if (d == 1) {
        // every norm on R is c|x|; the two functionals +-c are exact
        Vec e{1.0};
        const double c = space.norm(e);
        net.functionals = {{c}, {-c}};
        net.distortion = 0.0;
        return net;
    }

    // Smooth lp kinds: grid the direction space and take the norming
    // functional (the norm gradient) of each grid direction; it has dual
    // norm exactly 1.  Angular step:
    //   * (weighted) l2: theta = 2*acos(1-delta); in the weight-scaled
    //     coordinates the norm is Euclidean and the bound 1-cos(theta/2) <= delta
    //     is exact.
    //   * other p in (1,inf): theta = delta * c_N / (2 C_N), where
    //     C_N/c_N = d^{|1/p - 1/2|} * (max w / min w) bounds the equivalence
    //     ratio between the norm and the Euclidean one.
    // The constructed net is then verified on a sample of directions and
    // refined if the measured distortion exceeds delta.
    if (d > 3) throw std::runtime_error("dual_sphere_net: direction grids implemented for dim <= 3");

    double wmax = 0.0, wmin = std::numeric_limits<double>::infinity();
    for (double w : space.weights()) {
        wmax = std::max(wmax, w);
        wmin = std::min(wmin, w);
    }
    double theta;
    const bool euclid = (p == 2.0);
    if (euclid) {
        theta = 2.0 * std::acos(std::max(0.0, 1.0 - delta));
    } else {
        const double ratio = std::pow(static_cast<double>(d), std::abs(1.0 / p - 0.5)) * (wmax / wmin);
        theta = delta / (2.0 * ratio);
    }

    for (int attempt = 0; attempt < 8; ++attempt) {
        net.functionals.clear();
        auto push_direction = [&](Vec u) {
            if (euclid && space.kind() == NormedSpace::Kind::WeightedLp) {
                // grid lives in weight-scaled coordinates
                for (std::size_t i = 0; i < d; ++i) u[i] /= space.weights()[i];
            }
            net.functionals.push_back(space.norm_gradient(u));
        };
        if (d == 2) {
            const auto k = static_cast<std::size_t>(std::ceil(2.0 * M_PI / theta));
            if (k > budget) throw std::runtime_error("dual_sphere_net: net-size budget exceeded");
            for (std::size_t j = 0; j < k; ++j) {
                const double a = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(k);
                push_direction({std::cos(a), std::sin(a)});
            }
        } else {  // d == 3, latitude-longitude grid at step theta/sqrt(2)
            const double step = theta / std::sqrt(2.0);
            const auto bands = static_cast<std::size_t>(std::ceil(M_PI / step));
            std::size_t total = 0;
            for (std::size_t b = 0; b <= bands; ++b) {
                const double phi = M_PI * static_cast<double>(b) / static_cast<double>(bands);
                const auto k = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::ceil(2.0 * M_PI * std::sin(phi) / step)));
                total += k;
                if (total > budget) throw std::runtime_error("dual_sphere_net: net-size budget exceeded");
                for (std::size_t j = 0; j < k; ++j) {
                    const double a = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(k);
                    push_direction({std::sin(phi) * std::cos(a), std::sin(phi) * std::sin(a), std::cos(phi)});
                }
            }
        }
        const double measured = detail::measured_distortion(space, net.functionals, seed);
        if (measured <= delta) {
            net.distortion = delta;
            return net;
        }
        theta *= 0.5;
    }
    throw std::runtime_error("dual_sphere_net: could not reach requested distortion within budget");
}

}  // namespace liplab
