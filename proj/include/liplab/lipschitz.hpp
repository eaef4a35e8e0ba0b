#pragma once

#include <functional>
#include <limits>
#include <sstream>
#include <utility>

#include "liplab/normed_space.hpp"

namespace liplab {

// ---------------------------------------------------------------------------
// Real-valued functions on a normed space, finite samples of such functions,
// Lipschitz constants on sets, asymptotic slopes, and two extension
// operators from finite bases: the classical lower envelope and a plateau
// variant that is additionally constant near each base point.
// ---------------------------------------------------------------------------

struct ScalarField {
    NormedSpace space;
    std::function<double(const Vec&)> eval;
    std::function<Vec(const Vec&)> gradient;  // may be empty; a.e. gradient where set
    std::optional<double> lip_bound;          // declared global Lipschitz constant
    std::optional<std::pair<double, double>> range;

    double operator()(const Vec& x) const { return eval(x); }
    bool has_gradient() const { return static_cast<bool>(gradient); }
};

/// Values on a finite point set; points must be pairwise distinct.
struct FiniteSampleFunction {
    NormedSpace space;
    Mat points;
    Vec values;
    double min_pairwise_distance = 0.0;

    FiniteSampleFunction(NormedSpace s, Mat pts, Vec vals)
        : space(std::move(s)), points(std::move(pts)), values(std::move(vals)) {
        if (points.size() != values.size())
            throw std::invalid_argument("FiniteSampleFunction: points/values size mismatch");
        if (points.empty()) throw std::invalid_argument("FiniteSampleFunction: empty base");
        for (const auto& p : points) space.check_dim(p);
        min_pairwise_distance = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t j = i + 1; j < points.size(); ++j)
                min_pairwise_distance = std::min(min_pairwise_distance, space.norm(vec_sub(points[i], points[j])));
        if (points.size() == 1) min_pairwise_distance = std::numeric_limits<double>::infinity();
        if (!(min_pairwise_distance > 0.0))
            throw std::invalid_argument("FiniteSampleFunction: duplicate points");
    }

    std::size_t size() const { return points.size(); }

    /// CSV layout: header x_1,...,x_d,value then one row per point.
    std::string to_csv() const {
        std::ostringstream out;
        const int d = space.dim();
        for (int i = 0; i < d; ++i) out << "x_" << (i + 1) << ",";
        out << "value\n";
        for (std::size_t r = 0; r < points.size(); ++r) {
            for (int i = 0; i < d; ++i) out << format_g17(points[r][static_cast<std::size_t>(i)]) << ",";
            out << format_g17(values[r]) << "\n";
        }
        return out.str();
    }

    static FiniteSampleFunction from_csv(const NormedSpace& space, const std::string& csv) {
        std::istringstream in(csv);
        std::string line;
        if (!std::getline(in, line)) throw std::invalid_argument("FiniteSampleFunction: empty CSV");
        Mat pts;
        Vec vals;
        const auto d = static_cast<std::size_t>(space.dim());
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream row(line);
            std::string cell;
            Vec fields;
            while (std::getline(row, cell, ',')) fields.push_back(std::stod(cell));
            if (fields.size() != d + 1) throw std::invalid_argument("FiniteSampleFunction: bad CSV row");
            vals.push_back(fields.back());
            fields.pop_back();
            pts.push_back(std::move(fields));
        }
        return FiniteSampleFunction(space, std::move(pts), std::move(vals));
    }
};

// ---------------------------------------------------------------------------
// Lipschitz constants on finite sets.
// ---------------------------------------------------------------------------

/// max over distinct pairs of |f(x)-f(y)| / ||x-y||; zero for a single point.
inline double lip_on_set(const NormedSpace& space, const Mat& points, const Vec& values) {
    if (points.empty()) throw std::invalid_argument("lip_on_set: empty point set");
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double d = space.norm(vec_sub(points[i], points[j]));
            if (!(d > 0.0)) throw std::invalid_argument("lip_on_set: duplicate points (zero denominator)");
            best = std::max(best, std::abs(values[i] - values[j]) / d);
        }
    }
    return best;
}

inline double lip_on_set(const FiniteSampleFunction& f) { return lip_on_set(f.space, f.points, f.values); }

inline double lip_on_set(const ScalarField& f, const Mat& points) {
    Vec values(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) values[i] = f.eval(points[i]);
    return lip_on_set(f.space, points, values);
}

// ---------------------------------------------------------------------------
// Ball sampling (rejection from the coordinate box that encloses the ball).
// ---------------------------------------------------------------------------

inline Vec sample_ball(const NormedSpace& space, const Vec& center, double r, Rng& rng) {
    const Vec ext = space.ball_coordinate_extents(r);
    Vec v(center.size());
    for (int attempt = 0; attempt < 10000; ++attempt) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.uniform(-ext[i], ext[i]);
        if (space.norm(v) < r) return vec_add(center, v);
    }
    throw std::runtime_error("sample_ball: rejection sampling failed");
}

// ---------------------------------------------------------------------------
// Asymptotic slope estimation: for each radius r of a decreasing schedule,
// estimate Lip(f; B_r(x)) by brute force over sampled pairs in the ball and
// over probe pairs through x (coordinate directions plus, when f carries a
// gradient, the witness direction of its dual norm, which makes the estimate
// exact for affine fields).  The reported slope is the smallest-radius
// estimate; the whole trace is returned as a noisy proxy for the monotone
// exact quantity.
// ---------------------------------------------------------------------------

struct SlopeTrace {
    double slope = 0.0;
    std::vector<std::pair<double, double>> trace;  // (radius, estimate)
};

inline SlopeTrace asymptotic_slope(const ScalarField& f, const Vec& x, const Vec& radii,
                                   int samples_per_radius, std::uint64_t seed) {
    if (radii.empty()) throw std::invalid_argument("asymptotic_slope: empty radius schedule");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw std::invalid_argument("asymptotic_slope: radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1]))
            throw std::invalid_argument("asymptotic_slope: radius schedule must be strictly decreasing");
    }
    if (samples_per_radius < 2) throw std::invalid_argument("asymptotic_slope: need at least two samples");
    f.space.check_dim(x);

    SlopeTrace out;
    const double fx = f.eval(x);
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        const double r = radii[ri];
        Rng rng(derive_seed(seed, ri));
        Mat pts{x};
        Vec vals{fx};
        auto push = [&](const Vec& p) {
            pts.push_back(p);
            vals.push_back(f.eval(p));
        };
        for (int s = 0; s < samples_per_radius; ++s) push(sample_ball(f.space, x, r, rng));
        // probe pairs through x: coordinate directions scaled into the open ball
        const double shrink = 1.0 - 1e-9;
        for (int i = 0; i < f.space.dim(); ++i) {
            Vec e(static_cast<std::size_t>(f.space.dim()), 0.0);
            e[static_cast<std::size_t>(i)] = 1.0;
            const double n = f.space.norm(e);
            push(vec_add(x, vec_scale(e, shrink * r / n)));
            push(vec_add(x, vec_scale(e, -shrink * r / n)));
        }
        if (f.has_gradient()) {
            const Vec g = f.gradient(x);
            if (sup_norm(g) > 0.0) {
                const Vec w = f.space.dual_norm_witness(g).witness;
                push(vec_add(x, vec_scale(w, shrink * r)));
                push(vec_add(x, vec_scale(w, -shrink * r)));
            }
        }
        double est = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                const double d = f.space.norm(vec_sub(pts[i], pts[j]));
                if (d > 0.0) est = std::max(est, std::abs(vals[i] - vals[j]) / d);
            }
        out.trace.emplace_back(r, est);
        out.slope = est;
    }
    return out;
}

/// Asymptotic slope within a finite metric subspace: Lip over the points of
/// the sample that fall in B_r(x); every point of a finite set is isolated,
/// so the limit is 0 at the base points.
inline SlopeTrace asymptotic_slope(const FiniteSampleFunction& f, const Vec& x, const Vec& radii) {
    if (radii.empty()) throw std::invalid_argument("asymptotic_slope: empty radius schedule");
    SlopeTrace out;
    for (double r : radii) {
        Mat pts;
        Vec vals;
        for (std::size_t i = 0; i < f.points.size(); ++i) {
            if (f.space.norm(vec_sub(f.points[i], x)) < r) {
                pts.push_back(f.points[i]);
                vals.push_back(f.values[i]);
            }
        }
        double est = 0.0;
        if (pts.size() >= 2) est = lip_on_set(f.space, pts, vals);
        out.trace.emplace_back(r, est);
        out.slope = est;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lower-envelope (McShane) extension from a finite base.
// ---------------------------------------------------------------------------

inline ScalarField mcshane_extend(const FiniteSampleFunction& base, double lip) {
    const double base_lip = base.size() > 1 ? lip_on_set(base) : 0.0;
    if (lip < base_lip - 1e-12 * std::max(1.0, base_lip))
        throw std::invalid_argument("mcshane_extend: constant below the Lipschitz constant of the base");
    const auto data = std::make_shared<FiniteSampleFunction>(base);
    ScalarField f;
    f.space = base.space;
    f.lip_bound = lip;
    f.eval = [data, lip](const Vec& y) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < data->points.size(); ++i)
            best = std::min(best, data->values[i] + lip * data->space.norm(vec_sub(y, data->points[i])));
        return best;
    };
    f.gradient = [data, lip](const Vec& y) {
        std::size_t act = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < data->points.size(); ++i) {
            const double t = data->values[i] + lip * data->space.norm(vec_sub(y, data->points[i]));
            if (t < best) {
                best = t;
                act = i;
            }
        }
        return vec_scale(data->space.norm_gradient(vec_sub(y, data->points[act])), lip);
    };
    return f;
}

// ---------------------------------------------------------------------------
// Plateau extension: an (L+eps)-Lipschitz extension of a finite sample that
// is constant on a small ball around each base point and stays inside the
// sample's value range.
//
// With L = Lip(base), L_ext = L + eps and plateau radius
//     r = eps * d_min / (2 (L + eps)),
// the clamped envelope
//     y -> median(m, min_i [ v_i + L_ext * max(0, ||y - x_i|| - r) ], M)
// restores v_j at x_j exactly and equals v_j on the whole closed r-ball
// around x_j: for any other base point, eps * d_ij >= 2 L_ext r, which is
// exactly the triangle-inequality margin needed for the j-th term to win.
// The same margin makes this lower envelope dominate the matching upper
// envelope max_i [ v_i - L_ext * max(0, ||y - x_i|| - r) ] everywhere.
// ---------------------------------------------------------------------------

struct PlateauExtension {
    FiniteSampleFunction base;
    double lip_base = 0.0;
    double lip_ext = 0.0;
    double plateau_radius = 0.0;
    std::pair<double, double> bounds{0.0, 0.0};

    double eval(const Vec& y) const {
        if (base.size() == 1) return base.values[0];
        const double e = lower_envelope(y);
        return std::min(std::max(e, bounds.first), bounds.second);
    }

    double lower_envelope(const Vec& y) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < base.points.size(); ++i)
            best = std::min(best, base.values[i] + lip_ext * ramp(base.space.norm(vec_sub(y, base.points[i]))));
        return best;
    }

    double upper_envelope(const Vec& y) const {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < base.points.size(); ++i)
            best = std::max(best, base.values[i] - lip_ext * ramp(base.space.norm(vec_sub(y, base.points[i]))));
        return best;
    }

    Vec gradient(const Vec& y) const {
        Vec zero(static_cast<std::size_t>(base.space.dim()), 0.0);
        if (base.size() == 1) return zero;
        std::size_t act = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < base.points.size(); ++i) {
            const double t = base.values[i] + lip_ext * ramp(base.space.norm(vec_sub(y, base.points[i])));
            if (t < best) {
                best = t;
                act = i;
            }
        }
        if (best < bounds.first || best > bounds.second) return zero;  // clamp active
        if (base.space.norm(vec_sub(y, base.points[act])) <= plateau_radius) return zero;
        return vec_scale(base.space.norm_gradient(vec_sub(y, base.points[act])), lip_ext);
    }

    ScalarField as_field() const {
        const auto self = std::make_shared<PlateauExtension>(*this);
        ScalarField f;
        f.space = base.space;
        f.lip_bound = lip_ext;
        f.range = bounds;
        f.eval = [self](const Vec& y) { return self->eval(y); };
        f.gradient = [self](const Vec& y) { return self->gradient(y); };
        return f;
    }

private:
    double ramp(double d) const { return std::max(0.0, d - plateau_radius); }
};

inline PlateauExtension plateau_extend(const FiniteSampleFunction& base, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("plateau_extend: eps must be positive");
    PlateauExtension ext{base, 0.0, 0.0, 0.0, {0.0, 0.0}};
    ext.lip_base = base.size() > 1 ? lip_on_set(base) : 0.0;
    ext.lip_ext = ext.lip_base + eps;
    ext.plateau_radius = base.size() > 1
                             ? eps * base.min_pairwise_distance / (2.0 * (ext.lip_base + eps))
                             : std::numeric_limits<double>::infinity();
    const auto [mn, mx] = std::minmax_element(base.values.begin(), base.values.end());
    ext.bounds = {*mn, *mx};
    return ext;
}

// ---------------------------------------------------------------------------
// Piecewise-linear fields given in closed form: a minimum of finitely many
// max-affine (convex) pieces, optionally clamped to a value interval.  This
// covers the named function families (affine maps, kinks |x-c|, capped
// norm cones, ramps) and keeps slopes available in closed form.
// ---------------------------------------------------------------------------

struct MaxAffinePiece {
    Mat slopes;   // one row per affine term
    Vec offsets;  // matching constant terms
};

struct PolyhedralFunction {
    NormedSpace space;
    std::vector<MaxAffinePiece> pieces;  // f = min over pieces of max-affine
    std::optional<std::pair<double, double>> clamp;

    double eval(const Vec& x) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& piece : pieces) best = std::min(best, eval_piece(piece, x));
        if (clamp) best = std::min(std::max(best, clamp->first), clamp->second);
        return best;
    }

    /// a.e. gradient: slope of the active affine term of the active piece
    /// (zero where the clamp is active).
    Vec gradient(const Vec& x) const {
        double best = std::numeric_limits<double>::infinity();
        const Vec* slope = nullptr;
        for (const auto& piece : pieces) {
            double pbest = -std::numeric_limits<double>::infinity();
            const Vec* pslope = nullptr;
            for (std::size_t k = 0; k < piece.slopes.size(); ++k) {
                const double t = dot(piece.slopes[k], x) + piece.offsets[k];
                if (t > pbest) {
                    pbest = t;
                    pslope = &piece.slopes[k];
                }
            }
            if (pbest < best) {
                best = pbest;
                slope = pslope;
            }
        }
        if (clamp && (best <= clamp->first || best >= clamp->second))
            return Vec(static_cast<std::size_t>(space.dim()), 0.0);
        return slope ? *slope : Vec(static_cast<std::size_t>(space.dim()), 0.0);
    }

    /// Upper bound on the global Lipschitz constant (max dual norm over all
    /// slopes); tight for the families used here, where every slope region
    /// has positive measure.
    double lip_bound() const {
        double m = 0.0;
        for (const auto& piece : pieces)
            for (const auto& s : piece.slopes) m = std::max(m, space.dual_norm(s));
        return m;
    }

    ScalarField as_field() const {
        const auto self = std::make_shared<PolyhedralFunction>(*this);
        ScalarField f;
        f.space = space;
        f.lip_bound = lip_bound();
        if (clamp) f.range = clamp;
        f.eval = [self](const Vec& x) { return self->eval(x); };
        f.gradient = [self](const Vec& x) { return self->gradient(x); };
        return f;
    }

private:
    static double eval_piece(const MaxAffinePiece& piece, const Vec& x) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < piece.slopes.size(); ++k)
            best = std::max(best, dot(piece.slopes[k], x) + piece.offsets[k]);
        return best;
    }
};

namespace fields {

/// omega . x + c
inline PolyhedralFunction affine(const NormedSpace& space, Vec omega, double c) {
    space.check_dim(omega);
    return PolyhedralFunction{space, {MaxAffinePiece{{std::move(omega)}, {c}}}, std::nullopt};
}

/// |x - c| in dimension one
inline PolyhedralFunction kink(const NormedSpace& space, double c) {
    if (space.dim() != 1) throw std::invalid_argument("fields::kink: dimension-one family");
    return PolyhedralFunction{space, {MaxAffinePiece{{{1.0}, {-1.0}}, {-c, c}}}, std::nullopt};
}

/// min(1, ||x||_1) on a planar space
inline PolyhedralFunction norm_cone(const NormedSpace& space) {
    if (space.dim() != 2) throw std::invalid_argument("fields::norm_cone: planar family");
    MaxAffinePiece one{{{0.0, 0.0}}, {1.0}};
    MaxAffinePiece l1{{{1.0, 1.0}, {1.0, -1.0}, {-1.0, 1.0}, {-1.0, -1.0}}, {0.0, 0.0, 0.0, 0.0}};
    return PolyhedralFunction{space, {one, l1}, std::pair{0.0, 1.0}};
}

/// 0 left of center-width/2, 1 right of center+width/2, linear in between
inline PolyhedralFunction ramp(const NormedSpace& space, double center, double width) {
    if (space.dim() != 1) throw std::invalid_argument("fields::ramp: dimension-one family");
    if (!(width > 0.0)) throw std::invalid_argument("fields::ramp: width must be positive");
    MaxAffinePiece one{{{0.0}}, {1.0}};
    MaxAffinePiece rise{{{0.0}, {1.0 / width}}, {0.0, 0.5 - center / width}};
    return PolyhedralFunction{space, {one, rise}, std::pair{0.0, 1.0}};
}

}  // namespace fields

}  // namespace liplab
