#include "tucker/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tucker/escape.hpp"
#include "tucker/generate.hpp"
#include "tucker/search.hpp"
#include "tucker/subspace.hpp"

namespace tucker::verify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

Vector unit_vector(Eigen::Index n, Rng& rng) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
    return v / v.norm();
}

Matrix random_orthogonal(Eigen::Index n, Rng& rng) {
    Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n, n, rng));
    return qr.householderQ();
}

// Q = U diag(exp(spread * g)) V^T
Matrix random_gauge(Eigen::Index n, double spread, Rng& rng) {
    Vector s(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = std::exp(spread * rng.normal());
    return random_orthogonal(n, rng) * s.asDiagonal() * random_orthogonal(n, rng).transpose();
}

// Same reconstruction, different parameters: M -> Q_m M, S -> S(Q1^-1, Q2^-1, Q3^-1).
FactorPoint gauge_transform(const FactorPoint& p, double spread, Rng& rng) {
    const auto r = static_cast<Eigen::Index>(p.rank());
    const Matrix q1 = random_gauge(r, spread, rng);
    const Matrix q2 = random_gauge(r, spread, rng);
    const Matrix q3 = random_gauge(r, spread, rng);
    return FactorPoint(multilinear_transform(p.S, q1.inverse(), q2.inverse(), q3.inverse()), q1 * p.A, q2 * p.B,
                       q3 * p.C);
}

struct RandomCase {
    FactorPoint p;
    Tensor3 T;
};

RandomCase random_case(Rng& rng) {
    const std::size_t r = uniform_int(rng, 1, 3);
    const std::size_t d = uniform_int(rng, std::max<std::size_t>(r, 2), 6);
    Tensor3 t = Tensor3::random_normal({d, d, d}, rng);
    t *= 1.0 / norm_f(t);
    return {FactorPoint::random_normal(r, d, 1.0, rng), std::move(t)};
}

void record(LemmaReport& rep, double allowed, double observed) {
    ++rep.trials;
    const double margin = allowed - observed;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (!(margin >= 0.0)) ++rep.failures;
}

LemmaReport start(const std::string& id, double tolerance) {
    LemmaReport rep;
    rep.id = id;
    rep.tolerance = tolerance;
    rep.worst_margin = kInf;
    return rep;
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Vector basis(Eigen::Index n, Eigen::Index i) {
    Vector e = Vector::Zero(n);
    e(i) = 1.0;
    return e;
}

}  // namespace

json to_json(const LemmaReport& rep) {
    json j;
    j["id"] = rep.id;
    j["trials"] = rep.trials;
    j["failures"] = rep.failures;
    j["worst_margin"] = std::isfinite(rep.worst_margin) ? json(rep.worst_margin) : json(nullptr);
    j["tolerance"] = rep.tolerance;
    j["pass"] = rep.pass;
    j["extra"] = rep.extra;
    return j;
}

LemmaReport check_orthogonality(int trials, Rng& rng, const GradientHook& hook) {
    LemmaReport rep = start("orthogonality", 1e-8);
    for (int i = 0; i < trials; ++i) {
        RandomCase c = random_case(rng);
        if (i % 2 == 1) c.p = gauge_transform(c.p, 0.5, rng);
        GradientParts g = gradient_parts(c.p, c.T);
        if (hook) hook(g);
        const FactorPoint gr = g.grad_R();
        const double lhs = std::abs(inner(g.grad_L, gr));
        record(rep, rep.tolerance * (1.0 + norm_f(g.grad_L) * norm_f(gr)), lhs);
    }
    rep.finish();
    return rep;
}

LemmaReport check_euler(int trials, Rng& rng, const GradientHook& hook) {
    LemmaReport rep = start("euler", 1e-8);
    for (int i = 0; i < trials; ++i) {
        RandomCase c = random_case(rng);
        GradientParts g = gradient_parts(c.p, c.T);
        if (hook) hook(g);
        const double lhs = std::abs(4.0 * g.phi - inner(g.grad_phi, c.p));
        record(rep, rep.tolerance * (1.0 + 4.0 * g.phi), lhs);
    }
    rep.finish();
    return rep;
}

LemmaReport check_sublevel_bound(const std::vector<double>& gammas, int trials, Rng& rng) {
    if (gammas.empty()) throw std::invalid_argument("sublevel_bound: no gamma values");
    LemmaReport rep = start("sublevel_bound", 0.0);
    const std::size_t r = 2, d = 4;
    const GeneratedTensor inst = generate_exact(r, d, rng.next_u64());
    const FactorPoint base = hosvd(inst.T, r);
    const double lambda = default_lambda(r);

    // Random points at assorted scales plus points on the gauge orbit of an exact solution.
    auto draw = [&](Rng& g) {
        if (g.uniform() < 0.5) return FactorPoint::random_normal(r, d, std::pow(10.0, -1.5 + 1.5 * g.uniform()), g);
        return gauge_transform(base, 1.5 * g.uniform(), g);
    };
    auto accepted_norms = [&](double gamma, Rng& g) {
        std::vector<double> norms;
        for (int i = 0; i < trials; ++i) {
            const FactorPoint p = draw(g);
            if (objective_f(p, inst.T, lambda).f <= gamma) norms.push_back(max_block_norm(p));
        }
        return norms;
    };

    // Pilot run fixes c, then fresh samples are checked against it.
    Rng pilot = rng.fork();
    double ratio = 0.0;
    for (double gamma : gammas) {
        for (double n : accepted_norms(gamma, pilot)) ratio = std::max(ratio, n / std::pow(gamma + 1.0, 0.125));
    }
    const double c = 2.0 * ratio;
    rep.tolerance = c;

    std::vector<double> xs, ys;
    json per_gamma = json::array();
    for (double gamma : gammas) {
        const std::vector<double> norms = accepted_norms(gamma, rng);
        const double bound = c * std::pow(gamma + 1.0, 0.125);
        double worst = 0.0;
        for (double n : norms) {
            record(rep, bound, n);
            worst = std::max(worst, n);
        }
        if (!norms.empty()) {
            xs.push_back(std::log(gamma + 1.0));
            ys.push_back(std::log(worst));
        }
        per_gamma.push_back({{"gamma", gamma}, {"accepted", norms.size()}, {"max_norm", worst}, {"bound", bound}});
    }
    rep.extra["c"] = c;
    rep.extra["levels"] = per_gamma;
    if (xs.size() >= 2) {
        const double exponent = slope_fit(xs, ys);
        rep.extra["exponent"] = exponent;
        record(rep, 0.25, exponent);
    }
    if (rep.trials == 0) ++rep.failures;
    rep.finish();
    return rep;
}

LemmaReport check_core_lower_bound(int trials, Rng& rng) {
    LemmaReport rep = start("core_lower_bound", 1e-12);
    for (int i = 0; i < trials; ++i) {
        const std::size_t r = uniform_int(rng, 1, 3);
        Tensor3 s = Tensor3::random_normal({r, r, r}, rng);
        s *= std::pow(10.0, -1.0 + 2.0 * rng.uniform());
        const double lhs = norm_f(multilinear_transform(s, flatten(s, 1), flatten(s, 2), flatten(s, 3)));
        const double rhs = std::pow(norm_f(s), 4) / std::pow(static_cast<double>(r), 4);
        // relative slack for rounding
        record(rep, lhs * (1.0 + rep.tolerance), rhs);
    }
    rep.finish();
    return rep;
}

LemmaReport check_submultiplicativity(int trials, Rng& rng) {
    LemmaReport rep = start("submultiplicativity", 1e-12);
    for (int i = 0; i < trials; ++i) {
        const std::size_t r = uniform_int(rng, 1, 3);
        const std::size_t d = uniform_int(rng, 1, 6);
        const Tensor3 s = Tensor3::random_normal({r, r, r}, rng);
        const auto ri = static_cast<Eigen::Index>(r), di = static_cast<Eigen::Index>(d);
        const Matrix a = gaussian_matrix(ri, di, rng), b = gaussian_matrix(ri, di, rng), c = gaussian_matrix(ri, di, rng);
        const double lhs = norm_f(multilinear_transform(s, a, b, c));
        const double rhs = norm_f(s) * matrix_norm2(a) * matrix_norm2(b) * matrix_norm2(c);
        record(rep, rhs * (1.0 + rep.tolerance), lhs);
    }
    rep.finish();
    return rep;
}

LemmaReport check_wedin(int trials, Rng& rng) {
    LemmaReport rep = start("wedin", 0.0);
    int attempts = 0;
    while (rep.trials < trials) {
        if (++attempts > 100 * trials) throw std::runtime_error("wedin: could not draw full-rank splits");
        const auto r = static_cast<Eigen::Index>(uniform_int(rng, 1, 3));
        const auto d = static_cast<Eigen::Index>(uniform_int(rng, static_cast<std::size_t>(r), 6));
        const Matrix m1 = gaussian_matrix(r, d, rng);
        const Matrix m2 = std::pow(10.0, -3.0 + 3.0 * rng.uniform()) * gaussian_matrix(r, d, rng);
        const Matrix m = m1 + m2;
        Eigen::JacobiSVD<Matrix> svd(m);
        const double sigma = svd.singularValues()(r - 1);
        if (numerical_rank(m) < static_cast<std::size_t>(r) || numerical_rank(m1) < static_cast<std::size_t>(r) ||
            sigma <= 1e-8) {
            continue;
        }
        const ProjectionDistance pd = projection_distance_bound(m, m1, m2, sigma);
        record(rep, pd.rhs, pd.lhs);
    }
    rep.finish();
    return rep;
}

LemmaReport check_anti_concentration(const std::vector<std::size_t>& dims, int trials, Rng& rng, int samples) {
    if (dims.empty()) throw std::invalid_argument("anti_concentration: no dimensions");
    constexpr double c1 = 0.1;
    constexpr double threshold = 0.3;
    LemmaReport rep = start("anti_concentration", threshold);
    double lowest = 1.0;
    for (int t = 0; t < trials; ++t) {
        const Dims dd{dims[uniform_int(rng, 0, dims.size() - 1)], dims[uniform_int(rng, 0, dims.size() - 1)],
                      dims[uniform_int(rng, 0, dims.size() - 1)]};
        const Tensor3 x = Tensor3::random_normal(dd, rng);
        const double level = c1 * norm_f(x) / std::sqrt(static_cast<double>(dd[0] * dd[1] * dd[2]));
        int hits = 0;
        for (int s = 0; s < samples; ++s) {
            const Vector a = unit_vector(static_cast<Eigen::Index>(dd[0]), rng);
            const Vector b = unit_vector(static_cast<Eigen::Index>(dd[1]), rng);
            const Vector c = unit_vector(static_cast<Eigen::Index>(dd[2]), rng);
            if (std::abs(trilinear(x, a, b, c)) >= level) ++hits;
        }
        const double prob = static_cast<double>(hits) / samples;
        lowest = std::min(lowest, prob);
        record(rep, prob, threshold);
    }

    // Rank-one sanity: for X = x (x) y (x) z, <a,x>^2 ~ g^2 / (g^2 + chi^2_{d-1}); compare the
    // direct estimate with one drawn through that representation.
    const std::size_t d = dims.front();
    const auto di = static_cast<Eigen::Index>(d);
    const Vector xv = unit_vector(di, rng), yv = unit_vector(di, rng), zv = unit_vector(di, rng);
    const Tensor3 x1 = Tensor3::outer(xv, yv, zv);
    const double level = c1 / std::sqrt(static_cast<double>(d * d * d));
    auto coord = [&](Rng& g) {
        const double head = g.normal();
        double tail = 0.0;
        for (std::size_t i = 1; i < d; ++i) {
            const double z = g.normal();
            tail += z * z;
        }
        return std::abs(head) / std::sqrt(head * head + tail);
    };
    int direct = 0, oracle = 0;
    for (int s = 0; s < samples; ++s) {
        const Vector a = unit_vector(di, rng), b = unit_vector(di, rng), c = unit_vector(di, rng);
        if (std::abs(trilinear(x1, a, b, c)) >= level) ++direct;
        if (coord(rng) * coord(rng) * coord(rng) >= level) ++oracle;
    }
    const double pd = static_cast<double>(direct) / samples, po = static_cast<double>(oracle) / samples;
    const double se = std::sqrt(std::max(pd * (1 - pd), po * (1 - po)) * 2.0 / samples);
    record(rep, 5.0 * se + 1e-12, std::abs(pd - po));
    rep.extra["c1"] = c1;
    rep.extra["lowest_probability"] = lowest;
    rep.extra["rank_one"] = {{"d", d}, {"direct", pd}, {"oracle", po}};
    rep.finish();
    return rep;
}

GalleryPoint one_missing_point() {
    // A lacks e2 while B and C span {e1, e2}; the e2 slice of T is orthogonal to what B, C can
    // produce from the current core, so the point is stationary.
    const std::size_t r = 2, d = 3;
    const double s = std::pow(0.5, 0.125);  // s^4 = 1/sqrt(2)
    GalleryPoint g;
    g.name = "one_missing";
    g.expected_order = 2.0;
    g.point = FactorPoint::zeros(r, d);
    g.point.S(0, 0, 0) = s;
    g.point.S(0, 1, 1) = s;
    g.point.A(0, 0) = std::sqrt(2.0) * s;
    for (int m = 2; m <= 3; ++m) {
        g.point.factor(m)(0, 0) = s;
        g.point.factor(m)(1, 1) = s;
    }
    const Vector e1 = basis(3, 0), e2 = basis(3, 1);
    g.T = Tensor3::outer(e1, e1, e1) + Tensor3::outer(e1, e2, e2) + Tensor3::outer(e2, e1, e2) -
          Tensor3::outer(e2, e2, e1);
    g.direction = FactorPoint::zeros(r, d);
    g.direction.S(1, 0, 1) = 1.0;
    g.direction.A(1, 1) = 1.0;
    return g;
}

GalleryPoint two_missing_point() {
    const std::size_t r = 2, d = 3;
    GalleryPoint g;
    g.name = "two_missing";
    g.expected_order = 3.0;
    g.point = FactorPoint::zeros(r, d);
    g.point.S(0, 0, 0) = 1.0;
    g.point.A(0, 0) = g.point.B(0, 0) = g.point.C(0, 0) = 1.0;
    const Vector e1 = basis(3, 0), e2 = basis(3, 1);
    g.T = Tensor3::outer(e1, e1, e1) + Tensor3::outer(e2, e2, e1);
    g.direction = FactorPoint::zeros(r, d);
    g.direction.S(1, 1, 0) = 1.0;
    g.direction.A(1, 1) = 1.0;
    g.direction.B(1, 1) = 1.0;
    return g;
}

GalleryPoint three_missing_point() {
    const std::size_t r = 2, d = 3;
    GalleryPoint g;
    g.name = "three_missing";
    g.expected_order = 4.0;
    g.point = FactorPoint::zeros(r, d);
    g.point.S(0, 0, 0) = 1.0;
    g.point.A(0, 0) = g.point.B(0, 0) = g.point.C(0, 0) = 1.0;
    const Vector e1 = basis(3, 0), e2 = basis(3, 1);
    g.T = Tensor3::outer(e1, e1, e1) + Tensor3::outer(e2, e2, e2);
    g.direction = FactorPoint::zeros(r, d);
    g.direction.S(1, 1, 1) = 1.0;
    g.direction.A(1, 1) = g.direction.B(1, 1) = g.direction.C(1, 1) = 1.0;
    return g;
}

GalleryPoint lambda_zero_point() {
    GalleryPoint g;
    g.name = "lambda_zero";
    g.point = FactorPoint::zeros(1, 2);
    g.point.A(0, 1) = g.point.B(0, 1) = g.point.C(0, 1) = 1.0;
    const Vector e1 = basis(2, 0);
    g.T = Tensor3::outer(e1, e1, e1);
    return g;
}

std::vector<double> default_slope_grid() {
    std::vector<double> eps;
    for (int k = 0; k <= 6; ++k) eps.push_back(std::pow(10.0, -1.0 - 0.25 * k));
    return eps;
}

double improvement_slope(const GalleryPoint& g, double lambda, const std::vector<double>& eps) {
    const double f0 = objective_f(g.point, g.T, lambda).f;
    std::vector<double> xs, ys;
    for (const auto& [e, f] : eval_along(g.point, g.direction, g.T, lambda, eps)) {
        const double gain = f0 - f;
        if (!(gain > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        xs.push_back(std::log(e));
        ys.push_back(std::log(gain));
    }
    return slope_fit(xs, ys);
}

std::vector<LemmaReport> saddle_gallery(Rng& rng) {
    std::vector<LemmaReport> out;

    {
        LemmaReport rep = start("gallery_origin", 1e-10);
        const std::size_t r = 2, d = 4;
        const double lambda = default_lambda(r);
        const double sigma = 1e-2;
        Tensor3 t = Tensor3::random_normal({d, d, d}, rng);
        t *= 1.0 / norm_f(t);
        const FactorPoint p = FactorPoint::zeros(r, d);
        const double gnorm = norm_f(grad_f(p, t, lambda));
        record(rep, 1e-10, gnorm);
        double worst_curv = 0.0;
        for (int i = 0; i < 10; ++i) {
            FactorPoint dir = FactorPoint::random_normal(r, d, 1.0, rng);
            dir *= 1.0 / norm_f(dir);
            const double q = std::abs(inner(hvp(p, dir, t, lambda), dir));
            worst_curv = std::max(worst_curv, q);
            record(rep, 1e-8, q);
        }
        const SubspaceSplit splits = split_point(p, t, sigma);
        const BlockIndex ijk{2, 2, 2};
        const std::vector<double> grid = delta_grid(delta_center(ijk, sigma));
        int improved = 0;
        double worst_R = 0.0;
        for (int a = 0; a < 100; ++a) {
            Rng sampler(rng.next_u64());
            const ImprovementDirection dir = build_sampled_direction(sample_missing_directions(splits, ijk, sampler), sigma);
            if (sign_flip_search(p, t, lambda, dir, grid).improvement > 0.0) ++improved;
            worst_R = std::max(worst_R, objective_f(axpy(p, grid.back(), dir.delta), t, lambda).R);
        }
        record(rep, improved / 100.0, 0.3);
        record(rep, 1e-24, worst_R);
        rep.extra = {{"grad_norm", gnorm}, {"max_abs_curvature", worst_curv}, {"improved_fraction", improved / 100.0},
                     {"max_R_along_direction", worst_R}};
        rep.finish();
        out.push_back(std::move(rep));
    }

    {
        LemmaReport rep = start("gallery_lambda_zero", 1e-12);
        const GalleryPoint g = lambda_zero_point();
        const GradientParts parts = gradient_parts(g.point, g.T);
        record(rep, 1e-10, norm_f(parts.grad_L));
        const double l0 = parts.L;
        double worst_drop = 0.0;
        for (int i = 0; i < 1000; ++i) {
            FactorPoint dir = FactorPoint::random_normal(1, 2, 1.0, rng);
            dir *= 1.0 / norm_f(dir);
            const double drop = l0 - loss_L(axpy(g.point, 1e-2, dir), g.T);
            worst_drop = std::max(worst_drop, drop);
            record(rep, 1e-12, drop);
        }
        const double lambda = 1.0 / 16.0;
        const ObjectiveReport obj = objective_f(g.point, g.T, lambda);
        const double gnorm = norm_f(grad_f(g.point, g.T, lambda));
        const double floor = 4.0 * lambda * obj.R / norm_f(g.point) - 1e-10;
        record(rep, gnorm, floor);
        record(rep, floor, 0.0);
        rep.extra = {{"L", l0}, {"worst_L_drop", worst_drop}, {"R", obj.R}, {"grad_f_norm", gnorm}, {"floor", floor}};
        rep.finish();
        out.push_back(std::move(rep));
    }

    for (const GalleryPoint& g : {one_missing_point(), two_missing_point(), three_missing_point()}) {
        LemmaReport rep = start("gallery_" + g.name, 0.5);
        const double grad = norm_f(grad_f(g.point, g.T, default_lambda(g.point.rank())));
        record(rep, 1e-12, grad);
        const double slope = improvement_slope(g, default_lambda(g.point.rank()), default_slope_grid());
        record(rep, 0.5, std::isnan(slope) ? kInf : std::abs(slope - g.expected_order));
        rep.extra = {{"slope", std::isnan(slope) ? json(nullptr) : json(slope)},
                     {"expected", g.expected_order},
                     {"grad_norm", grad}};
        rep.finish();
        out.push_back(std::move(rep));
    }
    return out;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"orthogonality",       "euler", "sublevel_bound",
                                                "core_lower_bound",    "submultiplicativity",
                                                "wedin",               "anti_concentration",
                                                "saddle_gallery"};
    return names;
}

SuiteReport run_suite(const std::vector<std::string>& selection, const SuiteOptions& options) {
    const auto& names = suite_names();
    std::vector<std::string> chosen;
    if (selection.empty() || std::find(selection.begin(), selection.end(), "all") != selection.end()) {
        chosen = names;
    } else {
        for (const std::string& s : selection) {
            if (std::find(names.begin(), names.end(), s) == names.end()) {
                throw std::invalid_argument("unknown verification check '" + s + "'");
            }
        }
        for (const std::string& n : names)
            if (std::find(selection.begin(), selection.end(), n) != selection.end()) chosen.push_back(n);
    }

    SuiteReport out;
    for (const std::string& name : chosen) {
        const auto idx = static_cast<std::uint64_t>(std::find(names.begin(), names.end(), name) - names.begin());
        Rng rng(options.seed ^ (0x9e3779b97f4a7c15ULL * (idx + 1)));
        if (name == "orthogonality") out.reports.push_back(check_orthogonality(100, rng, options.gradient_hook));
        else if (name == "euler") out.reports.push_back(check_euler(100, rng, options.gradient_hook));
        else if (name == "sublevel_bound") out.reports.push_back(check_sublevel_bound({1.0, 10.0, 100.0}, 300, rng));
        else if (name == "core_lower_bound") out.reports.push_back(check_core_lower_bound(100, rng));
        else if (name == "submultiplicativity") out.reports.push_back(check_submultiplicativity(100, rng));
        else if (name == "wedin") out.reports.push_back(check_wedin(100, rng));
        else if (name == "anti_concentration") out.reports.push_back(check_anti_concentration({3, 4, 5, 6}, 8, rng));
        else {
            for (LemmaReport& rep : saddle_gallery(rng)) out.reports.push_back(std::move(rep));
        }
    }
    out.pass = !out.reports.empty() &&
               std::all_of(out.reports.begin(), out.reports.end(), [](const LemmaReport& r) { return r.pass; });
    return out;
}

json to_json(const SuiteReport& rep) {
    json checks = json::array();
    for (const LemmaReport& r : rep.reports) checks.push_back(to_json(r));
    return {{"pass", rep.pass}, {"checks", checks}};
}

}  // namespace tucker::verify
