#include "core/inequalities.hpp"

#include <cmath>
#include <sstream>

#include "core/dual_curvature.hpp"

namespace fdm {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// (integral h^{1-q})^{1/(1-q)}, the normalization used at index n+1-q.
IntegralResult normalized_shifted(const FunctionPtr& f, double q, const Scheme& scheme) {
    IntegralResult r = dual_quermassintegral(f, q - 1.0, scheme);
    const double value = std::pow(r.value, 1.0 / (1.0 - q));
    const double deriv = std::abs(value / ((1.0 - q) * r.value));
    return IntegralResult{value, deriv * r.stderr_est, scheme};
}

}  // namespace

GapReport brunn_minkowski_gap(const FunctionPtr& f, const FunctionPtr& g, double t, double q,
                              const Scheme& scheme) {
    if (q == 0.0) fail(Errc::zero_q, "Brunn-Minkowski gap needs q != 0");
    if (!(t > 0.0 && t < 1.0)) fail(Errc::invalid_argument, "t must be in (0,1)");
    const FunctionPtr combo =
        inf_convolution(right_scalar_mult(f, 1.0 - t), right_scalar_mult(g, t));
    GapReport rep;
    rep.name = "brunn_minkowski";
    if (q <= -1.0) {
        const IntegralResult mc = power_mean(combo, q, scheme);
        const IntegralResult mf = power_mean(f, q, scheme);
        const IntegralResult mg = power_mean(g, q, scheme);
        rep.lhs = mc.value;
        rep.rhs = (1.0 - t) * mf.value + t * mg.value;
        rep.gap = rep.rhs - rep.lhs;
        rep.stderr_est = std::sqrt(mc.stderr_est * mc.stderr_est +
                                   std::pow((1.0 - t) * mf.stderr_est, 2) +
                                   std::pow(t * mg.stderr_est, 2));
    } else {
        const IntegralResult wc = normalized_quermassintegral(combo, q, scheme);
        const IntegralResult wf = normalized_quermassintegral(f, q, scheme);
        const IntegralResult wg = normalized_quermassintegral(g, q, scheme);
        rep.lhs = wc.value;
        rep.rhs = (1.0 - t) * wf.value + t * wg.value;
        rep.gap = rep.lhs - rep.rhs;  // reversed orientation for q > -1
        rep.stderr_est = std::sqrt(wc.stderr_est * wc.stderr_est +
                                   std::pow((1.0 - t) * wf.stderr_est, 2) +
                                   std::pow(t * wg.stderr_est, 2));
    }
    rep.instance = "t=" + fmt(t) + ",q=" + fmt(q);
    rep.finish();
    return rep;
}

GapReport minkowski_gap(const FunctionPtr& f, const FunctionPtr& g, double q,
                        const Scheme& scheme) {
    if (q > 0.0) fail(Errc::invalid_argument, "Minkowski gap needs q <= 0");
    const IntegralResult wf = normalized_shifted(f, q, scheme);
    const IntegralResult wg = normalized_shifted(g, q, scheme);
    const IntegralResult mix_fg = mixed_integral(f, g, q, scheme);
    const IntegralResult mix_ff = mixed_integral(f, f, q, scheme);
    GapReport rep;
    rep.name = "minkowski";
    rep.instance = "q=" + fmt(q);
    const double wfq = std::pow(wf.value, q);
    rep.lhs = wfq * (mix_ff.value - mix_fg.value);
    rep.rhs = wg.value - wf.value;
    rep.gap = rep.rhs - rep.lhs;
    rep.stderr_est =
        std::sqrt(wg.stderr_est * wg.stderr_est + wf.stderr_est * wf.stderr_est +
                  wfq * wfq * (mix_ff.stderr_est * mix_ff.stderr_est +
                               mix_fg.stderr_est * mix_fg.stderr_est));
    rep.finish();
    return rep;
}

GapReport jensen_monotonicity_check(const FunctionPtr& f, double q1, double q2,
                                    const Scheme& scheme) {
    if (q1 == 0.0 || q2 == 0.0) fail(Errc::zero_q, "jensen check needs q1, q2 != 0");
    if (!(-q1 < -q2)) fail(Errc::invalid_argument, "need -q1 < -q2");
    const IntegralResult v1 = power_mean(f, q1, scheme);
    const IntegralResult v2 = power_mean(f, q2, scheme);
    GapReport rep;
    rep.name = "jensen";
    rep.instance = "q1=" + fmt(q1) + ",q2=" + fmt(q2);
    rep.lhs = v2.value;
    rep.rhs = v1.value;
    rep.gap = v2.value - v1.value;
    rep.stderr_est = std::sqrt(v1.stderr_est * v1.stderr_est + v2.stderr_est * v2.stderr_est);
    rep.tol = 1e-6;
    rep.finish();
    return rep;
}

GapReport prekopa_leindler_check(const FunctionPtr& f, const FunctionPtr& g, double t) {
    if (!(t > 0.0 && t < 1.0)) fail(Errc::invalid_argument, "t must be in (0,1)");
    const int d = f->dim();
    if (d > 2) fail(Errc::invalid_argument, "Prekopa-Leindler check supports dim <= 2");
    const FunctionPtr combo =
        inf_convolution(right_scalar_mult(f, 1.0 - t), right_scalar_mult(g, t));

    // Truncation radius: grow until the crude tail bound is small. The bound
    // uses the linear growth rate of each exponent function along the axes.
    double radius = 8.0;
    double tail = 0.0;
    const auto tail_bound = [&](const FunctionPtr& fn, double r) -> double {
        double min_boundary = std::numeric_limits<double>::infinity();
        double growth = std::numeric_limits<double>::infinity();
        Vec x(d, 0.0), x2(d, 0.0);
        const int probes = d == 1 ? 2 : 16;
        for (int p = 0; p < probes; ++p) {
            const double th = 2.0 * M_PI * p / probes;
            x[0] = d == 1 ? (p == 0 ? r : -r) : r * std::cos(th);
            if (d == 2) x[1] = r * std::sin(th);
            for (int k = 0; k < d; ++k) x2[k] = x[k] * (r + 1.0) / r;
            const double v1 = fn->value(x).finite();
            const double v2 = fn->value(x2).finite();
            min_boundary = std::min(min_boundary, v1);
            growth = std::min(growth, v2 - v1);
        }
        if (!(growth > 0.05)) return std::numeric_limits<double>::infinity();
        // mass of e^{-fn} outside the ball of radius r, crude ray bound
        const double surface = d == 1 ? 2.0 : 2.0 * M_PI * r;
        return surface * std::exp(-min_boundary) / growth * 2.0;
    };
    for (; radius <= 24.0; radius += 4.0) {
        tail = std::max({tail_bound(f, radius), tail_bound(g, radius), tail_bound(combo, radius)});
        if (tail < 1e-9) break;
    }
    if (!(tail < 1e-9))
        fail(Errc::invalid_argument,
             "TruncationTooSmall: tail estimate exceeds tolerance at radius 24");

    const auto lebesgue = [&](const FunctionPtr& fn) -> double {
        if (d == 1) {
            return integrate_interval(-radius, radius, 16, 0.25, [&](double y) {
                const Vec p{y};
                return std::exp(-fn->value(p).finite());
            });
        }
        return integrate_interval(-radius, radius, 12, 0.5, [&](double y0) {
            return integrate_interval(-radius, radius, 12, 0.5, [&](double y1) {
                const Vec p{y0, y1};
                return std::exp(-fn->value(p).finite());
            });
        });
    };
    const double ih = lebesgue(combo);
    const double iff = lebesgue(f);
    const double ig = lebesgue(g);
    GapReport rep;
    rep.name = "prekopa_leindler";
    rep.instance = "t=" + fmt(t) + ",R=" + fmt(radius) + ",tail<" + fmt(tail);
    rep.lhs = ih;
    rep.rhs = std::pow(iff, 1.0 - t) * std::pow(ig, t);
    rep.gap = rep.lhs - rep.rhs;
    rep.stderr_est = tail;
    rep.tol = 1e-6;
    rep.finish();
    return rep;
}

namespace {

FunctionPtr make_abs() {
    return std::make_shared<MaxAffine>(
        1, std::vector<MaxAffine::Piece>{{{-1.0}, 0.0}, {{1.0}, 0.0}});
}

FunctionPtr shift_up(const FunctionPtr& ma_like, double c) {
    const auto ma = std::dynamic_pointer_cast<const MaxAffine>(ma_like);
    std::vector<MaxAffine::Piece> pieces = ma->pieces();
    for (auto& p : pieces) p.intercept -= c;
    return std::make_shared<MaxAffine>(ma->dim(), std::move(pieces));
}

}  // namespace

std::vector<BatteryFunction> standard_battery() {
    std::vector<BatteryFunction> b;
    b.push_back({"quad_half", std::make_shared<Quadratic>(Quadratic::isotropic(1, 1.0)), false, 1});
    b.push_back({"quad", std::make_shared<Quadratic>(Quadratic::isotropic(1, 2.0)), false, 1});
    b.push_back({"quad_shifted",
                 std::make_shared<Quadratic>(Quadratic::isotropic(1, 1.0, {0.3})), false, 1});
    b.push_back({"quad_plus",
                 std::make_shared<Quadratic>(Quadratic::isotropic(1, 1.0, {}, 0.1)), true, 1});
    b.push_back({"abs", make_abs(), false, 1});
    b.push_back({"abs_plus", shift_up(make_abs(), 0.5), true, 1});
    b.push_back({"gauge_asym",
                 std::make_shared<MaxAffine>(
                     1, std::vector<MaxAffine::Piece>{{{-1.0}, 0.0}, {{2.0}, 0.0}}),
                 false, 1});
    b.push_back({"huber",
                 inf_convolution(make_abs(),
                                 std::make_shared<Quadratic>(Quadratic::isotropic(1, 1.0))),
                 false, 1});
    b.push_back({"quad2d", std::make_shared<Quadratic>(Quadratic::isotropic(2, 1.0)), false, 2});
    {
        std::vector<Vec> a{{1.0, 0.0}, {0.0, 2.0}};
        b.push_back({"quad2d_aniso", std::make_shared<Quadratic>(Quadratic(2, a, {0.0, 0.0}, 0.0)),
                     false, 2});
    }
    b.push_back({"cross2d",
                 std::make_shared<MaxAffine>(gauge_from_polar_vertices(
                     2, {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}})),
                 false, 2});
    return b;
}

std::vector<GapReport> run_battery_bm(const Scheme& scheme) {
    const auto battery = standard_battery();
    const auto find = [&](const std::string& n) -> FunctionPtr {
        for (const auto& b : battery)
            if (b.name == n) return b.fn;
        fail(Errc::invalid_argument, "unknown battery function " + n);
    };
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"quad_half", "quad"}, {"quad_half", "quad_half"}, {"abs", "quad_half"},
        {"abs", "gauge_asym"}, {"huber", "quad_half"},
    };
    const Vec qs = {-0.5, -0.75, -1.0, -1.25, -2.0};
    const Vec ts = {0.25, 0.5, 0.75};
    std::vector<GapReport> out;
    for (const auto& [fa, fb] : pairs)
        for (double q : qs)
            for (double t : ts) {
                GapReport rep = brunn_minkowski_gap(find(fa), find(fb), t, q, scheme);
                rep.instance = fa + "|" + fb + "," + rep.instance;
                out.push_back(rep);
            }
    // 2D quadratic pair, exact closed-form inf-convolution
    for (double q : Vec{-1.0, -2.0}) {
        GapReport rep = brunn_minkowski_gap(find("quad2d"), find("quad2d_aniso"), 0.5, q, scheme);
        rep.instance = "quad2d|quad2d_aniso," + rep.instance;
        out.push_back(rep);
    }
    return out;
}

std::vector<GapReport> run_battery_minkowski(const Scheme& scheme) {
    const auto battery = standard_battery();
    const auto find = [&](const std::string& n) -> FunctionPtr {
        for (const auto& b : battery)
            if (b.name == n) return b.fn;
        fail(Errc::invalid_argument, "unknown battery function " + n);
    };
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"quad_half", "quad"},      {"quad_half", "quad_shifted"}, {"quad_half", "quad_half"},
        {"abs", "quad_half"},       {"gauge_asym", "quad"},        {"huber", "quad"},
        {"quad2d", "quad2d_aniso"},
    };
    const Vec qs = {0.0, -0.5, -1.0, -2.0};
    std::vector<GapReport> out;
    for (const auto& [fa, fb] : pairs)
        for (double q : qs) {
            GapReport rep = minkowski_gap(find(fa), find(fb), q, scheme);
            rep.instance = fa + "|" + fb + "," + rep.instance;
            out.push_back(rep);
        }
    return out;
}

std::vector<GapReport> run_battery_jensen(const Scheme& scheme) {
    const auto battery = standard_battery();
    std::vector<GapReport> out;
    const std::vector<std::pair<double, double>> qpairs = {{-1.0, -2.0}, {-0.5, -1.0}, {-1.0, -3.0}};
    for (const auto& b : battery) {
        if (!b.positive) continue;
        for (const auto& [q1, q2] : qpairs) {
            GapReport rep = jensen_monotonicity_check(b.fn, q1, q2, scheme);
            rep.instance = b.name + "," + rep.instance;
            rep.tol = 1e-3;
            rep.finish();
            out.push_back(rep);
        }
    }
    // constant equality case
    {
        const FunctionPtr two = std::make_shared<MaxAffine>(
            1, std::vector<MaxAffine::Piece>{{{0.0}, -2.0}});
        GapReport rep = jensen_monotonicity_check(two, -1.0, -2.0, scheme);
        rep.instance = "const2," + rep.instance;
        out.push_back(rep);
    }
    return out;
}

std::vector<GapReport> run_battery_pl() {
    const auto battery = standard_battery();
    const auto find = [&](const std::string& n) -> FunctionPtr {
        for (const auto& b : battery)
            if (b.name == n) return b.fn;
        fail(Errc::invalid_argument, "unknown battery function " + n);
    };
    std::vector<GapReport> out;
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"quad_half", "quad_half"}, {"quad_half", "quad_shifted"}, {"abs", "quad_half"},
        {"huber", "quad"},
    };
    for (const auto& [fa, fb] : pairs)
        for (double t : Vec{0.25, 0.5, 0.75}) {
            GapReport rep = prekopa_leindler_check(find(fa), find(fb), t);
            rep.instance = fa + "|" + fb + "," + rep.instance;
            out.push_back(rep);
        }
    return out;
}

std::vector<GapReport> run_battery_valuation(const Scheme& scheme) {
    std::vector<GapReport> out;
    const auto to_report = [](const ValuationReport& vr, const std::string& inst) {
        GapReport rep;
        rep.name = "valuation";
        rep.instance = inst + (vr.exact_path ? ",exact" : ",dictionary");
        rep.lhs = vr.max_discrepancy;
        rep.rhs = 0.0;
        rep.gap = -vr.max_discrepancy;
        rep.stderr_est = vr.stderr_est;
        rep.tol = vr.exact_path ? 1e-9 : 1e-3;
        rep.pass = vr.pass;
        return rep;
    };
    // exact 1D pair
    const FunctionPtr f = std::make_shared<MaxAffine>(
        1, std::vector<MaxAffine::Piece>{{{-1.0}, 0.0}, {{2.0}, 0.0}});
    const FunctionPtr g = std::make_shared<MaxAffine>(
        1, std::vector<MaxAffine::Piece>{{{-2.0}, 0.0}, {{1.0}, 0.0}});
    out.push_back(to_report(valuation_check(f, g, 0.0, scheme), "max(-x,2x)|max(-2x,x)"));
    out.push_back(to_report(valuation_check(f, g, -1.0, scheme), "max(-x,2x)|max(-2x,x),q=-1"));

    // grid pairs with convex min
    const auto grid_of = [](const FunctionPtr& fn, double r, int n) {
        const int d = fn->dim();
        Vec lo(d, -r), hi(d, r);
        std::vector<int> shape(d, n);
        return std::make_shared<GridFunction>(GridFunction::sample(*fn, lo, hi, shape));
    };
    const auto quad_half = std::make_shared<Quadratic>(Quadratic::isotropic(1, 1.0));
    const auto quad = std::make_shared<Quadratic>(Quadratic::isotropic(1, 2.0));
    const auto quad_up = std::make_shared<Quadratic>(Quadratic::isotropic(1, 1.0, {}, 0.3));
    // tangent to quad at x = -1, sits below it everywhere (min is convex)
    const auto quad_tangent =
        std::make_shared<Quadratic>(Quadratic::isotropic(1, 1.0, {1.0}, -1.0));
    std::vector<Vec> a2{{1.0, 0.0}, {0.0, 2.0}};
    const auto quad2d = std::make_shared<Quadratic>(Quadratic::isotropic(2, 1.0));
    const auto quad2d_aniso = std::make_shared<Quadratic>(Quadratic(2, a2, {0.0, 0.0}, 0.0));
    const std::vector<std::pair<FunctionPtr, FunctionPtr>> grid_pairs = {
        {grid_of(quad_half, 16.0, 641), grid_of(quad, 16.0, 641)},
        {grid_of(quad_half, 16.0, 641), grid_of(quad_up, 16.0, 641)},
        {grid_of(quad, 16.0, 641), grid_of(quad_tangent, 16.0, 641)},
        {grid_of(quad_half, 16.0, 641), grid_of(quad_half, 16.0, 641)},
        {grid_of(quad2d, 16.0, 129), grid_of(quad2d_aniso, 16.0, 129)},
    };
    int idx = 0;
    for (const auto& [ga, gb] : grid_pairs) {
        out.push_back(to_report(valuation_check(ga, gb, 0.0, scheme),
                                "grid_pair_" + std::to_string(idx++)));
    }
    return out;
}

std::vector<GapReport> run_battery_bridge() {
    std::vector<GapReport> out;
    const auto to_report = [](const BridgeResult& br, const std::string& inst, double q) {
        GapReport rep;
        rep.name = "bridge";
        rep.instance = inst + ",q=" + fmt(q);
        rep.lhs = br.lhs;
        rep.rhs = br.rhs;
        rep.gap = -std::abs(br.lhs - br.rhs);
        rep.tol = 1e-3;
        rep.finish();
        return rep;
    };
    const MaxAffine disc = gauge_from_polar_vertices(2, regular_polygon_vertices(512));
    const MaxAffine twelve_gon = gauge_from_polar_vertices(2, regular_polygon_vertices(12));
    const MaxAffine segment = gauge_from_polar_vertices(1, {{1.0}, {-1.0}});
    for (double q : Vec{0.0, -1.0, -2.0}) out.push_back(to_report(body_bridge_check(disc, q), "disc512", q));
    for (double q : Vec{0.0, -1.0}) out.push_back(to_report(body_bridge_check(twelve_gon, q), "12gon", q));
    out.push_back(to_report(body_bridge_check(segment, 0.0), "segment", 0.0));
    return out;
}

std::string gap_reports_to_csv(const std::vector<GapReport>& reports) {
    std::ostringstream os;
    os << "name,instance,lhs,rhs,gap,stderr,pass\n";
    for (const auto& r : reports) {
        std::string inst = r.instance;
        for (auto& c : inst)
            if (c == ',') c = ';';
        os << r.name << "," << inst << "," << fmt(r.lhs) << "," << fmt(r.rhs) << "," << fmt(r.gap)
           << "," << fmt(r.stderr_est) << "," << (r.pass ? "1" : "0") << "\n";
    }
    return os.str();
}

}  // namespace fdm
