#include "core/json_io.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace fdm {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

class JsonWriter {
public:
    JsonWriter& raw(const std::string& s) {
        out_ += s;
        return *this;
    }
    JsonWriter& key(const std::string& k) {
        sep();
        out_ += '"';
        out_ += k;
        out_ += "\":";
        fresh_ = true;
        return *this;
    }
    JsonWriter& num(double v) {
        sep();
        out_ += format_double(v);
        return *this;
    }
    JsonWriter& integer(long long v) {
        sep();
        out_ += std::to_string(v);
        return *this;
    }
    JsonWriter& str(const std::string& s) {
        sep();
        out_ += '"';
        out_ += s;
        out_ += '"';
        return *this;
    }
    JsonWriter& boolean(bool b) {
        sep();
        out_ += b ? "true" : "false";
        return *this;
    }
    JsonWriter& begin_obj() {
        sep();
        out_ += '{';
        fresh_ = true;
        return *this;
    }
    JsonWriter& end_obj() {
        out_ += '}';
        fresh_ = false;
        return *this;
    }
    JsonWriter& begin_arr() {
        sep();
        out_ += '[';
        fresh_ = true;
        return *this;
    }
    JsonWriter& end_arr() {
        out_ += ']';
        fresh_ = false;
        return *this;
    }
    JsonWriter& nums(const Vec& v) {
        begin_arr();
        for (double x : v) num(x);
        return end_arr();
    }
    const std::string& text() const { return out_; }

private:
    void sep() {
        if (!fresh_ && !out_.empty() && out_.back() != '{' && out_.back() != '[' &&
            out_.back() != ':')
            out_ += ',';
        fresh_ = false;
    }
    std::string out_;
    bool fresh_ = true;
};

json parse_or_schema_error(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(Errc::schema_error, std::string("invalid JSON: ") + e.what());
    }
}

double require_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(Errc::schema_error, where + ": expected a number");
    return j.get<double>();
}

Vec require_vector(const json& j, const std::string& where) {
    if (!j.is_array()) fail(Errc::schema_error, where + ": expected an array of numbers");
    Vec out;
    out.reserve(j.size());
    for (size_t i = 0; i < j.size(); ++i)
        out.push_back(require_number(j[i], where + "/" + std::to_string(i)));
    return out;
}

int require_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(Errc::schema_error, where + ": expected an integer");
    return j.get<int>();
}

std::string detect_kind(const json& j) {
    if (j.contains("kind")) {
        if (!j["kind"].is_string()) fail(Errc::schema_error, "/kind: expected a string");
        return j["kind"].get<std::string>();
    }
    if (j.contains("pieces")) return "maxaffine";
    if (j.contains("points")) return "pointhull";
    if (j.contains("values")) return "grid";
    if (j.contains("atoms")) return "measure";
    fail(Errc::schema_error, "/kind: missing and the field set is not recognizable");
}

}  // namespace

FunctionPtr parse_function_json(const std::string& text) {
    const json j = parse_or_schema_error(text);
    if (!j.is_object()) fail(Errc::schema_error, "/: expected an object");
    const std::string kind = detect_kind(j);
    if (!j.contains("dim")) fail(Errc::schema_error, "/dim: missing");
    const int dim = require_int(j["dim"], "/dim");

    if (kind == "maxaffine") {
        if (!j.contains("pieces") || !j["pieces"].is_array())
            fail(Errc::schema_error, "/pieces: expected an array");
        std::vector<MaxAffine::Piece> pieces;
        for (size_t i = 0; i < j["pieces"].size(); ++i) {
            const json& p = j["pieces"][i];
            const std::string where = "/pieces/" + std::to_string(i);
            if (!p.is_object() || !p.contains("a") || !p.contains("c"))
                fail(Errc::schema_error, where + ": expected {\"a\":[...],\"c\":num}");
            pieces.push_back({require_vector(p["a"], where + "/a"),
                              require_number(p["c"], where + "/c")});
            if (static_cast<int>(pieces.back().slope.size()) != dim)
                fail(Errc::schema_error, where + "/a: length != dim");
        }
        return std::make_shared<MaxAffine>(dim, std::move(pieces));
    }
    if (kind == "pointhull") {
        if (!j.contains("points") || !j["points"].is_array())
            fail(Errc::schema_error, "/points: expected an array");
        std::vector<PointHull::Support> pts;
        for (size_t i = 0; i < j["points"].size(); ++i) {
            const json& p = j["points"][i];
            const std::string where = "/points/" + std::to_string(i);
            if (!p.is_object() || !p.contains("x") || !p.contains("v"))
                fail(Errc::schema_error, where + ": expected {\"x\":[...],\"v\":num}");
            pts.push_back({require_vector(p["x"], where + "/x"),
                           require_number(p["v"], where + "/v")});
            if (static_cast<int>(pts.back().location.size()) != dim)
                fail(Errc::schema_error, where + "/x: length != dim");
        }
        return std::make_shared<PointHull>(dim, std::move(pts));
    }
    if (kind == "grid") {
        for (const char* field : {"lo", "hi", "shape", "values"})
            if (!j.contains(field))
                fail(Errc::schema_error, std::string("/") + field + ": missing");
        const Vec lo = require_vector(j["lo"], "/lo");
        const Vec hi = require_vector(j["hi"], "/hi");
        std::vector<int> shape;
        for (size_t i = 0; i < j["shape"].size(); ++i)
            shape.push_back(require_int(j["shape"][i], "/shape/" + std::to_string(i)));
        Vec values = require_vector(j["values"], "/values");
        size_t total = 1;
        for (int s : shape) total *= static_cast<size_t>(s);
        if (values.size() != total)
            fail(Errc::schema_error, "/values: length != product of /shape");
        if (j.contains("inf")) {
            for (size_t i = 0; i < j["inf"].size(); ++i) {
                const long long idx = j["inf"][i].get<long long>();
                if (idx < 0 || static_cast<size_t>(idx) >= values.size())
                    fail(Errc::schema_error, "/inf/" + std::to_string(i) + ": index out of range");
                values[static_cast<size_t>(idx)] = std::numeric_limits<double>::infinity();
            }
        }
        return std::make_shared<GridFunction>(dim, lo, hi, shape, std::move(values));
    }
    if (kind == "quadratic") {
        for (const char* field : {"a", "b", "c"})
            if (!j.contains(field))
                fail(Errc::schema_error, std::string("/") + field + ": missing");
        if (!j["a"].is_array() || static_cast<int>(j["a"].size()) != dim)
            fail(Errc::schema_error, "/a: expected dim rows");
        std::vector<Vec> a;
        for (size_t i = 0; i < j["a"].size(); ++i) {
            a.push_back(require_vector(j["a"][i], "/a/" + std::to_string(i)));
            if (static_cast<int>(a.back().size()) != dim)
                fail(Errc::schema_error, "/a/" + std::to_string(i) + ": length != dim");
        }
        return std::make_shared<Quadratic>(dim, std::move(a), require_vector(j["b"], "/b"),
                                           require_number(j["c"], "/c"));
    }
    fail(Errc::schema_error, "/kind: unknown kind '" + kind + "'");
}

std::string function_to_json(const ConvexFunction& f) {
    JsonWriter w;
    if (const auto* ma = dynamic_cast<const MaxAffine*>(&f)) {
        w.begin_obj().key("kind").str("maxaffine").key("dim").integer(ma->dim());
        w.key("pieces").begin_arr();
        for (const auto& p : ma->pieces()) {
            w.begin_obj().key("a").nums(p.slope).key("c").num(p.intercept).end_obj();
        }
        w.end_arr().end_obj();
        return w.text();
    }
    if (const auto* ph = dynamic_cast<const PointHull*>(&f)) {
        w.begin_obj().key("kind").str("pointhull").key("dim").integer(ph->dim());
        w.key("points").begin_arr();
        for (const auto& p : ph->points())
            w.begin_obj().key("x").nums(p.location).key("v").num(p.value).end_obj();
        w.end_arr().end_obj();
        return w.text();
    }
    if (const auto* g = dynamic_cast<const GridFunction*>(&f)) {
        w.begin_obj().key("kind").str("grid").key("dim").integer(g->dim());
        w.key("lo").nums(g->lo()).key("hi").nums(g->hi());
        w.key("shape").begin_arr();
        for (int s : g->shape()) w.integer(s);
        w.end_arr();
        w.key("values").begin_arr();
        std::vector<size_t> inf_idx;
        for (size_t i = 0; i < g->values().size(); ++i) {
            const double v = g->values()[i];
            if (std::isfinite(v)) {
                w.num(v);
            } else {
                w.num(0.0);
                inf_idx.push_back(i);
            }
        }
        w.end_arr();
        w.key("inf").begin_arr();
        for (size_t i : inf_idx) w.integer(static_cast<long long>(i));
        w.end_arr().end_obj();
        return w.text();
    }
    if (const auto* q = dynamic_cast<const Quadratic*>(&f)) {
        w.begin_obj().key("kind").str("quadratic").key("dim").integer(q->dim());
        w.key("a").begin_arr();
        for (const auto& row : q->a()) w.nums(row);
        w.end_arr();
        w.key("b").nums(q->b()).key("c").num(q->c()).end_obj();
        return w.text();
    }
    fail(Errc::invalid_argument, "this representation has no JSON form");
}

DiscreteMeasure parse_measure_json(const std::string& text) {
    const json j = parse_or_schema_error(text);
    if (!j.is_object() || !j.contains("dim") || !j.contains("atoms"))
        fail(Errc::schema_error, "/: expected {\"dim\":n,\"atoms\":[...]}");
    DiscreteMeasure m;
    m.dim = require_int(j["dim"], "/dim");
    for (size_t i = 0; i < j["atoms"].size(); ++i) {
        const json& a = j["atoms"][i];
        const std::string where = "/atoms/" + std::to_string(i);
        if (!a.is_object() || !a.contains("x") || !a.contains("w"))
            fail(Errc::schema_error, where + ": expected {\"x\":[...],\"w\":num}");
        m.atoms.push_back({require_vector(a["x"], where + "/x"),
                           require_number(a["w"], where + "/w")});
        if (static_cast<int>(m.atoms.back().location.size()) != m.dim)
            fail(Errc::schema_error, where + "/x: length != dim");
    }
    m.validate();
    return m;
}

std::string measure_to_json(const DiscreteMeasure& m) {
    JsonWriter w;
    w.begin_obj().key("dim").integer(m.dim).key("atoms").begin_arr();
    for (const auto& a : m.atoms)
        w.begin_obj().key("x").nums(a.location).key("w").num(a.weight).end_obj();
    w.end_arr().end_obj();
    return w.text();
}

std::string empirical_to_json(const EmpiricalMeasure& e) {
    JsonWriter w;
    w.begin_obj().key("dim").integer(e.dim).key("atoms").begin_arr();
    for (const auto& s : e.samples)
        w.begin_obj().key("x").nums(s.location).key("w").num(s.weight).end_obj();
    w.end_arr();
    w.key("seed").integer(static_cast<long long>(e.seed)).key("n").integer(e.count);
    w.end_obj();
    return w.text();
}

std::string scheme_to_json(const Scheme& s) {
    JsonWriter w;
    const char* kind = s.kind == Scheme::Kind::hermite
                           ? "hermite"
                           : s.kind == Scheme::Kind::monte_carlo ? "mc" : "qmc";
    w.begin_obj().key("kind").str(kind).key("n").integer(s.n).key("seed").integer(
        static_cast<long long>(s.seed));
    w.end_obj();
    return w.text();
}

std::string integral_result_to_json(const IntegralResult& r) {
    JsonWriter w;
    w.begin_obj().key("value").num(r.value).key("stderr").num(r.stderr_est);
    w.key("scheme").raw(scheme_to_json(r.scheme));
    w.end_obj();
    return w.text();
}

std::string solve_result_to_json(const SolveResult& r, const SolverOptions& opts,
                                 const VerifyReport* verification) {
    JsonWriter w;
    w.begin_obj();
    w.key("options").begin_obj();
    w.key("q").num(opts.q).key("max_iterations").integer(opts.max_iterations);
    w.key("tol").num(opts.tol).key("seed").integer(static_cast<long long>(opts.seed));
    w.key("scheme").raw(scheme_to_json(opts.scheme));
    w.key("init").str(opts.init == SolverOptions::Init::zeros ? "zeros" : "random");
    w.end_obj();
    w.key("v").nums(r.v);
    if (r.phi0_star) {
        w.key("phi0_star").raw(function_to_json(*r.phi0_star));
        PointHull phi0(r.phi0_star->dim(), r.phi0);
        w.key("phi0").raw(function_to_json(phi0));
    }
    w.key("tau").num(r.tau);
    w.key("residual_tv").num(r.residual_tv);
    w.key("iterations").integer(r.iterations);
    w.key("converged").boolean(r.converged);
    w.key("recovered").raw(measure_to_json(r.recovered));
    w.key("trace").begin_arr();
    for (const auto& t : r.trace)
        w.begin_obj().key("objective").num(t.objective).key("gradnorm").num(t.grad_norm).end_obj();
    w.end_arr();
    if (verification) {
        w.key("verification").begin_obj();
        w.key("tv_normalized").num(verification->tv_normalized);
        w.key("tau_identity_lhs").num(verification->tau_identity_lhs);
        w.key("tau_identity_rhs").num(verification->tau_identity_rhs);
        w.key("tau_identity_residual").num(verification->tau_identity_residual);
        w.key("inf_h").num(verification->inf_h);
        w.key("stderr").num(verification->stderr_est);
        w.end_obj();
    }
    w.end_obj();
    return w.text();
}

std::string measure_to_csv(const DiscreteMeasure& m) {
    std::ostringstream os;
    for (int k = 0; k < m.dim; ++k) os << "x" << k << ",";
    os << "w\n";
    for (const auto& a : m.atoms) {
        for (int k = 0; k < m.dim; ++k) os << format_double(a.location[k]) << ",";
        os << format_double(a.weight) << "\n";
    }
    return os.str();
}

std::string empirical_to_csv(const EmpiricalMeasure& e) {
    std::ostringstream os;
    for (int k = 0; k < e.dim; ++k) os << "x" << k << ",";
    os << "w\n";
    for (const auto& s : e.samples) {
        for (int k = 0; k < e.dim; ++k) os << format_double(s.location[k]) << ",";
        os << format_double(s.weight) << "\n";
    }
    return os.str();
}

std::string function_samples_csv(const ConvexFunction& f, const Vec& lo, const Vec& hi,
                                 int points_per_axis) {
    const int d = f.dim();
    if (d > 2) fail(Errc::invalid_argument, "sample CSV supports dim <= 2");
    std::ostringstream os;
    if (d == 1) {
        os << "x,f\n";
        for (int i = 0; i < points_per_axis; ++i) {
            const double x = lo[0] + (hi[0] - lo[0]) * i / (points_per_axis - 1);
            const Vec p{x};
            const ExtReal v = f.value(p);
            os << format_double(x) << ","
               << (v.is_finite() ? format_double(v.value()) : "inf") << "\n";
        }
    } else {
        os << "x0,x1,f\n";
        for (int i = 0; i < points_per_axis; ++i)
            for (int k = 0; k < points_per_axis; ++k) {
                const double x0 = lo[0] + (hi[0] - lo[0]) * i / (points_per_axis - 1);
                const double x1 = lo[1] + (hi[1] - lo[1]) * k / (points_per_axis - 1);
                const Vec p{x0, x1};
                const ExtReal v = f.value(p);
                os << format_double(x0) << "," << format_double(x1) << ","
                   << (v.is_finite() ? format_double(v.value()) : "inf") << "\n";
            }
    }
    return os.str();
}

std::string trace_to_csv(const SolveResult& r) {
    std::ostringstream os;
    os << "iteration,objective,gradnorm\n";
    for (size_t i = 0; i < r.trace.size(); ++i)
        os << i << "," << format_double(r.trace[i].objective) << ","
           << format_double(r.trace[i].grad_norm) << "\n";
    return os.str();
}

}  // namespace fdm
