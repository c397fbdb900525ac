#ifndef FDM_CORE_COMMON_HPP
#define FDM_CORE_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdm {

using Vec = std::vector<double>;

// Error taxonomy shared by the core, the C API and the CLI exit codes.
enum class Errc {
    none = 0,
    usage,
    dimension_mismatch,
    out_of_domain,
    non_positive_scale,
    degenerate_polar,
    unbounded_below,
    search_box_too_small,
    negative_base,
    diverged,
    log_of_zero,
    zero_q,
    conjugate_unbounded,
    non_convergent,
    empty_measure,
    support_degenerate,
    schema_error,
    precondition_failed,
    io_error,
    not_converged,
    invalid_argument,
};

const char* errc_name(Errc e);

class FdmError : public std::runtime_error {
public:
    FdmError(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw FdmError(code, what); }

// Extended real in R ∪ {+inf}. +inf absorbs addition; NaN is rejected at
// construction so the ordering is total.
class ExtReal {
public:
    ExtReal() : v_(0.0) {}
    ExtReal(double v) : v_(v) {
        if (std::isnan(v)) fail(Errc::invalid_argument, "ExtReal cannot hold NaN");
    }
    static ExtReal infinity() { return ExtReal(std::numeric_limits<double>::infinity()); }

    bool is_finite() const { return std::isfinite(v_); }
    double value() const { return v_; }
    // Finite value or throws; callers that expect finiteness use this.
    double finite() const {
        if (!is_finite()) fail(Errc::out_of_domain, "expected a finite value, got +inf");
        return v_;
    }

    friend ExtReal operator+(ExtReal a, ExtReal b) { return ExtReal(a.v_ + b.v_); }
    friend ExtReal operator-(ExtReal a, double b) { return ExtReal(a.v_ - b); }
    friend ExtReal operator*(double s, ExtReal a) {
        if (!a.is_finite()) return infinity();
        return ExtReal(s * a.v_);
    }
    friend bool operator<(ExtReal a, ExtReal b) { return a.v_ < b.v_; }
    friend bool operator<=(ExtReal a, ExtReal b) { return a.v_ <= b.v_; }
    friend bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }

private:
    double v_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

// Fixed-shape pairwise reduction keyed by index, so parallel evaluation of the
// terms cannot change the rounding of the sum.
double pairwise_sum(std::span<const double> terms);

// x^p with the extended-real conventions used throughout: negative base with a
// fractional exponent raises NegativeBase, 0^negative is +inf, x^0 is 1.
ExtReal pow_ext(ExtReal base, double p);

}  // namespace fdm

#endif
