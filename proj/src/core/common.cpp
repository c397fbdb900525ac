#include "core/common.hpp"

namespace fdm {

const char* errc_name(Errc e) {
    switch (e) {
        case Errc::none: return "Ok";
        case Errc::usage: return "Usage";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::out_of_domain: return "OutOfDomain";
        case Errc::non_positive_scale: return "NonPositiveScale";
        case Errc::degenerate_polar: return "DegeneratePolar";
        case Errc::unbounded_below: return "UnboundedBelow";
        case Errc::search_box_too_small: return "SearchBoxTooSmall";
        case Errc::negative_base: return "NegativeBase";
        case Errc::diverged: return "Diverged";
        case Errc::log_of_zero: return "LogOfZero";
        case Errc::zero_q: return "ZeroQ";
        case Errc::conjugate_unbounded: return "ConjugateUnbounded";
        case Errc::non_convergent: return "NonConvergent";
        case Errc::empty_measure: return "EmptyMeasure";
        case Errc::support_degenerate: return "SupportDegenerate";
        case Errc::schema_error: return "SchemaError";
        case Errc::precondition_failed: return "PreconditionFailed";
        case Errc::io_error: return "IoError";
        case Errc::not_converged: return "NotConverged";
        case Errc::invalid_argument: return "InvalidArgument";
    }
    return "Unknown";
}

double pairwise_sum(std::span<const double> terms) {
    const size_t n = terms.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double t : terms) s += t;
        return s;
    }
    const size_t half = n / 2;
    return pairwise_sum(terms.subspan(0, half)) + pairwise_sum(terms.subspan(half));
}

ExtReal pow_ext(ExtReal base, double p) {
    if (p == 0.0) return ExtReal(1.0);
    if (!base.is_finite()) {
        if (p > 0) return ExtReal::infinity();
        return ExtReal(0.0);  // (+inf)^negative
    }
    const double b = base.value();
    if (b == 0.0) {
        if (p < 0) return ExtReal::infinity();
        return ExtReal(0.0);
    }
    if (b < 0.0) {
        if (p != std::floor(p))
            fail(Errc::negative_base, "negative base with fractional exponent");
        return ExtReal(std::pow(b, p));
    }
    return ExtReal(std::pow(b, p));
}

}  // namespace fdm
