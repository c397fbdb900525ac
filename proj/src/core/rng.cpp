#include "core/rng.hpp"

#include <algorithm>
#include <cmath>

#include "core/common.hpp"

namespace fdm {

double CounterRng::next_normal() { return inverse_normal_cdf(next_uniform()); }

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) fail(Errc::invalid_argument, "inverse_normal_cdf needs p in (0,1)");
    const double q = p - 0.5;
    double r, val;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        val = q *
              (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                    67265.770927008700853) * r + 45921.953931549871457) * r +
                  13731.693765509461125) * r + 1971.5909503065514427) * r +
                133.14166789178437745) * r + 3.387132872796366608) /
              (((((((5226.495278852545703 * r + 28729.085735721942674) * r +
                    39307.89580009271061) * r + 21213.794301586595867) * r +
                  5394.1960214247511077) * r + 687.1870074920579083) * r +
                42.313330701600911252) * r + 1.0);
        return val;
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                    0.24178072517745061177) * r + 1.27045825245236838258) * r +
                  3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                    0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                  0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                  0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                    1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                  0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

namespace {
constexpr int kHaltonBases[8] = {2, 3, 5, 7, 11, 13, 17, 19};
}

ScrambledHaltonNormal::ScrambledHaltonNormal(int dim, std::uint64_t seed, std::uint64_t index_offset)
    : dim_(dim), index_(index_offset) {
    if (dim < 1 || dim > 8) fail(Errc::invalid_argument, "Halton sequence supports dim 1..8");
    bases_.assign(kHaltonBases, kHaltonBases + dim);
    perms_.resize(dim);
    shifts_.resize(dim);
    for (int a = 0; a < dim; ++a) {
        const int b = bases_[a];
        perms_[a].resize(b);
        for (int d = 0; d < b; ++d) perms_[a][d] = d;
        // Fisher-Yates digit permutation plus a Cranley-Patterson rotation,
        // both keyed by (seed, axis). The rotation keeps the scrambled map
        // away from the exact endpoints 0 and 1.
        CounterRng rng(seed, 0x48616c746full + static_cast<std::uint64_t>(a));
        for (int d = b - 1; d > 0; --d) {
            const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(d + 1));
            std::swap(perms_[a][d], perms_[a][j]);
        }
        shifts_[a] = rng.next_uniform();
    }
}

double ScrambledHaltonNormal::radical_inverse(int axis, std::uint64_t n) const {
    const int b = bases_[axis];
    const auto& perm = perms_[axis];
    double inv_b = 1.0 / b;
    double f = 0.0, scale = inv_b;
    int depth = 0;
    while (n > 0) {
        const int digit = static_cast<int>(n % static_cast<std::uint64_t>(b));
        const int scrambled = perm[(digit + depth) % b];
        f += scrambled * scale;
        scale *= inv_b;
        n /= static_cast<std::uint64_t>(b);
        ++depth;
    }
    return f;
}

void ScrambledHaltonNormal::next(std::vector<double>& z) {
    z.resize(dim_);
    ++index_;  // skip index 0 (all-zero point)
    for (int a = 0; a < dim_; ++a) {
        double u = radical_inverse(a, index_) + shifts_[a];
        if (u >= 1.0) u -= 1.0;
        u = std::min(std::max(u, 0x1.0p-53), 1.0 - 0x1.0p-53);
        z[a] = inverse_normal_cdf(u);
    }
}

}  // namespace fdm
