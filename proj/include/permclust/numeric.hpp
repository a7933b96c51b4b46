#pragma once

#include <cmath>
#include <cstdint>

namespace permclust {

/// Neumaier-compensated accumulator. Used wherever many small terms are
/// summed and the documented tolerances assume better than plain double
/// accumulation.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// 1 - q^b without cancellation for q close to 1. Requires q in (0,1), b >= 0.
inline double one_minus_qpow(double q, double b) {
    return -std::expm1(b * std::log(q));
}

/// log(1 - e^t) for t < 0, stable over the whole range.
inline double log1mexp(double t) {
    // switch point at log(2) keeps both branches well conditioned
    if (t > -0.6931471805599453) return std::log(-std::expm1(t));
    return std::log1p(-std::exp(t));
}

}  // namespace permclust
