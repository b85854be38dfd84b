#pragma once

#include <cmath>
#include <span>

namespace cilab {

/// Neumaier compensated accumulator. Keeps reductions accurate and
/// independent of the magnitude ordering of the inputs; every aggregate
/// in this project that feeds a tolerance check goes through one of
/// these so results are deterministic for a fixed iteration order.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
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

inline double compensated_sum(std::span<const double> xs) {
    CompensatedSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

} // namespace cilab
