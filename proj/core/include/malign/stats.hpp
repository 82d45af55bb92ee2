#pragma once

#include <span>
#include <vector>

namespace malign::stats {

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev(std::span<const double> xs);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> ranks(std::span<const double> xs);

struct Correlation {
    double rho = 0.0;
    /// One-sided p-value for H1: rho < 0 (Student t approximation, n - 2 dof).
    double p_negative = 1.0;
    /// One-sided p-value for H1: rho > 0.
    double p_positive = 1.0;
};

Correlation spearman(std::span<const double> x, std::span<const double> y);

struct PairedTest {
    double mean_diff = 0.0;   // mean of (a - b)
    double std_error = 0.0;
    double upper_95 = 0.0;    // one-sided 95% upper confidence bound on mean_diff
    double p_less = 1.0;      // one-sided p-value for H1: mean(a) < mean(b)
};

/// Paired one-sided t test of a against b.
PairedTest paired_less(std::span<const double> a, std::span<const double> b);

}  // namespace malign::stats
