#include "malign/stats.hpp"

#include "malign/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace malign::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<double> ranks(std::span<const double> xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> r(xs.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t m = i; m <= j; ++m) r[order[m]] = avg;
        i = j + 1;
    }
    return r;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) {
        throw StructuralError("spearman: need two equally sized samples of at least 3 values");
    }
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double mx = mean(rx);
    const double my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    Correlation c;
    if (sxx == 0.0 || syy == 0.0) return c;
    c.rho = sxy / std::sqrt(sxx * syy);
    const double dof = static_cast<double>(x.size() - 2);
    if (std::abs(c.rho) >= 1.0) {
        c.p_negative = c.rho < 0.0 ? 0.0 : 1.0;
        c.p_positive = c.rho > 0.0 ? 0.0 : 1.0;
        return c;
    }
    const double t = c.rho * std::sqrt(dof / (1.0 - c.rho * c.rho));
    boost::math::students_t dist(dof);
    c.p_negative = boost::math::cdf(dist, t);
    c.p_positive = boost::math::cdf(boost::math::complement(dist, t));
    return c;
}

PairedTest paired_less(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw StructuralError("paired_less: need two equally sized samples of at least 2 values");
    }
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    PairedTest r;
    r.mean_diff = mean(d);
    r.std_error = stddev(d) / std::sqrt(static_cast<double>(d.size()));
    const double dof = static_cast<double>(d.size() - 1);
    boost::math::students_t dist(dof);
    const double q = boost::math::quantile(dist, 0.95);
    r.upper_95 = r.mean_diff + q * r.std_error;
    if (r.std_error == 0.0) {
        r.p_less = r.mean_diff < 0.0 ? 0.0 : 1.0;
    } else {
        r.p_less = boost::math::cdf(dist, r.mean_diff / r.std_error);
    }
    return r;
}

}  // namespace malign::stats
