#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace telesim {

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Derivative-free simplex minimization.
inline NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, double step, int max_iter, double tol) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    std::vector<double> val(n + 1);
    for (std::size_t i = 0; i <= n; ++i) val[i] = f(pts[i]);

    NelderMeadResult res;
    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<std::size_t> order(n + 1);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
        std::size_t best = order[0], worst = order[n], second = order[n - 1];
        res.iterations = iter;
        if (std::abs(val[worst] - val[best]) <
            tol * (1.0 + std::abs(val[best]))) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / n;
        }
        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; ++k)
                p[k] = centroid[k] + t * (centroid[k] - pts[worst][k]);
            return p;
        };

        auto refl = blend(1.0);
        double fr = f(refl);
        if (fr < val[best]) {
            auto exp_ = blend(2.0);
            double fe = f(exp_);
            if (fe < fr) {
                pts[worst] = exp_;
                val[worst] = fe;
            } else {
                pts[worst] = refl;
                val[worst] = fr;
            }
        } else if (fr < val[second]) {
            pts[worst] = refl;
            val[worst] = fr;
        } else {
            auto con = blend(fr < val[worst] ? 0.5 : -0.5);
            double fc = f(con);
            if (fc < std::min(fr, val[worst])) {
                pts[worst] = con;
                val[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t k = 0; k < n; ++k)
                        pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
                    val[i] = f(pts[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (val[i] < val[best]) best = i;
    res.x = pts[best];
    res.value = val[best];
    return res;
}

}  // namespace telesim
