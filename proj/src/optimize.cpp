#include "qphoton/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qphoton::opt {

Result nelder_mead_max(const Objective& f, std::vector<double> x0, double step, double f_tol, double x_tol,
                       int max_evals) {
    const std::size_t n = x0.size();
    if (n == 0) throw std::invalid_argument("nelder_mead_max: empty start point");
    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;

    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return f(x);
    };
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    bool converged = false;
    while (evals < max_evals) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
        if (values[best] - values[worst] <= f_tol && diameter <= x_tol) {
            converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
        }
        auto along = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t k = 0; k < n; ++k) x[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
            return x;
        };

        auto xr = along(-1.0);
        const double fr = eval(xr);
        if (fr > values[best]) {
            auto xe = along(-2.0);
            const double fe = eval(xe);
            if (fe > fr) {
                simplex[worst] = std::move(xe);
                values[worst] = fe;
            } else {
                simplex[worst] = std::move(xr);
                values[worst] = fr;
            }
            continue;
        }
        if (fr > values[second]) {
            simplex[worst] = std::move(xr);
            values[worst] = fr;
            continue;
        }
        const bool outside = fr > values[worst];
        auto xc = along(outside ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc > (outside ? fr : values[worst])) {
            simplex[worst] = std::move(xc);
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
            values[i] = eval(simplex[i]);
        }
    }
    const auto it = std::max_element(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(it - values.begin());
    return Result{simplex[idx], values[idx], evals, converged};
}

std::vector<Result> grid_search_max(const Objective& f, const std::vector<double>& start,
                                    const std::vector<double>& step, const std::vector<int>& count,
                                    std::size_t keep) {
    const std::size_t n = start.size();
    if (step.size() != n || count.size() != n || n == 0) throw std::invalid_argument("grid_search_max: bad grid");
    std::vector<Result> best;
    std::vector<int> idx(n, 0);
    std::vector<double> x(n);
    int evals = 0;
    while (true) {
        for (std::size_t k = 0; k < n; ++k) x[k] = start[k] + step[k] * idx[k];
        const double v = f(x);
        ++evals;
        if (best.size() < keep || v > best.back().value) {
            Result r{x, v, 0, false};
            auto pos = std::upper_bound(best.begin(), best.end(), v,
                                        [](double val, const Result& e) { return val > e.value; });
            best.insert(pos, std::move(r));
            if (best.size() > keep) best.pop_back();
        }
        std::size_t k = 0;
        while (k < n && ++idx[k] >= count[k]) idx[k++] = 0;
        if (k == n) break;
    }
    for (auto& r : best) r.evaluations = evals;
    return best;
}

Result grid_then_refine_max(const Objective& f, const std::vector<double>& start, const std::vector<double>& step,
                            const std::vector<int>& count, std::size_t starts, double refine_step) {
    const auto seeds = grid_search_max(f, start, step, count, starts);
    Result best;
    bool have = false;
    for (const auto& s : seeds) {
        Result r = nelder_mead_max(f, s.x, refine_step);
        // A restart from the refined point shakes off premature collapse.
        Result again = nelder_mead_max(f, r.x, refine_step * 0.1);
        if (again.value >= r.value) r = again;
        if (!have || r.value > best.value) {
            best = r;
            have = true;
        }
    }
    return best;
}

Bracket bisect_boundary(const std::function<bool(double)>& pred, double lo, double hi, double tol, int max_iter) {
    Bracket b{lo, hi, 0, false};
    while (b.iterations < max_iter) {
        if (b.hi - b.lo <= tol) {
            b.converged = true;
            break;
        }
        const double mid = 0.5 * (b.lo + b.hi);
        if (pred(mid)) b.hi = mid;
        else b.lo = mid;
        ++b.iterations;
    }
    if (b.hi - b.lo <= tol) b.converged = true;
    return b;
}

}  // namespace qphoton::opt
