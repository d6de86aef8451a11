#include "ocprom/optimize.hpp"

#include <cmath>
#include <deque>

namespace ocprom {

void OptimizerConfig::validate() const
{
    if (!(gradient_tolerance > 0.0))
        throw std::invalid_argument("OptimizerConfig: tolerance must be > 0");
    if (lbfgs_memory < 1)
        throw std::invalid_argument("OptimizerConfig: lbfgs memory must be >= 1");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0 && adam_beta2 > 0.0 && adam_beta2 < 1.0))
        throw std::invalid_argument("OptimizerConfig: Adam betas must lie in (0,1)");
    if (max_iterations < 0)
        throw std::invalid_argument("OptimizerConfig: max_iterations must be >= 0");
}

namespace {

constexpr double kArmijoC1 = 1e-4;

struct LineSearchResult {
    double step;
    double fnew;
};

// Backtracking Armijo search with one quadratic-interpolation refinement.
// On exactly quadratic objectives the interpolated step is the exact line
// minimizer, which makes L-BFGS behave like CG there.
LineSearchResult armijo_search(const Objective& f, const Vector& x, double fx,
                               const Vector& grad, const Vector& dir,
                               Vector& scratch_grad, int iter)
{
    const double gd = grad.dot(dir);
    if (!(gd < 0.0)) {
        throw OptimizeError("minimize: search direction is not a descent direction at iteration " +
                            std::to_string(iter), x);
    }

    double t = 1.0;
    double ft = f(x + t * dir, scratch_grad);
    int backtracks = 0;
    while (!(std::isfinite(ft) && ft <= fx + kArmijoC1 * t * gd)) {
        if (++backtracks > 60) {
            throw OptimizeError("minimize: line search failed at iteration " +
                                std::to_string(iter), x);
        }
        // Minimizer of the quadratic through f(x), f'(x)·d and f(x + t d),
        // clamped away from the interval ends for guaranteed progress.
        double tq = t / 2.0;
        if (std::isfinite(ft)) {
            const double denom = ft - fx - t * gd;
            if (denom > 0.0) tq = -gd * t * t / (2.0 * denom);
        }
        t = std::min(std::max(tq, 0.1 * t), 0.5 * t);
        ft = f(x + t * dir, scratch_grad);
    }

    // One refinement through the accepted point. On quadratic objectives this
    // lands on the exact line minimizer, which makes L-BFGS behave like CG.
    const double denom = ft - fx - t * gd;
    if (denom > 0.0) {
        const double tq = -gd * t * t / (2.0 * denom);
        if (tq > 1e-12 * t && tq < 1e6 &&
            std::abs(tq - t) > 1e-12 * t) {
            const double fq = f(x + tq * dir, scratch_grad);
            if (std::isfinite(fq) && fq < ft && fq <= fx + kArmijoC1 * tq * gd) {
                t = tq;
                ft = fq;
            }
        }
    }
    return {t, ft};
}

MinimizeResult minimize_lbfgs(const Objective& f, const Vector& x0, const OptimizerConfig& cfg)
{
    MinimizeResult res;
    res.x = x0;
    Vector grad(x0.size());
    double fx = f(res.x, grad);
    if (!std::isfinite(fx) || !grad.allFinite())
        throw OptimizeError("minimize: non-finite objective at iteration 0", res.x);
    res.history.push_back(fx);

    std::deque<Vector> s_hist, y_hist;
    std::deque<double> rho_hist;
    Vector scratch(x0.size());

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (grad.norm() <= cfg.gradient_tolerance) {
            res.converged = true;
            break;
        }

        // Two-loop recursion.
        Vector q = grad;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const Vector& s = s_hist.back();
            const Vector& y = y_hist.back();
            q *= s.dot(y) / y.squaredNorm();
        } else {
            // First step: scale so the initial trial is modest.
            const double gnorm = grad.norm();
            if (gnorm > 1.0) q /= gnorm;
        }
        for (size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Vector dir = -q;

        LineSearchResult ls = armijo_search(f, res.x, fx, grad, dir, scratch, iter);

        Vector x_new = res.x + ls.step * dir;
        Vector grad_new(x0.size());
        const double f_new = f(x_new, grad_new);
        if (!std::isfinite(f_new) || !grad_new.allFinite())
            throw OptimizeError("minimize: non-finite objective at iteration " +
                                std::to_string(iter + 1), res.x);

        Vector s = x_new - res.x;
        Vector y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > cfg.lbfgs_memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        res.x = std::move(x_new);
        grad = std::move(grad_new);
        fx = f_new;
        res.history.push_back(fx);
        res.iterations = iter + 1;
    }
    if (!res.converged && grad.norm() <= cfg.gradient_tolerance) res.converged = true;
    return res;
}

MinimizeResult minimize_adam(const Objective& f, const Vector& x0, const OptimizerConfig& cfg)
{
    MinimizeResult res;
    res.x = x0;
    Vector grad(x0.size());
    Vector m = Vector::Zero(x0.size());
    Vector v = Vector::Zero(x0.size());
    double fx = f(res.x, grad);
    if (!std::isfinite(fx) || !grad.allFinite())
        throw OptimizeError("minimize: non-finite objective at iteration 0", res.x);
    res.history.push_back(fx);

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (grad.norm() <= cfg.gradient_tolerance) {
            res.converged = true;
            break;
        }
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
        v = cfg.adam_beta2 * v.array().matrix() +
            (1.0 - cfg.adam_beta2) * grad.array().square().matrix();
        const double bc1 = 1.0 - std::pow(cfg.adam_beta1, iter + 1);
        const double bc2 = 1.0 - std::pow(cfg.adam_beta2, iter + 1);
        res.x -= (cfg.step_size * (m / bc1).array() /
                  ((v / bc2).array().sqrt() + cfg.adam_epsilon))
                     .matrix();
        fx = f(res.x, grad);
        if (!std::isfinite(fx) || !grad.allFinite())
            throw OptimizeError("minimize: non-finite objective at iteration " +
                                std::to_string(iter + 1), res.x);
        res.history.push_back(fx);
        res.iterations = iter + 1;
    }
    if (!res.converged && grad.norm() <= cfg.gradient_tolerance) res.converged = true;
    return res;
}

}  // namespace

MinimizeResult minimize(const Objective& f, const Vector& x0, const OptimizerConfig& cfg)
{
    cfg.validate();
    return cfg.kind == OptimizerKind::Lbfgs ? minimize_lbfgs(f, x0, cfg)
                                            : minimize_adam(f, x0, cfg);
}

Vector finite_diff_gradient(const ScalarObjective& f, const Vector& x, double h)
{
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be > 0");
    Vector g(x.size());
    Vector xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        const double fp = f(xp);
        xp[i] = x[i] - h;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace ocprom
