#include "gridcut/optim.hpp"

#include <algorithm>
#include <cmath>

#include "gridcut/error.hpp"
#include "gridcut/parallel.hpp"

namespace gridcut {

std::string to_string(Algorithm a) { return a == Algorithm::adam ? "adam" : "nadam"; }

std::string to_string(GradientMethod g) {
    return g == GradientMethod::adjoint ? "adjoint" : "central_difference";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "adam") {
        return Algorithm::adam;
    }
    if (s == "nadam") {
        return Algorithm::nadam;
    }
    throw InputError("unknown optimizer '" + s + "'");
}

GradientMethod gradient_from_string(const std::string& s) {
    if (s == "central_difference" || s == "fd") {
        return GradientMethod::central_difference;
    }
    if (s == "adjoint") {
        return GradientMethod::adjoint;
    }
    throw InputError("unknown gradient method '" + s + "'");
}

void OptimizerConfig::validate() const {
    if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0)) {
        throw InputError("Adam moments require 0 < beta1, beta2 < 1");
    }
    if (!(learning_rate >= 0.0) || !(epsilon > 0.0) || max_steps < 0 || !(fd_step > 0.0)) {
        throw InputError("invalid optimizer configuration");
    }
}

void Box::project(std::vector<double>& x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i < lower.size()) {
            x[i] = std::max(x[i], lower[i]);
        }
        if (i < upper.size()) {
            x[i] = std::min(x[i], upper[i]);
        }
    }
}

std::vector<double> finite_difference_gradient(const ValueFn& f, const std::vector<double>& x, double f_x,
                                               double rel_step, const Box& box, int threads) {
    std::vector<double> g(x.size());
    parallel_for(x.size(), threads, [&](std::size_t i) {
        const double h = rel_step * std::max(1.0, std::abs(x[i]));
        const double lo = i < box.lower.size() ? box.lower[i] : -INFINITY;
        const double hi = i < box.upper.size() ? box.upper[i] : INFINITY;
        std::vector<double> xp = x;
        std::vector<double> xm = x;
        if (x[i] + h <= hi && x[i] - h >= lo) {
            xp[i] += h;
            xm[i] -= h;
            g[i] = (f(xp) - f(xm)) / (2.0 * h);
        } else if (x[i] + h <= hi) {
            xp[i] += h;
            g[i] = (f(xp) - f_x) / h;
        } else {
            xm[i] -= h;
            g[i] = (f_x - f(xm)) / h;
        }
    });
    return g;
}

OptimizeResult minimize(const ValueGradFn& f, std::vector<double> x0, const Box& box, const OptimizerConfig& cfg) {
    cfg.validate();
    box.project(x0);
    const std::size_t dim = x0.size();
    std::vector<double> x = std::move(x0);
    std::vector<double> m(dim, 0.0);
    std::vector<double> v(dim, 0.0);

    OptimizeResult result;
    result.x_best = x;
    result.f_best = INFINITY;
    double b1_pow = 1.0;
    double b2_pow = 1.0;

    for (int step = 1; step <= cfg.max_steps; ++step) {
        Objective obj = f(x);
        if (!std::isfinite(obj.value)) {
            throw NumericalError("objective is not finite at step " + std::to_string(step));
        }
        for (double gi : obj.gradient) {
            if (!std::isfinite(gi)) {
                throw NumericalError("gradient is not finite at step " + std::to_string(step));
            }
        }
        result.trace.push_back(obj.value);
        result.steps = step;
        if (obj.value < result.f_best) {
            result.f_best = obj.value;
            result.x_best = x;
        }
        if (cfg.convergence_tol > 0.0 && static_cast<int>(result.trace.size()) > cfg.patience) {
            auto window_begin = result.trace.end() - cfg.patience;
            double earlier_best = *std::min_element(result.trace.begin(), window_begin);
            if (earlier_best - result.f_best < cfg.convergence_tol) {
                result.converged = true;
                break;
            }
        }
        if (step == cfg.max_steps) {
            break;
        }

        b1_pow *= cfg.beta1;
        b2_pow *= cfg.beta2;
        for (std::size_t i = 0; i < dim; ++i) {
            const double g = obj.gradient[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            double m_hat = 0.0;
            if (cfg.algorithm == Algorithm::nadam) {
                // Nesterov look-ahead on the first moment.
                m_hat = cfg.beta1 * m[i] / (1.0 - b1_pow * cfg.beta1) + (1.0 - cfg.beta1) * g / (1.0 - b1_pow);
            } else {
                m_hat = m[i] / (1.0 - b1_pow);
            }
            const double v_hat = v[i] / (1.0 - b2_pow);
            x[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
        box.project(x);
    }
    return result;
}

OptimizeResult minimize_fd(const ValueFn& f, std::vector<double> x0, const Box& box, const OptimizerConfig& cfg,
                           int threads) {
    auto wrapped = [&](const std::vector<double>& x) {
        Objective obj;
        obj.value = f(x);
        if (std::isfinite(obj.value)) {
            obj.gradient = finite_difference_gradient(f, x, obj.value, cfg.fd_step, box, threads);
        }
        return obj;
    };
    return minimize(wrapped, std::move(x0), box, cfg);
}

}  // namespace gridcut
