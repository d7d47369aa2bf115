#pragma once

// Explicit Runge-Kutta integrators for autonomous systems y' = f(y):
// classical fixed-step RK4 and the Dormand-Prince 5(4) embedded pair with
// step rejection. Both land exactly on caller-supplied stop times and treat
// an invalid state (predicate false, or the right-hand side throwing
// DegenerateTriangle / InputError) as a reason to halve the step.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "crflab/common.hpp"

namespace crflab {

using State = std::vector<double>;

enum class Stepper { rk45, rk4 };

inline const char* to_string(Stepper s) { return s == Stepper::rk45 ? "rk45" : "rk4"; }

inline Stepper stepper_from_string(const std::string& s) {
    if (s == "rk45" || s == "dopri5") return Stepper::rk45;
    if (s == "rk4") return Stepper::rk4;
    throw InputError("unknown stepper '" + s + "'");
}

struct IntegratorConfig {
    Stepper kind = Stepper::rk45;
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double max_step = 0.1;
    double initial_step = 1e-3;
    double fixed_step = 0.05;  // RK4 only
    double min_step = 1e-12;
};

struct IntegrationStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
    std::size_t invalid_states = 0;
};

enum class IntegrationEnd { reached_end, stopped_by_observer, step_underflow };

struct IntegrationResult {
    IntegrationEnd end = IntegrationEnd::reached_end;
    double t = 0.0;
    IntegrationStats stats;
    std::string message;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - b_hat
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline void axpy_sum(State& out, const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
    const std::size_t n = y.size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (const auto& [c, k] : terms) s += c * (*k)[i];
        out[i] = y[i] + h * s;
    }
}

// Next stop strictly after t (or t_end).
inline double next_stop(std::span<const double> stops, double t, double t_end) {
    auto it = std::upper_bound(stops.begin(), stops.end(), t);
    return it == stops.end() ? t_end : std::min(*it, t_end);
}

} // namespace detail

/// Multiples of `interval` strictly below t_max, then t_max.
inline std::vector<double> sample_times(double t_max, double interval) {
    std::vector<double> times;
    for (std::size_t k = 1;; ++k) {
        const double t = static_cast<double>(k) * interval;
        if (t >= t_max * (1 - 1e-12)) break;
        times.push_back(t);
    }
    times.push_back(t_max);
    return times;
}

/// Integrates from (t0, y) to t_end. `rhs(y, dydt)` evaluates the field and
/// may throw DegenerateTriangle / InputError for states outside the domain;
/// `valid(y)` is a domain predicate. After every accepted step
/// `observer(t, y, dydt, h)` is called with the derivative at the new point;
/// returning false stops the run. `stops` are times the integrator must hit
/// exactly (sorted). y is updated in place.
template <class Rhs, class Valid, class Observer>
IntegrationResult integrate(const IntegratorConfig& cfg, Rhs&& rhs, Valid&& valid, Observer&& observer, State& y,
                            double t0, double t_end, std::span<const double> stops = {}) {
    using detail::DormandPrince;
    IntegrationResult res;
    res.t = t0;
    const std::size_t n = y.size();
    State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);

    auto eval = [&](const State& x, State& out) -> bool {
        ++res.stats.rhs_evaluations;
        if (!valid(x)) return false;
        try {
            rhs(x, out);
        } catch (const DegenerateTriangle&) {
            return false;
        } catch (const InputError&) {
            return false;
        }
        for (double v : out)
            if (!std::isfinite(v)) return false;
        return true;
    };

    if (!eval(y, k1)) throw NumericalFailure("initial state outside the domain of the vector field");
    double t = t0;
    double h = cfg.kind == Stepper::rk4 ? cfg.fixed_step : std::min(cfg.initial_step, cfg.max_step);
    if (!(h > 0.0)) throw InputError("step size must be positive");

    while (t < t_end) {
        const double stop = detail::next_stop(stops, t, t_end);
        double h_try = std::min(h, stop - t);
        // Snap to the stop when within rounding of it.
        if (stop - t - h_try <= 1e-12 * std::max(1.0, std::abs(stop))) h_try = stop - t;
        bool landed = false;

        if (cfg.kind == Stepper::rk4) {
            // k1 holds the derivative at y from the previous step.
            detail::axpy_sum(tmp, y, 0.5 * h_try, {{1.0, &k1}});
            bool ok = eval(tmp, k2);
            if (ok) {
                detail::axpy_sum(tmp, y, 0.5 * h_try, {{1.0, &k2}});
                ok = eval(tmp, k3);
            }
            if (ok) {
                detail::axpy_sum(tmp, y, h_try, {{1.0, &k3}});
                ok = eval(tmp, k4);
            }
            if (ok) {
                detail::axpy_sum(ynew, y, h_try / 6.0, {{1.0, &k1}, {2.0, &k2}, {2.0, &k3}, {1.0, &k4}});
                ok = eval(ynew, k7);
            }
            if (!ok) {
                ++res.stats.rejected;
                ++res.stats.invalid_states;
                h = 0.5 * h_try;
                if (h < cfg.min_step) {
                    res.end = IntegrationEnd::step_underflow;
                    res.message = "RK4 step underflow at t=" + std::to_string(t);
                    res.t = t;
                    return res;
                }
                continue;
            }
            // Restore the nominal step after a sub-stepped excursion.
            h = cfg.fixed_step;
            landed = true;
        } else {
            using D = DormandPrince;
            const double hh = h_try;
            bool ok = true;
            detail::axpy_sum(tmp, y, hh, {{D::a21, &k1}});
            ok = eval(tmp, k2);
            if (ok) {
                detail::axpy_sum(tmp, y, hh, {{D::a31, &k1}, {D::a32, &k2}});
                ok = eval(tmp, k3);
            }
            if (ok) {
                detail::axpy_sum(tmp, y, hh, {{D::a41, &k1}, {D::a42, &k2}, {D::a43, &k3}});
                ok = eval(tmp, k4);
            }
            if (ok) {
                detail::axpy_sum(tmp, y, hh, {{D::a51, &k1}, {D::a52, &k2}, {D::a53, &k3}, {D::a54, &k4}});
                ok = eval(tmp, k5);
            }
            if (ok) {
                detail::axpy_sum(tmp, y, hh,
                                 {{D::a61, &k1}, {D::a62, &k2}, {D::a63, &k3}, {D::a64, &k4}, {D::a65, &k5}});
                ok = eval(tmp, k6);
            }
            if (ok) {
                detail::axpy_sum(ynew, y, hh, {{D::b1, &k1}, {D::b3, &k3}, {D::b4, &k4}, {D::b5, &k5}, {D::b6, &k6}});
                ok = eval(ynew, k7);
            }
            double err = 0.0;
            if (ok) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double e = hh * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] + D::e5 * k5[i] +
                                           D::e6 * k6[i] + D::e7 * k7[i]);
                    const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                    err = std::max(err, std::abs(e) / sc);
                }
            } else {
                ++res.stats.invalid_states;
            }
            if (!ok || err > 1.0) {
                ++res.stats.rejected;
                h = ok ? hh * std::max(0.1, 0.9 * std::pow(err, -0.2)) : 0.5 * hh;
                if (h < cfg.min_step) {
                    res.end = IntegrationEnd::step_underflow;
                    res.message = "RK45 step underflow at t=" + std::to_string(t);
                    res.t = t;
                    return res;
                }
                continue;
            }
            const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
            double proposal = hh * grow;
            // A step shortened only to hit a stop does not shrink the next one.
            if (hh < h) proposal = std::max(proposal, h);
            h = std::min(cfg.max_step, proposal);
            landed = true;
        }

        if (landed) {
            ++res.stats.accepted;
            const double h_used = h_try;
            t = (h_try == stop - t) ? stop : t + h_try;
            y.swap(ynew);
            k1.swap(k7);
            res.t = t;
            if (!observer(t, static_cast<const State&>(y), static_cast<const State&>(k1), h_used)) {
                res.end = IntegrationEnd::stopped_by_observer;
                return res;
            }
        }
    }
    res.end = IntegrationEnd::reached_end;
    return res;
}

} // namespace crflab
