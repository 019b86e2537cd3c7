#pragma once

#include <cmath>
#include <vector>

#include "rabistark/types.hpp"

namespace rabistark::detail {

// Embedded Dormand-Prince 5(4) with FSAL and step clamping to the requested
// sample times. `tol` is an error-per-unit-time budget: a step of size h is
// accepted when the embedded estimate stays below tol * h (uniformly scaled by
// 1 + max|y|). State is any Eigen dense type (Vector for wavefunctions, Matrix
// for density operators); Rhs fills dy/dt in place.
template <class State, class Rhs, class SampleFn>
void integrate_dp5(Rhs&& rhs, State y, double t0, double t1,
                   const std::vector<double>& samples, double tol, SampleFn&& on_sample) {
    if (tol < 1e-12 || tol > 1e-6) throw std::invalid_argument("integrate_dp5: tol out of [1e-12, 1e-6]");
    const double span = t1 - t0;
    if (span < 0) throw std::invalid_argument("integrate_dp5: t1 < t0");
    const double tiny = 1e-13 * std::max({1.0, std::abs(t0), std::abs(t1)});

    State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ytmp = y, ynew = y, err = y;

    double t = t0, t_comp = 0.0;  // Kahan-compensated time accumulation
    auto advance = [&](double h) {
        const double yk = h - t_comp;
        const double tk = t + yk;
        t_comp = (tk - t) - yk;
        t = tk;
    };

    std::size_t next = 0;
    while (next < samples.size() && samples[next] <= t0 + tiny) {
        on_sample(next, y);
        ++next;
    }
    if (next >= samples.size()) return;

    rhs(t, y, k1);
    double h_ctrl = span;
    {
        // Conservative first guess; the controller settles within a few steps.
        const double f0 = std::sqrt(k1.squaredNorm() / double(k1.size()));
        const double y0 = 1.0 + std::sqrt(y.squaredNorm() / double(y.size()));
        if (f0 > 0) h_ctrl = std::min(h_ctrl, 0.01 * y0 / f0);
    }

    while (next < samples.size()) {
        const double target = samples[next];
        if (target - t <= tiny) {
            on_sample(next, y);
            ++next;
            continue;
        }
        const bool clamped = h_ctrl > target - t;
        const double h = clamped ? target - t : h_ctrl;
        if (h <= 1e-15 * std::max(1.0, std::abs(t))) throw NumericError("integrate_dp5: step size underflow");

        ytmp = y + h * (1.0 / 5.0) * k1;
        rhs(t + h / 5.0, ytmp, k2);
        ytmp = y + h * ((3.0 / 40.0) * k1 + (9.0 / 40.0) * k2);
        rhs(t + 3.0 * h / 10.0, ytmp, k3);
        ytmp = y + h * ((44.0 / 45.0) * k1 + (-56.0 / 15.0) * k2 + (32.0 / 9.0) * k3);
        rhs(t + 4.0 * h / 5.0, ytmp, k4);
        ytmp = y + h * ((19372.0 / 6561.0) * k1 + (-25360.0 / 2187.0) * k2 + (64448.0 / 6561.0) * k3 +
                        (-212.0 / 729.0) * k4);
        rhs(t + 8.0 * h / 9.0, ytmp, k5);
        ytmp = y + h * ((9017.0 / 3168.0) * k1 + (-355.0 / 33.0) * k2 + (46732.0 / 5247.0) * k3 +
                        (49.0 / 176.0) * k4 + (-5103.0 / 18656.0) * k5);
        rhs(t + h, ytmp, k6);
        ynew = y + h * ((35.0 / 384.0) * k1 + (500.0 / 1113.0) * k3 + (125.0 / 192.0) * k4 +
                        (-2187.0 / 6784.0) * k5 + (11.0 / 84.0) * k6);
        rhs(t + h, ynew, k7);
        err = h * ((71.0 / 57600.0) * k1 + (-71.0 / 16695.0) * k3 + (71.0 / 1920.0) * k4 +
                   (-17253.0 / 339200.0) * k5 + (22.0 / 525.0) * k6 + (-1.0 / 40.0) * k7);

        const double scale = 1.0 + std::max(y.cwiseAbs().maxCoeff(), ynew.cwiseAbs().maxCoeff());
        const double err_norm = std::sqrt(err.squaredNorm() / double(err.size())) / scale;
        const double budget = tol * h;

        if (err_norm <= budget) {
            advance(h);
            y.swap(ynew);
            k1.swap(k7);  // FSAL: k7 = f(t + h, y_new)
            if (target - t <= tiny) {
                on_sample(next, y);
                ++next;
            }
            const double grow = (err_norm > 0) ? std::min(5.0, std::max(0.2, 0.9 * std::pow(budget / err_norm, 0.2))) : 5.0;
            // A step shortened to hit a sample must not collapse the controller.
            h_ctrl = clamped ? std::max(h_ctrl, h * grow) : h * grow;
        } else {
            h_ctrl = h * std::min(1.0, std::max(0.2, 0.9 * std::pow(budget / err_norm, 0.2)));
        }
    }
}

}  // namespace rabistark::detail
