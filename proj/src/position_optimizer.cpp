// SPDX-License-Identifier: Apache-2.0
//
// nfsa - near-field multiuser communications toolkit for sparse antenna arrays
// Copyright (C) 2026 nfsa contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "nfsa/position_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "parallel_util.hpp"

namespace nfsa
{

namespace
{

constexpr double k_two_pi = 2.0 * 3.14159265358979323846;

void require(bool condition, const std::string& message)
{
    if (!condition)
    {
        throw std::invalid_argument(message);
    }
}

void check_grid(const DiffGrid& grid)
{
    require(!grid.b.empty() && !grid.theta.empty(), "diff grid: empty sample set");
    require(grid.weights.rows() == static_cast<Eigen::Index>(grid.b.size()) &&
                grid.weights.cols() == static_cast<Eigen::Index>(grid.theta.size()),
            "diff grid: weight shape mismatch");
    require(grid.b_max > 0.0, "diff grid: b_max must be positive");
}

// Shared accumulation across the (s, t) grid: for every grid point the
// element phases phi_n = 2 pi (b x_n^2 + theta x_n) / lambda, the field sum
// A = sum_n exp(j phi_n) and the phase slopes P_n = 2 b x_n + theta feed the
// objective, gradient and Hessian contributions.
struct GridTerms
{
    Eigen::VectorXd x2;
    double scale = 0.0; // 1 / (S T)
};

GridTerms make_terms(const std::vector<double>& x, const DiffGrid& grid)
{
    GridTerms terms;
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    terms.x2.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        terms.x2(i) = x[i] * x[i];
    }
    terms.scale = 1.0 / (static_cast<double>(grid.b.size()) * static_cast<double>(grid.theta.size()));
    return terms;
}

} // namespace

DiffGrid build_diff_grid(int s_samples, int t_samples, double b_max)
{
    require(s_samples >= 1 && t_samples >= 1, "diff grid: sample counts must be positive");
    require(b_max > 0.0, "diff grid: b_max must be positive");

    DiffGrid grid;
    grid.b_max = b_max;
    grid.b.resize(s_samples);
    grid.theta.resize(t_samples);
    for (int s = 0; s < s_samples; ++s)
    {
        grid.b[s] = -b_max + 2.0 * b_max * s / s_samples;
    }
    for (int t = 0; t < t_samples; ++t)
    {
        grid.theta[t] = -2.0 + 4.0 * t / t_samples;
    }
    grid.weights.resize(s_samples, t_samples);
    for (int s = 0; s < s_samples; ++s)
    {
        // Triangular densities of the difference of two independent uniform
        // draws over [0, b_max] and [-1, 1].
        const double fb = 1.0 / b_max - std::abs(grid.b[s]) / (b_max * b_max);
        for (int t = 0; t < t_samples; ++t)
        {
            const double gt = 0.5 - std::abs(grid.theta[t]) / 4.0;
            grid.weights(s, t) = fb * gt;
        }
    }
    return grid;
}

double objective_h(const std::vector<double>& x, const DiffGrid& grid, double wavelength)
{
    check_grid(grid);
    require(wavelength > 0.0, "objective_h: wavelength must be positive");
    const int n = static_cast<int>(x.size());
    require(n >= 1, "objective_h: empty position vector");

    const GridTerms terms = make_terms(x, grid);
    const int s_count = static_cast<int>(grid.b.size());
    const int t_count = static_cast<int>(grid.theta.size());

    std::vector<double> partial(s_count, 0.0);
    detail::parallel_for(s_count, [&](int s) {
        double acc = 0.0;
        for (int t = 0; t < t_count; ++t)
        {
            const double w = grid.weights(s, t);
            if (w == 0.0)
            {
                continue;
            }
            std::complex<double> field = 0.0;
            for (int i = 0; i < n; ++i)
            {
                const double phase =
                    k_two_pi * (grid.b[s] * terms.x2(i) + grid.theta[t] * x[i]) / wavelength;
                field += std::complex<double>(std::cos(phase), std::sin(phase));
            }
            acc += w * std::norm(field);
        }
        partial[s] = acc;
    });
    double total = 0.0;
    for (double value : partial)
    {
        total += value;
    }
    return terms.scale * total;
}

Eigen::VectorXd grad_h(const std::vector<double>& x, const DiffGrid& grid, double wavelength)
{
    check_grid(grid);
    require(wavelength > 0.0, "grad_h: wavelength must be positive");
    const int n = static_cast<int>(x.size());
    require(n >= 1, "grad_h: empty position vector");

    const GridTerms terms = make_terms(x, grid);
    const int s_count = static_cast<int>(grid.b.size());
    const int t_count = static_cast<int>(grid.theta.size());
    const double factor = 2.0 * k_two_pi / wavelength; // 4 pi / lambda

    std::vector<Eigen::VectorXd> partial(s_count, Eigen::VectorXd::Zero(n));
    detail::parallel_for(s_count, [&](int s) {
        Eigen::VectorXd& acc = partial[s];
        for (int t = 0; t < t_count; ++t)
        {
            const double w = grid.weights(s, t);
            if (w == 0.0)
            {
                continue;
            }
            std::complex<double> field = 0.0;
            std::vector<std::complex<double>> phasor(n);
            for (int i = 0; i < n; ++i)
            {
                const double phase =
                    k_two_pi * (grid.b[s] * terms.x2(i) + grid.theta[t] * x[i]) / wavelength;
                phasor[i] = std::complex<double>(std::cos(phase), std::sin(phase));
                field += phasor[i];
            }
            for (int i = 0; i < n; ++i)
            {
                const double slope = 2.0 * grid.b[s] * x[i] + grid.theta[t];
                acc(i) += w * factor * slope * std::imag(field * std::conj(phasor[i]));
            }
        }
    });
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
    for (const Eigen::VectorXd& value : partial)
    {
        grad += value;
    }
    return terms.scale * grad;
}

Eigen::MatrixXd hess_h(const std::vector<double>& x, const DiffGrid& grid, double wavelength)
{
    check_grid(grid);
    require(wavelength > 0.0, "hess_h: wavelength must be positive");
    const int n = static_cast<int>(x.size());
    require(n >= 1, "hess_h: empty position vector");

    const GridTerms terms = make_terms(x, grid);
    const int s_count = static_cast<int>(grid.b.size());
    const int t_count = static_cast<int>(grid.theta.size());
    const double c1 = 2.0 * k_two_pi / wavelength;        // 4 pi / lambda
    const double c2 = k_two_pi * k_two_pi / (wavelength * wavelength) * 2.0; // 8 pi^2 / lambda^2

    std::vector<Eigen::MatrixXd> partial(s_count, Eigen::MatrixXd::Zero(n, n));
    detail::parallel_for(s_count, [&](int s) {
        Eigen::MatrixXd& acc = partial[s];
        Eigen::VectorXcd phasor(n);
        Eigen::VectorXcd slope_phasor(n);
        for (int t = 0; t < t_count; ++t)
        {
            const double w = grid.weights(s, t);
            if (w == 0.0)
            {
                continue;
            }
            std::complex<double> field = 0.0;
            for (int i = 0; i < n; ++i)
            {
                const double phase =
                    k_two_pi * (grid.b[s] * terms.x2(i) + grid.theta[t] * x[i]) / wavelength;
                phasor(i) = std::complex<double>(std::cos(phase), std::sin(phase));
                field += phasor(i);
            }
            for (int i = 0; i < n; ++i)
            {
                const double slope = 2.0 * grid.b[s] * x[i] + grid.theta[t];
                slope_phasor(i) = slope * phasor(i);
            }
            // Off-diagonal blocks are c2 Re[q q^H] with q = P o exp(j phi);
            // the diagonal needs the curvature of its own phase instead.
            acc.noalias() += (w * c2) * (slope_phasor * slope_phasor.adjoint()).real();
            for (int i = 0; i < n; ++i)
            {
                const std::complex<double> rotated = field * std::conj(phasor(i));
                const double slope = 2.0 * grid.b[s] * x[i] + grid.theta[t];
                const double own = w * (c1 * 2.0 * grid.b[s] * std::imag(rotated) -
                                        c2 * slope * slope * (std::real(rotated) - 1.0));
                acc(i, i) += own - w * c2 * slope * slope; // cancel the rank-one diagonal
            }
        }
    });
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
    for (const Eigen::MatrixXd& value : partial)
    {
        hess += value;
    }
    return terms.scale * hess;
}

std::vector<double> project_feasible(const std::vector<double>& v, double spacing,
                                     double panel_length)
{
    const int n = static_cast<int>(v.size());
    require(n >= 1, "project_feasible: empty input");
    require(spacing >= 0.0, "project_feasible: spacing must be non-negative");
    require(panel_length > 0.0, "project_feasible: panel_length must be positive");
    require((n - 1) * spacing <= panel_length,
            "project_feasible: panel shorter than the minimum-spacing span");

    // Shift by the index ramp: y_i = v_i - i * spacing turns the spacing
    // constraints into y non-decreasing, and the per-index panel bounds into
    // the constant box [-(D - (N-1) s) / 2, (D - (N-1) s) / 2] around the
    // centered ramp. Projection = isotonic regression, then clamping.
    const double half = (n - 1) / 2.0;
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i)
    {
        y[i] = v[i] - (i - half) * spacing;
    }

    // Pool adjacent violators for the unweighted non-decreasing fit.
    std::vector<double> mean(n);
    std::vector<int> count(n);
    int blocks = 0;
    for (int i = 0; i < n; ++i)
    {
        mean[blocks] = y[i];
        count[blocks] = 1;
        ++blocks;
        while (blocks > 1 && mean[blocks - 2] > mean[blocks - 1])
        {
            const int total = count[blocks - 2] + count[blocks - 1];
            mean[blocks - 2] =
                (mean[blocks - 2] * count[blocks - 2] + mean[blocks - 1] * count[blocks - 1]) /
                total;
            count[blocks - 2] = total;
            --blocks;
        }
    }

    const double lo = -(panel_length - (n - 1) * spacing) / 2.0;
    const double hi = -lo;
    std::vector<double> out(n);
    int index = 0;
    for (int block = 0; block < blocks; ++block)
    {
        const double value = std::clamp(mean[block], lo, hi);
        for (int j = 0; j < count[block]; ++j)
        {
            out[index] = value + (index - half) * spacing;
            ++index;
        }
    }
    return out;
}

std::vector<double> surrogate_min(const std::vector<double>& x_prev, const Eigen::VectorXd& grad,
                                  double chi, double spacing, double panel_length)
{
    require(chi > 0.0, "surrogate_min: chi must be positive");
    require(grad.size() == static_cast<Eigen::Index>(x_prev.size()),
            "surrogate_min: gradient size mismatch");
    std::vector<double> target(x_prev.size());
    for (std::size_t i = 0; i < x_prev.size(); ++i)
    {
        target[i] = x_prev[i] - grad(static_cast<Eigen::Index>(i)) / chi;
    }
    return project_feasible(target, spacing, panel_length);
}

namespace
{

// Largest eigenvalue of a symmetric matrix by power iteration on the
// Gershgorin-shifted matrix H + shift I (positive semidefinite), which makes
// lambda_max(H) + shift the dominant eigenvalue.
double max_eigenvalue(const Eigen::MatrixXd& hess)
{
    const Eigen::Index n = hess.rows();
    double shift = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        shift = std::max(shift, hess.row(i).cwiseAbs().sum());
    }
    if (shift == 0.0)
    {
        return 0.0;
    }
    // Deterministic start with nonzero overlap with any eigenvector: a
    // uniform vector plus a small index-dependent ramp.
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        v(i) = 1.0 + 0.01 * static_cast<double>(i + 1);
    }
    v.normalize();
    double value = 0.0;
    for (int iter = 0; iter < 500; ++iter)
    {
        Eigen::VectorXd w = hess * v + shift * v;
        const double norm = w.norm();
        if (norm == 0.0)
        {
            return -shift;
        }
        w /= norm;
        const double next = w.dot(hess * w + shift * w);
        if (iter > 2 && std::abs(next - value) <= 1e-12 * std::max(1.0, std::abs(next)))
        {
            value = next;
            break;
        }
        value = next;
        v = std::move(w);
    }
    return value - shift;
}

} // namespace

ScaResult sca_apo(int n_antennas, double panel_length, double wavelength, const DiffGrid& grid,
                  int iterations, Rng& rng)
{
    require(n_antennas >= 3 && n_antennas % 2 == 1, "sca_apo: n_antennas must be odd and >= 3");
    require(panel_length > 0.0 && wavelength > 0.0,
            "sca_apo: panel_length and wavelength must be positive");
    require(iterations >= 0, "sca_apo: iterations must be non-negative");
    const double spacing = wavelength / 2.0;
    require((n_antennas - 1) * spacing <= panel_length,
            "sca_apo: panel shorter than the minimum-spacing span");
    check_grid(grid);

    // Random start: sorted uniform draw over the panel, restored to
    // feasibility by one projection.
    std::vector<double> x(n_antennas);
    for (int i = 0; i < n_antennas; ++i)
    {
        x[i] = rng.uniform(-panel_length / 2.0, panel_length / 2.0);
    }
    std::sort(x.begin(), x.end());
    x = project_feasible(x, spacing, panel_length);

    ScaResult result;
    result.state.objective_history.push_back(objective_h(x, grid, wavelength));
    double h_current = result.state.objective_history.back();

    for (int q = 0; q < iterations; ++q)
    {
        const Eigen::VectorXd grad = grad_h(x, grid, wavelength);
        const Eigen::MatrixXd hess = hess_h(x, grid, wavelength);
        const double trace_scale = std::abs(hess.trace()) / static_cast<double>(n_antennas);
        double chi = std::max(max_eigenvalue(hess), 1e-6 * std::max(1.0, trace_scale));

        // The curvature bound is heuristic for this nonconvex objective;
        // double it until the surrogate step actually descends.
        std::vector<double> candidate = x;
        double h_candidate = h_current;
        bool accepted = false;
        for (int attempt = 0; attempt < 60; ++attempt)
        {
            candidate = surrogate_min(x, grad, chi, spacing, panel_length);
            h_candidate = objective_h(candidate, grid, wavelength);
            if (h_candidate <= h_current + 1e-12 * std::max(1.0, std::abs(h_current)))
            {
                accepted = true;
                break;
            }
            chi *= 2.0;
        }
        if (accepted)
        {
            x = std::move(candidate);
            h_current = std::min(h_candidate, h_current);
        }
        result.state.objective_history.push_back(h_current);
        result.state.chi_history.push_back(chi);
    }

    result.state.positions = x;
    result.layout = make_nsa(x, panel_length, wavelength);
    return result;
}

} // namespace nfsa
