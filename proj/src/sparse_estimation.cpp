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

#include "nfsa/sparse_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

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

PathParams path_from_point(const SdaPoint& point, std::complex<double> gain)
{
    PathParams path;
    path.gain = gain;
    path.sda = point;
    if (point.b > 0.0 && std::abs(point.theta) < 1.0)
    {
        from_sda(point, path.distance, path.angle_rad);
    }
    else
    {
        path.distance = 0.0;
        path.angle_rad = std::asin(std::clamp(point.theta, -1.0, 1.0));
    }
    return path;
}

// Least squares through column-pivoted QR; falls back to a ridge-regularized
// normal-equation solve when the selected atoms are rank-deficient.
VecXc solve_gains(const MatXc& atoms, const VecXc& y, bool& degenerate)
{
    Eigen::ColPivHouseholderQR<MatXc> qr(atoms);
    if (qr.rank() < atoms.cols())
    {
        degenerate = true;
        MatXc gram = atoms.adjoint() * atoms;
        gram.diagonal().array() += 1e-12;
        return gram.ldlt().solve(atoms.adjoint() * y);
    }
    return qr.solve(y);
}

struct MainlobeBounds
{
    double width = 0.0;  // full angle extent for the sampling rule
    double depth = 0.0;  // full surrogate-distance extent
    double range = 2.0;  // angle-grid span (one period for uniform arrays)
};

MainlobeBounds mainlobe_bounds(const ArrayLayout& layout, double b_max)
{
    MainlobeBounds bounds;
    const double n = static_cast<double>(layout.size());
    const double p = layout.sparsity;
    if (layout.kind == ArrayKind::nsa)
    {
        const MainlobeSize measured = measure_mainlobe(layout, b_max);
        bounds.width = measured.width_theta;
        bounds.depth = measured.depth_b;
        bounds.range = 2.0;
    }
    else
    {
        bounds.width = 2.0 / (p * n);
        bounds.depth = std::min(14.0 / (layout.wavelength * p * p * n * n), b_max);
        bounds.range = 2.0 / p;
    }
    return bounds;
}

} // namespace

Dictionary build_dictionary(const ArrayLayout& layout, double b_max, int s_samples, int t_samples)
{
    require(layout.is_linear(), "dictionary: linear layouts only");
    require(layout.kind != ArrayKind::uca, "dictionary: linear layouts only");
    require(b_max > 0.0, "dictionary: b_max must be positive");
    require(s_samples >= 0 && t_samples >= 0,
            "dictionary: sample counts must be non-negative (0 selects the minimum)");

    const MainlobeBounds bounds = mainlobe_bounds(layout, b_max);
    const int s_min = static_cast<int>(std::ceil(b_max / bounds.depth - 1e-9));
    const int t_min = static_cast<int>(std::ceil(bounds.range / bounds.width - 1e-9));
    const int s_count = s_samples == 0 ? s_min : s_samples;
    const int t_count = t_samples == 0 ? t_min : t_samples;
    if (s_count < s_min || t_count < t_min)
    {
        throw std::invalid_argument(
            "dictionary: undersampled grid; minimum S=" + std::to_string(s_min) +
            ", T=" + std::to_string(t_min) + " for this layout");
    }

    Dictionary dict;
    dict.s_samples = s_count;
    dict.t_samples = t_count;
    dict.b_max = b_max;
    dict.atoms.resize(layout.size(), static_cast<Eigen::Index>(s_count) * t_count);
    dict.grid.reserve(static_cast<std::size_t>(s_count) * t_count);
    const bool full_range = layout.kind == ArrayKind::nsa;
    for (int s = 1; s <= s_count; ++s)
    {
        const double b = (s - 1) * b_max / s_count;
        for (int t = 1; t <= t_count; ++t)
        {
            // One pattern period for uniform arrays; the aperiodic layouts
            // need the whole visible range, sampled at cell midpoints.
            const double theta = full_range
                                     ? -1.0 + (2.0 * t - 1.0) / t_count
                                     : (1.0 + 2.0 * t - t_count) / (layout.sparsity * t_count);
            const SdaPoint point{b, theta};
            const Eigen::Index column = static_cast<Eigen::Index>(s - 1) * t_count + (t - 1);
            dict.atoms.col(column) = steering_approx(layout, point);
            dict.grid.push_back(point);
        }
    }
    return dict;
}

Dictionary build_farfield_dictionary(const ArrayLayout& layout, int t_samples)
{
    require(layout.is_linear(), "dictionary: linear layouts only");
    require(t_samples >= 0, "dictionary: t_samples must not be negative");
    if (t_samples == 0)
    {
        const double n = static_cast<double>(layout.size());
        t_samples =
            static_cast<int>(std::lround(std::max(2.0 * n, layout.sparsity * n)));
    }

    Dictionary dict;
    dict.s_samples = 1;
    dict.t_samples = t_samples;
    dict.b_max = 0.0;
    dict.atoms.resize(layout.size(), t_samples);
    dict.grid.reserve(t_samples);
    for (int t = 1; t <= t_samples; ++t)
    {
        const SdaPoint point{0.0, -1.0 + (2.0 * t - 1.0) / t_samples};
        dict.atoms.col(t - 1) = steering_approx(layout, point);
        dict.grid.push_back(point);
    }
    return dict;
}

EstimateResult sda_omp(const VecXc& y, const Dictionary& dict, int max_paths)
{
    const Eigen::Index n = dict.atoms.rows();
    const Eigen::Index columns = dict.atoms.cols();
    require(y.size() == n, "sda_omp: observation length mismatch");
    require(max_paths >= 1 && max_paths <= n, "sda_omp: max_paths must lie in [1, N]");
    require(columns >= 1, "sda_omp: empty dictionary");

    EstimateResult result;
    VecXc residual = y;
    VecXc gains;
    MatXc selected(n, 0);
    const double y_norm = y.norm();
    // A zero observation carries no path information; keep the support empty.
    if (y_norm == 0.0)
    {
        result.channel = VecXc::Zero(n);
        return result;
    }

    for (int iter = 0; iter < max_paths; ++iter)
    {
        if (static_cast<Eigen::Index>(result.support.size()) == columns)
        {
            break;
        }
        Eigen::VectorXd correlation = (dict.atoms.adjoint() * residual).cwiseAbs2();
        for (int picked : result.support)
        {
            correlation(picked) = -1.0;
        }
        Eigen::Index best = 0;
        correlation.maxCoeff(&best);
        result.support.push_back(static_cast<int>(best));

        selected.conservativeResize(Eigen::NoChange, selected.cols() + 1);
        selected.col(selected.cols() - 1) = dict.atoms.col(best);
        gains = solve_gains(selected, y, result.degenerate);
        residual = y - selected * gains;
        ++result.iterations;
        if (residual.norm() <= 1e-12 * std::max(y_norm, 1e-300))
        {
            break;
        }
    }

    result.paths.reserve(result.support.size());
    for (std::size_t i = 0; i < result.support.size(); ++i)
    {
        result.paths.push_back(path_from_point(dict.grid[result.support[i]], gains(i)));
    }
    result.channel = selected * gains;
    return result;
}

namespace
{

// Column derivative scales of the surrogate steering model.
void atom_and_derivatives(const ArrayLayout& layout, const SdaPoint& point, VecXc& atom,
                          VecXc& d_b, VecXc& d_theta)
{
    atom = steering_approx(layout, point);
    const Eigen::Index n = atom.size();
    d_b.resize(n);
    d_theta.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const double x = layout.x[i];
        d_b(i) = std::complex<double>(0.0, k_two_pi * x * x / layout.wavelength) * atom(i);
        d_theta(i) = std::complex<double>(0.0, -k_two_pi * x / layout.wavelength) * atom(i);
    }
}

MatXc synthesis_matrix(const ArrayLayout& layout, const std::vector<SdaPoint>& points)
{
    MatXc atoms(layout.size(), static_cast<Eigen::Index>(points.size()));
    for (std::size_t l = 0; l < points.size(); ++l)
    {
        atoms.col(static_cast<Eigen::Index>(l)) = steering_approx(layout, points[l]);
    }
    return atoms;
}

// Solves (D / varpi + A^H A) z = A^H y, adding a 1e-12 ridge when the system
// is ill-conditioned.
VecXc regularized_gains(const MatXc& atoms, const VecXc& y, const Eigen::VectorXd& d_diag,
                        double varpi)
{
    MatXc system = atoms.adjoint() * atoms;
    system.diagonal() += (d_diag / varpi).cast<std::complex<double>>();
    Eigen::LDLT<MatXc> ldlt(system);
    const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success ||
        pivots.minCoeff() <= 1e-14 * std::max(1.0, pivots.maxCoeff()))
    {
        system.diagonal().array() += 1e-12;
        ldlt.compute(system);
    }
    return ldlt.solve(atoms.adjoint() * y);
}

} // namespace

double isrce_objective(const VecXc& y, const ArrayLayout& layout,
                       const std::vector<SdaPoint>& points, const Eigen::VectorXd& d_diag,
                       double varpi)
{
    require(!points.empty(), "isrce: empty path set");
    require(d_diag.size() == static_cast<Eigen::Index>(points.size()),
            "isrce: weight size mismatch");
    require(varpi > 0.0, "isrce: varpi must be positive");
    const MatXc atoms = synthesis_matrix(layout, points);
    const VecXc u = atoms.adjoint() * y;
    const VecXc z = regularized_gains(atoms, y, d_diag, varpi);
    return -std::real(u.dot(z));
}

void isrce_gradient(const VecXc& y, const ArrayLayout& layout,
                    const std::vector<SdaPoint>& points, const Eigen::VectorXd& d_diag,
                    double varpi, Eigen::VectorXd& grad_b, Eigen::VectorXd& grad_theta)
{
    require(!points.empty(), "isrce: empty path set");
    require(d_diag.size() == static_cast<Eigen::Index>(points.size()),
            "isrce: weight size mismatch");
    require(varpi > 0.0, "isrce: varpi must be positive");

    const std::size_t count = points.size();
    const MatXc atoms = synthesis_matrix(layout, points);
    const VecXc z = regularized_gains(atoms, y, d_diag, varpi);
    const VecXc residual = atoms * z - y;

    grad_b.resize(static_cast<Eigen::Index>(count));
    grad_theta.resize(static_cast<Eigen::Index>(count));
    VecXc atom;
    VecXc d_b;
    VecXc d_theta;
    for (std::size_t l = 0; l < count; ++l)
    {
        atom_and_derivatives(layout, points[l], atom, d_b, d_theta);
        const std::complex<double> z_l = z(static_cast<Eigen::Index>(l));
        grad_b(static_cast<Eigen::Index>(l)) = 2.0 * std::real(z_l * residual.dot(d_b));
        grad_theta(static_cast<Eigen::Index>(l)) = 2.0 * std::real(z_l * residual.dot(d_theta));
    }
}

EstimateResult sda_isrce(const VecXc& y, const ArrayLayout& layout, const EstimateResult& init,
                         const IsrceParams& params)
{
    require(layout.is_linear(), "isrce: linear layouts only");
    require(y.size() == layout.size(), "isrce: observation length mismatch");
    require(params.delta > 0.0, "isrce: delta must be positive");
    require(params.mu > 0.0, "isrce: mu must be positive");
    require(params.rho_rel >= 0.0 && params.rho_rel < 1.0, "isrce: rho_rel must lie in [0, 1)");
    require(params.b_max > 0.0, "isrce: b_max must be positive");
    require(params.max_outer >= 1 && params.max_inner >= 0, "isrce: iteration limits invalid");
    require(params.noise_power >= 0.0, "isrce: noise_power must be non-negative");
    const double varpi = params.varpi > 0.0
                             ? params.varpi
                             : 10.0 * layout.size() / std::max(params.noise_power, 1e-12);

    EstimateResult result;
    result.channel = VecXc::Zero(layout.size());
    std::vector<SdaPoint> points;
    std::vector<int> origin; // index into init.paths for support bookkeeping
    for (std::size_t l = 0; l < init.paths.size(); ++l)
    {
        SdaPoint point = init.paths[l].sda;
        point.b = std::clamp(point.b, 0.0, params.b_max);
        point.theta = std::clamp(point.theta, -1.0, 1.0);
        points.push_back(point);
        origin.push_back(static_cast<int>(l));
    }
    if (points.empty())
    {
        result.degenerate = true;
        return result;
    }

    // Mainlobe-derived scales keep one descent step meaningful on both axes.
    const double n = static_cast<double>(layout.size());
    const double p = layout.sparsity;
    const double width = 2.0 / (p * n);
    const double depth =
        std::min(14.0 / (layout.wavelength * p * p * n * n), params.b_max);
    const double scale_b = (depth / 2.0) * (depth / 2.0);
    const double scale_theta = (width / 2.0) * (width / 2.0);

    VecXc gains_prev = std::sqrt(params.mu) * VecXc::Ones(static_cast<Eigen::Index>(points.size()));
    VecXc gains;
    double eta = 1.0;
    bool converged = false;

    for (int outer = 0; outer < params.max_outer && !converged; ++outer)
    {
        ++result.iterations;
        Eigen::VectorXd d_diag(static_cast<Eigen::Index>(points.size()));
        for (Eigen::Index l = 0; l < d_diag.size(); ++l)
        {
            d_diag(l) = 1.0 / (std::norm(gains_prev(l)) + params.delta);
        }

        double objective = isrce_objective(y, layout, points, d_diag, varpi);
        if (!std::isfinite(objective))
        {
            throw std::runtime_error("isrce: non-finite objective");
        }
        Eigen::VectorXd grad_b;
        Eigen::VectorXd grad_theta;
        for (int inner = 0; inner < params.max_inner; ++inner)
        {
            isrce_gradient(y, layout, points, d_diag, varpi, grad_b, grad_theta);
            const double decrease =
                scale_b * grad_b.squaredNorm() + scale_theta * grad_theta.squaredNorm();
            if (decrease <= 1e-30)
            {
                break;
            }
            bool moved = false;
            double step = eta;
            for (int half = 0; half < 40; ++half)
            {
                std::vector<SdaPoint> trial = points;
                for (std::size_t l = 0; l < trial.size(); ++l)
                {
                    const Eigen::Index el = static_cast<Eigen::Index>(l);
                    trial[l].b =
                        std::clamp(trial[l].b - step * scale_b * grad_b(el), 0.0, params.b_max);
                    trial[l].theta =
                        std::clamp(trial[l].theta - step * scale_theta * grad_theta(el), -1.0, 1.0);
                }
                const double candidate = isrce_objective(y, layout, trial, d_diag, varpi);
                if (!std::isfinite(candidate))
                {
                    throw std::runtime_error("isrce: non-finite objective");
                }
                if (candidate <= objective - 1e-4 * step * decrease)
                {
                    points = std::move(trial);
                    objective = candidate;
                    eta = std::min(step * 2.0, 1e6);
                    moved = true;
                    break;
                }
                step /= 2.0;
            }
            if (!moved)
            {
                eta = std::max(eta / 4.0, 1e-18);
                break;
            }
        }

        const MatXc atoms = synthesis_matrix(layout, points);
        gains = regularized_gains(atoms, y, d_diag, varpi);

        // Convergence is judged before pruning so the compared vectors align.
        if (gains.size() == gains_prev.size() && (gains - gains_prev).squaredNorm() < params.mu)
        {
            converged = true;
        }

        // Drop vanishing paths relative to the strongest one.
        const Eigen::VectorXd powers = gains.cwiseAbs2();
        const double strongest = powers.maxCoeff();
        if (strongest <= 0.0)
        {
            result.degenerate = true;
            result.channel = VecXc::Zero(layout.size());
            return result;
        }
        std::vector<SdaPoint> kept_points;
        std::vector<int> kept_origin;
        std::vector<std::complex<double>> kept_gains;
        for (std::size_t l = 0; l < points.size(); ++l)
        {
            const Eigen::Index el = static_cast<Eigen::Index>(l);
            if (powers(el) > params.rho_rel * strongest)
            {
                kept_points.push_back(points[l]);
                kept_origin.push_back(origin[l]);
                kept_gains.push_back(gains(el));
            }
        }
        points = std::move(kept_points);
        origin = std::move(kept_origin);
        gains.resize(static_cast<Eigen::Index>(kept_gains.size()));
        for (std::size_t l = 0; l < kept_gains.size(); ++l)
        {
            gains(static_cast<Eigen::Index>(l)) = kept_gains[l];
        }
        gains_prev = gains;
    }

    const MatXc atoms = synthesis_matrix(layout, points);
    result.channel = atoms * gains;
    result.paths.reserve(points.size());
    for (std::size_t l = 0; l < points.size(); ++l)
    {
        result.paths.push_back(path_from_point(points[l], gains(static_cast<Eigen::Index>(l))));
    }
    if (init.support.size() == init.paths.size())
    {
        for (int index : origin)
        {
            result.support.push_back(init.support[index]);
        }
    }
    result.degenerate = result.degenerate || init.degenerate;
    return result;
}

EstimateResult farfield_omp(const VecXc& y, const ArrayLayout& layout, int max_paths,
                            int t_samples)
{
    const Dictionary dict = build_farfield_dictionary(layout, t_samples);
    return sda_omp(y, dict, max_paths);
}

VecXc ls_estimate(const VecXc& y)
{
    return y;
}

EstimateResult genie_ls(const VecXc& y, const ArrayLayout& layout,
                        const std::vector<PathParams>& true_paths)
{
    require(!true_paths.empty(), "genie_ls: empty path set");
    require(y.size() == layout.size(), "genie_ls: observation length mismatch");

    EstimateResult result;
    MatXc atoms(layout.size(), static_cast<Eigen::Index>(true_paths.size()));
    for (std::size_t l = 0; l < true_paths.size(); ++l)
    {
        atoms.col(static_cast<Eigen::Index>(l)) = steering_approx(layout, true_paths[l].sda);
    }
    const VecXc gains = solve_gains(atoms, y, result.degenerate);
    result.channel = atoms * gains;
    result.iterations = 1;
    result.paths = true_paths;
    for (std::size_t l = 0; l < true_paths.size(); ++l)
    {
        result.paths[l].gain = gains(static_cast<Eigen::Index>(l));
    }
    return result;
}

double nmse_db(const VecXc& estimate, const VecXc& truth)
{
    require(estimate.size() == truth.size(), "nmse: length mismatch");
    const double truth_power = truth.squaredNorm();
    require(truth_power > 0.0, "nmse: zero reference channel");
    const double ratio = (estimate - truth).squaredNorm() / truth_power;
    return std::max(10.0 * std::log10(std::max(ratio, 1e-300)), -120.0);
}

} // namespace nfsa
