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

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nfsa/array_geometry.hpp"
#include "nfsa/rng.hpp"

namespace nfsa
{

// Integration grid over angle differences [-2, 2) and surrogate-distance
// differences [-b_max, b_max), with triangular weights
// w(s, t) = (1/b_max - |b_s|/b_max^2) * (1/2 - |theta_t|/4).
struct DiffGrid
{
    std::vector<double> b;     // S samples
    std::vector<double> theta; // T samples
    Eigen::MatrixXd weights;   // S x T
    double b_max = 0.0;
};

DiffGrid build_diff_grid(int s_samples, int t_samples, double b_max);

// Average weighted squared magnitude of
// sum_n exp(j 2 pi (b_s x_n^2 + theta_t x_n) / lambda) over the grid; a
// proxy for the expected multiuser interference of the layout.
double objective_h(const std::vector<double>& x, const DiffGrid& grid, double wavelength);
Eigen::VectorXd grad_h(const std::vector<double>& x, const DiffGrid& grid, double wavelength);
// Symmetric by construction and consistent with finite differences of grad_h.
Eigen::MatrixXd hess_h(const std::vector<double>& x, const DiffGrid& grid, double wavelength);

// Euclidean projection onto { x : x_n - x_{n-1} >= spacing, |x_n| <= panel_length / 2 }.
// After the change of variables y_n = x_n - n * spacing the set becomes an
// isotonic cone intersected with a constant box, solved exactly by
// pool-adjacent-violators plus clamping.
std::vector<double> project_feasible(const std::vector<double>& v, double spacing,
                                     double panel_length);

// Minimizer of grad . (x - x_prev) + chi / 2 ||x - x_prev||^2 over the same
// feasible set; equals the projection of x_prev - grad / chi.
std::vector<double> surrogate_min(const std::vector<double>& x_prev, const Eigen::VectorXd& grad,
                                  double chi, double spacing, double panel_length);

struct OptimizerState
{
    std::vector<double> positions;
    std::vector<double> objective_history; // h at x^(0) .. x^(Q), non-increasing
    std::vector<double> chi_history;       // curvature bound used at each step
};

struct ScaResult
{
    ArrayLayout layout; // kind nsa
    OptimizerState state;
};

// Successive convex approximation over antenna positions. The start point is
// a sorted uniform draw over the panel projected to feasibility; each step
// majorizes h with the largest Hessian eigenvalue (power iteration, clamped
// positive, doubled until the step descends) and solves the projected
// quadratic surrogate.
ScaResult sca_apo(int n_antennas, double panel_length, double wavelength, const DiffGrid& grid,
                  int iterations, Rng& rng);

} // namespace nfsa
