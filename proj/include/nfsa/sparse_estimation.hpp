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
#include <complex>
#include <vector>

#include "nfsa/array_geometry.hpp"
#include "nfsa/beam_analysis.hpp"
#include "nfsa/channel_model.hpp"

namespace nfsa
{

// Steering-vector dictionary over the surrogate-distance/angle grid with
// b_s = (s - 1) b_max / S; column (s - 1) T + t holds the atom at
// (b_s, theta_t) with 1-based s, t.
struct Dictionary
{
    MatXc atoms;                // N x (S * T), unit-modulus entries
    std::vector<SdaPoint> grid; // per-column grid point
    int s_samples = 0;
    int t_samples = 0;
    double b_max = 0.0;
};

// The angle grid spans one pattern period, theta_t = (1 + 2 t - T) / (p T),
// for usa/hula layouts and the full visible range [-1, 1] for nsa. S and T
// must satisfy the mainlobe sampling bounds (S >= b_max / depth and
// T >= 2 / (p * width) analytic for usa/hula, measured widths for nsa);
// undersampled grids are rejected naming the minimum sizes.
Dictionary build_dictionary(const ArrayLayout& layout, double b_max, int s_samples,
                            int t_samples);

// Far-field dictionary: b = 0 atoms over t_samples angles spanning [-1, 1].
// t_samples = 0 picks round(max(2 N, p N)).
Dictionary build_farfield_dictionary(const ArrayLayout& layout, int t_samples);

struct EstimateResult
{
    std::vector<int> support;      // selected columns in pick order (grid methods)
    std::vector<PathParams> paths; // estimated gains with (b, theta)
    VecXc channel;                 // synthesis of paths through the surrogate model
    int iterations = 0;
    bool degenerate = false; // all paths pruned, or rank-deficient fallback used
};

// Greedy pursuit: repeatedly pick the column with the largest correlation to
// the residual, then re-fit all selected gains by least squares. After every
// iteration the residual is orthogonal to the selected atoms.
EstimateResult sda_omp(const VecXc& y, const Dictionary& dict, int max_paths);

struct IsrceParams
{
    double noise_power = 0.0; // sigma^2 of the pilot observation
    double b_max = 0.0;       // clamp bound for refined surrogate distances
    double delta = 1e-3;      // reweighting floor
    double varpi = 0.0;       // regularization weight; 0 selects 10 N / noise_power
    double rho_rel = 1e-2;    // prune threshold relative to the strongest path power
    double mu = 1e-6;         // stop when the squared gain update falls below mu
    int max_outer = 50;
    int max_inner = 50; // gradient-descent steps per outer iteration
};

// Iterative refinement of the pursuit estimate: alternates reweighted
// regularized least-squares gain updates with continuous (b, theta)
// descent (Armijo backtracking) and pruning of vanishing paths. If every
// path is pruned the estimate degenerates to a zero channel with the flag set.
EstimateResult sda_isrce(const VecXc& y, const ArrayLayout& layout, const EstimateResult& init,
                         const IsrceParams& params);

// Far-field baseline: sda_omp with the b = 0 dictionary. t_samples = 0 picks
// round(max(2 N, p N)) angle samples.
EstimateResult farfield_omp(const VecXc& y, const ArrayLayout& layout, int max_paths,
                            int t_samples = 0);

// Identity estimator.
VecXc ls_estimate(const VecXc& y);

// Oracle baseline: atoms at the true (b, theta), least-squares gains; nearly
// duplicate paths fall back to a ridge solve.
EstimateResult genie_ls(const VecXc& y, const ArrayLayout& layout,
                        const std::vector<PathParams>& true_paths);

// 10 log10(||estimate - truth||^2 / ||truth||^2), floored at -120 dB.
double nmse_db(const VecXc& estimate, const VecXc& truth);

// Refinement objective -u^H (D / varpi + A^H A)^{-1} u with u = A^H y and
// its analytic gradient with respect to each atom's (b, theta); exposed for
// verification against finite differences.
double isrce_objective(const VecXc& y, const ArrayLayout& layout,
                       const std::vector<SdaPoint>& points, const Eigen::VectorXd& d_diag,
                       double varpi);
void isrce_gradient(const VecXc& y, const ArrayLayout& layout,
                    const std::vector<SdaPoint>& points, const Eigen::VectorXd& d_diag,
                    double varpi, Eigen::VectorXd& grad_b, Eigen::VectorXd& grad_theta);

} // namespace nfsa
