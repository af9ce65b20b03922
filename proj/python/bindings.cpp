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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nfsa/array_geometry.hpp"
#include "nfsa/beam_analysis.hpp"
#include "nfsa/channel_model.hpp"
#include "nfsa/multiuser_link.hpp"
#include "nfsa/position_optimizer.hpp"
#include "nfsa/rng.hpp"
#include "nfsa/sparse_estimation.hpp"

namespace py = pybind11;
using namespace nfsa;

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Near-field beam analysis, antenna placement, channel estimation "
              "and multiuser rate evaluation for sparse arrays";
    m.attr("__version__") = NFSA_VERSION;

    py::register_exception<std::invalid_argument>(m, "InvalidArgument", PyExc_ValueError);

    py::enum_<ArrayKind>(m, "ArrayKind")
        .value("usa", ArrayKind::usa)
        .value("hula", ArrayKind::hula)
        .value("uca", ArrayKind::uca)
        .value("nsa", ArrayKind::nsa);

    py::class_<ArrayLayout>(m, "ArrayLayout")
        .def_readonly("kind", &ArrayLayout::kind)
        .def_readonly("wavelength", &ArrayLayout::wavelength)
        .def_readonly("panel_length", &ArrayLayout::panel_length)
        .def_readonly("sparsity", &ArrayLayout::sparsity)
        .def_readonly("x", &ArrayLayout::x)
        .def_readonly("y", &ArrayLayout::y)
        .def("size", &ArrayLayout::size)
        .def("__repr__", [](const ArrayLayout& layout) {
            return "<ArrayLayout " + to_string(layout.kind) + " N=" +
                   std::to_string(layout.size()) + ">";
        });

    py::class_<GeometrySummary>(m, "GeometrySummary")
        .def_readonly("panel_length", &GeometrySummary::panel_length)
        .def_readonly("sparsity", &GeometrySummary::sparsity)
        .def_readonly("rayleigh_distance", &GeometrySummary::rayleigh_distance)
        .def_readonly("near_field_bound", &GeometrySummary::near_field_bound)
        .def_readonly("b_max", &GeometrySummary::b_max);

    m.def("build_usa", &build_usa, py::arg("n_antennas"), py::arg("sparsity"),
          py::arg("wavelength"));
    m.def("build_hula", &build_hula, py::arg("n_antennas"), py::arg("wavelength"));
    m.def("build_uca", &build_uca, py::arg("n_antennas"), py::arg("wavelength"));
    m.def("make_nsa", &make_nsa, py::arg("positions"), py::arg("panel_length"),
          py::arg("wavelength"));
    m.def("geometry_summary", &geometry_summary, py::arg("layout"), py::arg("r_min"));
    m.def("save_layout", &save_layout, py::arg("layout"), py::arg("path"));
    m.def("load_layout", &load_layout, py::arg("path"));

    py::class_<SdaPoint>(m, "SdaPoint")
        .def(py::init<>())
        .def(py::init([](double b, double theta) { return SdaPoint{b, theta}; }),
             py::arg("b"), py::arg("theta"))
        .def_readwrite("b", &SdaPoint::b)
        .def_readwrite("theta", &SdaPoint::theta);

    py::class_<PathParams>(m, "PathParams")
        .def_readonly("gain", &PathParams::gain)
        .def_readonly("distance", &PathParams::distance)
        .def_readonly("angle_rad", &PathParams::angle_rad)
        .def_readonly("sda", &PathParams::sda);

    py::class_<ChannelConfig>(m, "ChannelConfig")
        .def(py::init<>())
        .def_readwrite("paths", &ChannelConfig::paths)
        .def_readwrite("ricean_db", &ChannelConfig::ricean_db)
        .def_readwrite("theta_min", &ChannelConfig::theta_min)
        .def_readwrite("theta_max", &ChannelConfig::theta_max)
        .def_readwrite("r_min", &ChannelConfig::r_min)
        .def_readwrite("r_max", &ChannelConfig::r_max);

    m.def("to_sda", &to_sda, py::arg("distance"), py::arg("angle_rad"));
    m.def(
        "from_sda",
        [](const SdaPoint& point) {
            double distance = 0.0;
            double angle = 0.0;
            from_sda(point, distance, angle);
            return py::make_tuple(distance, angle);
        },
        py::arg("point"));
    m.def("steering_exact", &steering_exact, py::arg("layout"), py::arg("distance"),
          py::arg("angle_rad"));
    m.def("steering_approx", &steering_approx, py::arg("layout"), py::arg("point"));
    m.def(
        "sample_channel",
        [](std::uint64_t seed, const ArrayLayout& layout, const ChannelConfig& config) {
            Rng rng(seed);
            const ChannelRealization draw = sample_channel(rng, layout, config);
            return py::make_tuple(draw.h, draw.paths);
        },
        py::arg("seed"), py::arg("layout"), py::arg("config"),
        "Deterministic channel draw; returns (h, paths).");

    m.def("beam_gain", &beam_gain_exact, py::arg("layout"), py::arg("focus"),
          py::arg("probe"));
    m.def("wrap_angle", &wrap_angle, py::arg("probe_theta"), py::arg("focus_theta"),
          py::arg("sparsity"));
    m.def("psp_amplitude", &psp_amplitude, py::arg("sparsity"), py::arg("n_antennas"),
          py::arg("wavelength"), py::arg("focus"), py::arg("probe"));
    m.def(
        "fresnel_cs",
        [](double zeta) {
            const FresnelResult result = fresnel_cs(zeta);
            return py::make_tuple(result.c, result.s);
        },
        py::arg("zeta"));
    m.def("distance_cross_section", &distance_cross_section, py::arg("sparsity"),
          py::arg("n_antennas"), py::arg("wavelength"), py::arg("focus"),
          py::arg("probe_b"));

    py::class_<LobeReport>(m, "LobeReport")
        .def_readonly("lobe_indices", &LobeReport::lobe_indices)
        .def_readonly("lobe_centers", &LobeReport::lobe_centers)
        .def_readonly("beamwidth", &LobeReport::beamwidth)
        .def_readonly("beam_depth", &LobeReport::beam_depth)
        .def_readonly("coverage", &LobeReport::coverage);

    py::class_<MainlobeSize>(m, "MainlobeSize")
        .def_readonly("width_theta", &MainlobeSize::width_theta)
        .def_readonly("depth_b", &MainlobeSize::depth_b);

    m.def("usa_lobe_report", &usa_lobe_report, py::arg("sparsity"), py::arg("n_antennas"),
          py::arg("wavelength"), py::arg("focus"), py::arg("b_max"));
    m.def("measure_mainlobe", &measure_mainlobe, py::arg("layout"), py::arg("b_max"));

    py::class_<DiffGrid>(m, "DiffGrid")
        .def_readonly("b", &DiffGrid::b)
        .def_readonly("theta", &DiffGrid::theta)
        .def_readonly("weights", &DiffGrid::weights)
        .def_readonly("b_max", &DiffGrid::b_max);

    py::class_<OptimizerState>(m, "OptimizerState")
        .def_readonly("positions", &OptimizerState::positions)
        .def_readonly("objective_history", &OptimizerState::objective_history)
        .def_readonly("chi_history", &OptimizerState::chi_history);

    py::class_<ScaResult>(m, "ScaResult")
        .def_readonly("layout", &ScaResult::layout)
        .def_readonly("state", &ScaResult::state);

    m.def("build_diff_grid", &build_diff_grid, py::arg("s_samples"), py::arg("t_samples"),
          py::arg("b_max"));
    m.def("objective_h", &objective_h, py::arg("x"), py::arg("grid"), py::arg("wavelength"));
    m.def("grad_h", &grad_h, py::arg("x"), py::arg("grid"), py::arg("wavelength"));
    m.def("hess_h", &hess_h, py::arg("x"), py::arg("grid"), py::arg("wavelength"));
    m.def("project_feasible", &project_feasible, py::arg("v"), py::arg("spacing"),
          py::arg("panel_length"));
    m.def(
        "sca_apo",
        [](int n_antennas, double panel_length, double wavelength, const DiffGrid& grid,
           int iterations, std::uint64_t seed) {
            Rng rng = Rng::stream(seed, 0xA0, 0);
            return sca_apo(n_antennas, panel_length, wavelength, grid, iterations, rng);
        },
        py::arg("n_antennas"), py::arg("panel_length"), py::arg("wavelength"),
        py::arg("grid"), py::arg("iterations"), py::arg("seed") = 0,
        "Optimize antenna positions; the start point derives from `seed` the "
        "same way the command line tool derives it.");

    py::class_<Dictionary>(m, "Dictionary")
        .def_readonly("atoms", &Dictionary::atoms)
        .def_readonly("grid", &Dictionary::grid)
        .def_readonly("s_samples", &Dictionary::s_samples)
        .def_readonly("t_samples", &Dictionary::t_samples)
        .def_readonly("b_max", &Dictionary::b_max);

    py::class_<EstimateResult>(m, "EstimateResult")
        .def_readonly("support", &EstimateResult::support)
        .def_readonly("paths", &EstimateResult::paths)
        .def_readonly("channel", &EstimateResult::channel)
        .def_readonly("iterations", &EstimateResult::iterations)
        .def_readonly("degenerate", &EstimateResult::degenerate);

    py::class_<IsrceParams>(m, "IsrceParams")
        .def(py::init<>())
        .def_readwrite("noise_power", &IsrceParams::noise_power)
        .def_readwrite("b_max", &IsrceParams::b_max)
        .def_readwrite("delta", &IsrceParams::delta)
        .def_readwrite("varpi", &IsrceParams::varpi)
        .def_readwrite("rho_rel", &IsrceParams::rho_rel)
        .def_readwrite("mu", &IsrceParams::mu)
        .def_readwrite("max_outer", &IsrceParams::max_outer)
        .def_readwrite("max_inner", &IsrceParams::max_inner);

    m.def("build_dictionary", &build_dictionary, py::arg("layout"), py::arg("b_max"),
          py::arg("s_samples") = 0, py::arg("t_samples") = 0);
    m.def("build_farfield_dictionary", &build_farfield_dictionary, py::arg("layout"),
          py::arg("t_samples") = 0);
    m.def("sda_omp", &sda_omp, py::arg("y"), py::arg("dict"), py::arg("max_paths"));
    m.def("sda_isrce", &sda_isrce, py::arg("y"), py::arg("layout"), py::arg("init"),
          py::arg("params"));
    m.def("farfield_omp", &farfield_omp, py::arg("y"), py::arg("layout"),
          py::arg("max_paths"), py::arg("t_samples") = 0);
    m.def("ls_estimate", &ls_estimate, py::arg("y"));
    m.def("genie_ls", &genie_ls, py::arg("y"), py::arg("layout"), py::arg("true_paths"));
    m.def("nmse_db", &nmse_db, py::arg("estimate"), py::arg("truth"));

    py::enum_<CsiMode>(m, "CsiMode")
        .value("perfect", CsiMode::perfect)
        .value("omp", CsiMode::omp)
        .value("isrce", CsiMode::isrce);

    py::class_<McStat>(m, "McStat")
        .def_readonly("mean", &McStat::mean)
        .def_readonly("std_error", &McStat::std_error)
        .def_readonly("trials", &McStat::trials);

    py::class_<NmseStat>(m, "NmseStat")
        .def_readonly("method", &NmseStat::method)
        .def_readonly("nmse_db", &NmseStat::nmse_db)
        .def_readonly("trials", &NmseStat::trials);

    m.def("mmse_combiner", &mmse_combiner, py::arg("channels"), py::arg("noise_power"));
    m.def("mrc_combiner", &mrc_combiner, py::arg("h"));
    m.def("sinr", &sinr, py::arg("channels"), py::arg("combiners"), py::arg("user"),
          py::arg("noise_power"));
    m.def("sum_rate", &sum_rate, py::arg("channels"), py::arg("combiners"),
          py::arg("noise_power"));
    m.def("sum_rate_mc", &sum_rate_mc, py::arg("layout"), py::arg("channel"),
          py::arg("users"), py::arg("noise_power"), py::arg("trials"), py::arg("seed"),
          py::call_guard<py::gil_scoped_release>());
    m.def("sum_rate_mc_estimated", &sum_rate_mc_estimated, py::arg("layout"),
          py::arg("channel"), py::arg("users"), py::arg("noise_power"), py::arg("trials"),
          py::arg("seed"), py::arg("dict"), py::arg("mode"), py::arg("max_paths"),
          py::call_guard<py::gil_scoped_release>());
    m.def("two_user_sum_rate_mc", &two_user_sum_rate_mc, py::arg("layout"), py::arg("b"),
          py::arg("theta2"), py::arg("noise_power"), py::arg("trials"), py::arg("seed"),
          py::call_guard<py::gil_scoped_release>());
    m.def("nmse_mc", &nmse_mc, py::arg("layout"), py::arg("channel"),
          py::arg("noise_power"), py::arg("trials"), py::arg("seed"), py::arg("dict"),
          py::arg("farfield_dict"), py::arg("max_paths"),
          py::call_guard<py::gil_scoped_release>());
}
