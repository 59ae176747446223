#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "previewctl/errors.hpp"
#include "previewctl/gap_bound.hpp"
#include "previewctl/lti.hpp"
#include "previewctl/noncausal.hpp"
#include "previewctl/preview.hpp"
#include "previewctl/regret.hpp"
#include "previewctl/riccati.hpp"
#include "previewctl/spectral.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace previewctl {
namespace {

// Translators run in reverse registration order, so subclasses registered
// after Error take precedence.
void RegisterErrors(py::module_& m) {
  const auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", base);
  py::register_exception<PreconditionViolated>(m, "PreconditionViolated", base);
  py::register_exception<NoStabilizingSolution>(m, "NoStabilizingSolution", base);
  py::register_exception<SynthesisFailure>(m, "SynthesisFailure", base);
  py::register_exception<FactorizationFailure>(m, "FactorizationFailure", base);
  py::register_exception<BoundUnavailable>(m, "BoundUnavailable", base);
  py::register_exception<ResourceLimit>(m, "ResourceLimit", base);
}

Plant MakePlant(Eigen::MatrixXd A, Eigen::MatrixXd B_d, Eigen::MatrixXd B_u,
                Eigen::MatrixXd Q, Eigen::MatrixXd R) {
  Plant plant{std::move(A), std::move(B_d), std::move(B_u), std::move(Q), std::move(R)};
  RequireValidPlant(plant);
  return plant;
}

}  // namespace
}  // namespace previewctl

PYBIND11_MODULE(_previewctl, m) {
  using namespace previewctl;
  m.doc() = "Discrete-time preview, H-infinity and regret-optimal control";
  m.attr("__version__") = "0.1.0";
  RegisterErrors(m);

  py::class_<Plant>(m, "Plant")
      .def(py::init(&MakePlant), "A"_a, "B_d"_a, "B_u"_a, "Q"_a, "R"_a,
           "Builds a plant and checks the standing assumptions.")
      .def_readonly("A", &Plant::A)
      .def_readonly("B_d", &Plant::B_d)
      .def_readonly("B_u", &Plant::B_u)
      .def_readonly("Q", &Plant::Q)
      .def_readonly("R", &Plant::R)
      .def_property_readonly("nx", &Plant::nx)
      .def_property_readonly("nd", &Plant::nd)
      .def_property_readonly("nu", &Plant::nu);

  py::class_<Signal>(m, "Signal")
      .def(py::init<Eigen::MatrixXd>(), "samples"_a,
           "Samples as an (nd, T) array, one column per time step.")
      .def_property_readonly("samples", &Signal::samples)
      .def_property_readonly("dim", &Signal::dim)
      .def_property_readonly("length", &Signal::length)
      .def("delayed", &Signal::Delayed, "k"_a);

  py::class_<PreviewController>(m, "PreviewController")
      .def_readonly("K_x", &PreviewController::K_x)
      .def_readonly("taps", &PreviewController::taps)
      .def_readonly("memory", &PreviewController::memory)
      .def_property_readonly("preview", &PreviewController::preview);

  py::class_<StateSpace>(m, "StateSpace")
      .def_readonly("A", &StateSpace::A)
      .def_readonly("B", &StateSpace::B)
      .def_readonly("C", &StateSpace::C)
      .def_readonly("D", &StateSpace::D);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("states", &Trajectory::states)
      .def_readonly("inputs", &Trajectory::inputs)
      .def_readonly("truncation_bound", &Trajectory::truncation_bound)
      .def_property_readonly("cost", &Cost);

  py::class_<DareSolution>(m, "DareSolution")
      .def_readonly("X", &DareSolution::X)
      .def_readonly("gain", &DareSolution::gain)
      .def_readonly("residual", &DareSolution::residual)
      .def_readonly("spectral_radius", &DareSolution::spectral_radius);

  py::class_<NoncausalController>(m, "NoncausalController")
      .def_readonly("X", &NoncausalController::X)
      .def_readonly("K_x", &NoncausalController::K_x)
      .def_readonly("K_v", &NoncausalController::K_v)
      .def_readonly("A_tilde", &NoncausalController::A_tilde);

  py::class_<GammaNc>(m, "GammaNc")
      .def_readonly("value", &GammaNc::value)
      .def_readonly("tol", &GammaNc::tol)
      .def_readonly("omega_peak", &GammaNc::omega_peak);

  py::class_<SynthesisResult>(m, "SynthesisResult")
      .def_readonly("gamma", &SynthesisResult::gamma)
      .def_readonly("gamma_lo", &SynthesisResult::gamma_lo)
      .def_readonly("controller", &SynthesisResult::controller)
      .def_readonly("diagnostics", &SynthesisResult::diagnostics);

  py::class_<SpectralFactor>(m, "SpectralFactor")
      .def_readonly("gamma", &SpectralFactor::gamma)
      .def_readonly("coeffs", &SpectralFactor::coeffs)
      .def_readonly("fit_error", &SpectralFactor::fit_error)
      .def_readonly("inverse_tail", &SpectralFactor::inverse_tail);

  py::class_<RegretSynthesis>(m, "RegretSynthesis")
      .def_readonly("gamma", &RegretSynthesis::gamma)
      .def_readonly("gamma_lo", &RegretSynthesis::gamma_lo)
      .def_readonly("controller", &RegretSynthesis::controller)
      .def_readonly("factor", &RegretSynthesis::factor);

  py::class_<RegretEstimate>(m, "RegretEstimate")
      .def_readonly("value", &RegretEstimate::value)
      .def_readonly("horizon", &RegretEstimate::horizon)
      .def_readonly("doubling_delta", &RegretEstimate::doubling_delta);

  py::class_<GapBound>(m, "GapBound")
      .def_readonly("a", &GapBound::a)
      .def_readonly("b", &GapBound::b)
      .def_readonly("c", &GapBound::c)
      .def_readonly("alpha", &GapBound::alpha)
      .def_readonly("t_cut", &GapBound::t_cut)
      .def("bound", &GapBound::Bound, "p"_a)
      .def("valid_for", &GapBound::ValidFor, "p"_a);

  m.def("solve_dare",
        py::overload_cast<const Eigen::MatrixXd&, const Eigen::MatrixXd&, const Eigen::MatrixXd&,
                          const Eigen::MatrixXd&, double>(&SolveDare),
        "A"_a, "B"_a, "Q"_a, "R"_a, "tol"_a = 1e-9);
  m.def("build_noncausal", &BuildNoncausal, "plant"_a);
  m.def("gamma_nc", py::overload_cast<const Plant&, double, int>(&ComputeGammaNc), "plant"_a,
        "tol"_a = 1e-10, "grid_size"_a = 4096);
  m.def("noncausal_cost", &NoncausalCost, "plant"_a, "nc"_a, "d"_a);
  m.def("closed_loop", &ClosedLoop, "plant"_a, "controller"_a);
  m.def("hinf_norm", &HinfNorm, "sys"_a, "tol"_a = 1e-9);
  m.def("simulate", &Simulate, "plant"_a, "controller"_a, "d"_a, "decay_tol"_a = 1e-13);
  m.def("hinf_preview_bisect", &HinfPreviewBisect, "plant"_a, "p"_a, "tol"_a = 1e-10,
        "gamma_nc"_a = std::nullopt);
  m.def("h2_preview", py::overload_cast<const Plant&, int>(&H2Preview), "plant"_a, "p"_a);
  m.def(
      "regret_preview_bisect",
      [](const Plant& plant, int p, double tol, int grid_size, int fir_order) {
        RegretOptions options;
        options.tol = tol;
        options.grid_size = grid_size;
        options.factorization.order = fir_order;
        return RegretPreviewBisect(plant, p, options);
      },
      "plant"_a, "p"_a, "tol"_a = 1e-10, "grid_size"_a = 4096, "fir_order"_a = 64);
  m.def("regret_eval",
        [](const Plant& plant, const PreviewController& ctrl, int N) {
          return RegretEval(plant, ctrl, N);
        },
        "plant"_a, "controller"_a, "N"_a = 400);
  m.def("spectral_factorize",
        py::overload_cast<const Plant&, double, int, int>(&SpectralFactorize), "plant"_a,
        "gamma"_a, "order"_a = 64, "grid_size"_a = 4096);
  m.def("h2_gap_bound", py::overload_cast<const Plant&, std::optional<double>>(&H2GapBound),
        "plant"_a, "alpha"_a = std::nullopt);
}
