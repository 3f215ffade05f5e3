#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>

#include "hmmbw/error.hpp"
#include "hmmbw/inference.hpp"
#include "hmmbw/io.hpp"
#include "hmmbw/model.hpp"
#include "hmmbw/oracle.hpp"
#include "hmmbw/training.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace hmmbw;

namespace {

py::array_t<double> to_array(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) view(r, c) = m(r, c);
  }
  return out;
}

py::array_t<double> to_array(const std::vector<Matrix>& ms, std::size_t n) {
  py::array_t<double> out({ms.size(), n, n});
  auto view = out.mutable_unchecked<3>();
  for (std::size_t t = 0; t < ms.size(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) view(t, i, j) = ms[t](i, j);
    }
  }
  return out;
}

HmmParameters make_params(std::vector<double> pi, const std::vector<std::vector<double>>& trans,
                          EmissionModel emission) {
  HmmParameters p{{std::move(pi)}, {Matrix::from_rows(trans)}, std::move(emission)};
  return validate(p);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = R"pbdoc(
        Hidden Markov model training and inference
        ------------------------------------------

        Scaled forward-backward, Baum-Welch over multiple sequences, Viterbi
        decoding, sampling, and a brute-force enumeration oracle.
    )pbdoc";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<InferenceError>(m, "InferenceError", base.ptr());
  py::register_exception<OracleError>(m, "OracleError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::enum_<EmissionKind>(m, "EmissionKind")
      .value("categorical", EmissionKind::categorical)
      .value("gaussian", EmissionKind::gaussian);

  py::class_<HmmParameters>(m, "HmmParameters")
      .def_static(
          "categorical",
          [](std::vector<double> pi, const std::vector<std::vector<double>>& trans,
             const std::vector<std::vector<double>>& emit) {
            return make_params(std::move(pi), trans, CategoricalEmission{Matrix::from_rows(emit)});
          },
          py::arg("pi"), py::arg("trans"), py::arg("emit"))
      .def_static(
          "gaussian",
          [](std::vector<double> pi, const std::vector<std::vector<double>>& trans,
             std::vector<double> means, std::vector<double> variances) {
            return make_params(std::move(pi), trans,
                               GaussianEmission{std::move(means), std::move(variances)});
          },
          py::arg("pi"), py::arg("trans"), py::arg("means"), py::arg("variances"))
      .def_property_readonly("n_states", &HmmParameters::n_states)
      .def_property_readonly("emission_kind", &HmmParameters::emission_kind)
      .def_property_readonly("pi", [](const HmmParameters& p) { return p.pi.probs; })
      .def_property_readonly("trans", [](const HmmParameters& p) { return to_array(p.trans.probs); })
      .def_property_readonly("emit",
                             [](const HmmParameters& p) -> py::object {
                               if (const auto* c = std::get_if<CategoricalEmission>(&p.emission)) {
                                 return to_array(c->probs);
                               }
                               return py::none();
                             })
      .def_property_readonly("means",
                             [](const HmmParameters& p) -> py::object {
                               if (const auto* g = std::get_if<GaussianEmission>(&p.emission)) {
                                 return py::cast(g->means);
                               }
                               return py::none();
                             })
      .def_property_readonly("variances",
                             [](const HmmParameters& p) -> py::object {
                               if (const auto* g = std::get_if<GaussianEmission>(&p.emission)) {
                                 return py::cast(g->variances);
                               }
                               return py::none();
                             })
      .def(py::self == py::self)
      .def("__repr__", [](const HmmParameters& p) { return io::render_model(p); });

  py::class_<ObservationSequence>(m, "ObservationSequence")
      .def_static("categorical", &ObservationSequence::categorical, py::arg("symbols"))
      .def_static("gaussian", &ObservationSequence::gaussian, py::arg("values"))
      .def_property_readonly("kind", &ObservationSequence::kind)
      .def_property_readonly("symbols", &ObservationSequence::symbols)
      .def_property_readonly("values", &ObservationSequence::values)
      .def("__len__", &ObservationSequence::size)
      .def(py::self == py::self);

  m.def(
      "validate", [](const HmmParameters& p) { validate(p); }, py::arg("params"));
  m.def(
      "random_init",
      [](std::size_t n_states, std::optional<std::size_t> n_symbols, std::uint64_t seed) {
        const auto spec = n_symbols ? EmissionSpec::categorical(*n_symbols) : EmissionSpec::gaussian();
        return random_init(n_states, spec, seed);
      },
      py::arg("n_states"), py::arg("n_symbols") = py::none(), py::arg("seed") = 0,
      "Random model; categorical with n_symbols symbols, gaussian when n_symbols is None.");

  m.def("log_likelihood", &log_likelihood, py::arg("params"), py::arg("obs"));
  m.def(
      "forward",
      [](const HmmParameters& p, const ObservationSequence& o) {
        auto f = forward(p, o);
        return py::make_tuple(to_array(f.alpha_hat), f.scales, f.log_likelihood);
      },
      py::arg("params"), py::arg("obs"), "Returns (alpha_hat, scales, log_likelihood).");
  m.def(
      "posteriors",
      [](const HmmParameters& p, const ObservationSequence& o) {
        auto post = posteriors(p, o);
        return py::make_tuple(to_array(post.gamma), to_array(post.xi, p.n_states()),
                              post.log_likelihood);
      },
      py::arg("params"), py::arg("obs"), "Returns (gamma, xi, log_likelihood).");
  m.def(
      "viterbi",
      [](const HmmParameters& p, const ObservationSequence& o) {
        auto v = viterbi(p, o);
        return py::make_tuple(v.path, v.log_joint);
      },
      py::arg("params"), py::arg("obs"));
  m.def(
      "sample",
      [](const HmmParameters& p, std::size_t length, std::uint64_t seed) {
        auto s = sample(p, length, seed);
        return py::make_tuple(s.states, s.obs);
      },
      py::arg("params"), py::arg("length"), py::arg("seed") = 0);

  py::class_<FitConfig>(m, "FitConfig")
      .def(py::init<>())
      .def_readwrite("max_iterations", &FitConfig::max_iterations)
      .def_readwrite("rel_tolerance", &FitConfig::rel_tolerance)
      .def_readwrite("transition_floor", &FitConfig::transition_floor)
      .def_readwrite("emission_floor", &FitConfig::emission_floor)
      .def_readwrite("variance_floor", &FitConfig::variance_floor)
      .def_readwrite("threads", &FitConfig::threads);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("params", &FitResult::params)
      .def_readonly("log_likelihood_trace", &FitResult::log_likelihood_trace)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("converged", &FitResult::converged);

  m.def(
      "baum_welch_step",
      [](const HmmParameters& p, const std::vector<ObservationSequence>& seqs,
         const FitConfig& config) {
        auto step = baum_welch_step(p, seqs, config);
        return py::make_tuple(step.params, step.log_likelihood_prev);
      },
      py::arg("params"), py::arg("sequences"), py::arg("config") = FitConfig{});
  m.def("fit", &fit, py::arg("params"), py::arg("sequences"), py::arg("config") = FitConfig{},
        py::call_guard<py::gil_scoped_release>());

  auto orc = m.def_submodule("oracle", "Brute-force enumeration over all hidden paths");
  orc.def("enumerate_likelihood", &oracle::enumerate_likelihood, py::arg("params"), py::arg("obs"));
  orc.def(
      "enumerate_posteriors",
      [](const HmmParameters& p, const ObservationSequence& o) {
        auto e = oracle::enumerate_posteriors(p, o);
        return py::make_tuple(e.likelihood, to_array(e.gamma), to_array(e.xi, p.n_states()));
      },
      py::arg("params"), py::arg("obs"), "Returns (likelihood, gamma, xi).");
  orc.def("enumerate_q", &oracle::enumerate_q, py::arg("params_new"), py::arg("params_prev"),
          py::arg("sequences"));

  m.def("load_model", &io::load_model, py::arg("path"));
  m.def("save_model", &io::save_model, py::arg("params"), py::arg("path"));
  m.def("render_model", &io::render_model, py::arg("params"));
  m.def("parse_model", &io::parse_model, py::arg("text"));
  m.def("load_sequences", &io::load_sequences, py::arg("path"), py::arg("kind"));
  m.def("parse_sequences", &io::parse_sequences, py::arg("text"), py::arg("kind"));
  m.def("render_sequences", &io::render_sequences, py::arg("sequences"));

#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
