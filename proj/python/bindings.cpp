#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tfk/checkpoint.hpp"
#include "tfk/commands.hpp"
#include "tfk/error.hpp"
#include "tfk/generators.hpp"
#include "tfk/pdb_io.hpp"
#include "tfk/refinement.hpp"
#include "tfk/run_config.hpp"
#include "tfk/verification.hpp"

namespace py = pybind11;
using namespace tfk;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Positions to_points(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw Error("expected an (N, 3) array");
  Positions p(a.shape(0));
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) p[i] = Eigen::Vector3d(r(i, 0), r(i, 1), r(i, 2));
  return p;
}

Array from_points(const Positions& p) {
  Array out({static_cast<py::ssize_t>(p.size()), py::ssize_t{3}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < p.size(); ++i)
    for (int c = 0; c < 3; ++c) w(i, c) = p[i][c];
  return out;
}

AtomSystem system_of(const Array& positions, const std::vector<std::string>& elements) {
  return make_system("python", to_points(positions), elements);
}

Rotation rotation_of(const Eigen::Matrix3d& m) { return Rotation(m, 1e-8); }

ModelConfig model_config(int max_order, std::uint64_t seed, const std::vector<std::string>& vocabulary, int neighbors,
                         double output_scale) {
  ModelConfig c;
  c.max_order = max_order;
  c.seed = seed;
  if (!vocabulary.empty()) c.vocabulary = vocabulary;
  c.neighbors = neighbors;
  c.output_scale = output_scale;
  return c;
}

}  // namespace

PYBIND11_MODULE(_tfk, m) {
  m.doc() = "C++ core of the tfk package";
  py::register_exception<Error>(m, "TfkError", PyExc_ValueError);

  m.def("real_spherical_harmonics", &real_spherical_harmonics, py::arg("l"), py::arg("direction"),
        "Real orthonormal spherical harmonics Y_l(u), m = -l..l.");
  m.def(
      "wigner_matrix", [](int l, const Eigen::Matrix3d& r) { return wigner_matrix(l, rotation_of(r)); }, py::arg("l"),
      py::arg("rotation"), "Real Wigner matrix with Y_l(R u) = D(R) Y_l(u).");
  m.def(
      "clebsch_gordan",
      [](int l1, int l2, int l3) {
        const CGTensor& c = clebsch_gordan(l1, l2, l3);
        py::array_t<double> out({2 * l1 + 1, 2 * l2 + 1, 2 * l3 + 1});
        auto w = out.mutable_unchecked<3>();
        for (int a = 0; a <= 2 * l1; ++a)
          for (int b = 0; b <= 2 * l2; ++b)
            for (int d = 0; d <= 2 * l3; ++d) w(a, b, d) = c(a, b, d);
        return out;
      },
      py::arg("l1"), py::arg("l2"), py::arg("l3"), "Coupling tensor C[m1, m2, m3] for l1 x l2 -> l3.");
  m.def(
      "random_rotation", [](std::uint64_t seed) { return random_rotation(seed).matrix(); }, py::arg("seed"));

  m.def(
      "k_nearest", [](const Array& points, int query, int k) { return k_nearest(to_points(points), query, k); },
      py::arg("points"), py::arg("query"), py::arg("k"));
  m.def(
      "kabsch_align",
      [](const Array& mobile, const Array& target) {
        const Superposition s = kabsch_align(to_points(mobile), to_points(target));
        return py::make_tuple(s.transform.rotation.matrix(), Eigen::Vector3d(s.transform.translation), s.degenerate);
      },
      py::arg("mobile"), py::arg("target"), "Returns (R, t, degenerate) minimizing |R mobile + t - target|.");
  m.def(
      "refinement_field",
      [](const Array& candidate, const Array& target, const std::vector<std::string>& elements, int k) {
        const StructurePair pair{system_of(candidate, elements), system_of(target, elements)};
        const RefinementField f = refinement_field(pair, k);
        return py::make_tuple(from_points(f.vectors), std::vector<bool>(f.degenerate.begin(), f.degenerate.end()));
      },
      py::arg("candidate"), py::arg("target"), py::arg("elements"), py::arg("k") = 50);
  m.def(
      "lj_forces",
      [](const Array& positions, const std::vector<std::string>& elements) {
        return from_points(lj_forces(to_points(positions), elements, LJParams{}));
      },
      py::arg("positions"), py::arg("elements"), "Mixed-element Lennard-Jones forces in meV/A.");

  m.def(
      "read_structure",
      [](const std::string& path) {
        const AtomSystem s = read_structure_file(path);
        return py::make_tuple(from_points(s.positions), s.elements);
      },
      py::arg("path"), "Returns (positions, elements).");
  m.def(
      "write_structure",
      [](const std::string& path, const Array& positions, const std::vector<std::string>& elements) {
        write_structure_file(path, system_of(positions, elements));
      },
      py::arg("path"), py::arg("positions"), py::arg("elements"));

  py::class_<Model>(m, "Model")
      .def(py::init([](int max_order, std::uint64_t seed, const std::vector<std::string>& vocabulary, int neighbors,
                       double output_scale) {
             return Model(model_config(max_order, seed, vocabulary, neighbors, output_scale));
           }),
           py::arg("max_order") = 1, py::arg("seed") = 0, py::arg("vocabulary") = std::vector<std::string>{},
           py::arg("neighbors") = 50, py::arg("output_scale") = 1.0)
      .def_static(
          "load", [](const std::string& path) { return std::move(*load_checkpoint(path).model); }, py::arg("path"))
      .def(
          "save", [](const Model& self, const std::string& path) { save_checkpoint(path, self); }, py::arg("path"))
      .def_property_readonly("max_order", [](const Model& self) { return self.config().max_order; })
      .def_property_readonly("vocabulary", [](const Model& self) { return self.config().vocabulary; })
      .def_property_readonly("parameter_count",
                             [](const Model& self) { return self.parameters().total_size(); })
      .def(
          "predict",
          [](const Model& self, const Array& positions, const std::vector<std::string>& elements) -> py::object {
            const Prediction p = self.forward(system_of(positions, elements));
            if (self.config().output_order() == 1) return from_points(p.vectors);
            return py::array_t<double>(static_cast<py::ssize_t>(p.scalars.size()), p.scalars.data());
          },
          py::arg("positions"), py::arg("elements"),
          "Per-atom vectors (N, 3) for vector models, magnitudes (N,) for max_order 0.");

  m.def(
      "verify",
      [](const std::string& level, std::uint64_t seed, bool inject_fault) {
        VerificationSettings s = verification_level(level);
        s.seed = seed;
        s.inject_fault = inject_fault;
        const VerificationReport r = run_verification(s);
        py::list checks;
        for (const auto& c : r.checks) checks.append(py::make_tuple(c.name, c.passed, c.value, c.threshold));
        return py::make_tuple(r.passed(), checks);
      },
      py::arg("level") = "quick", py::arg("seed") = 0, py::arg("inject_fault") = false,
      "Runs the verification suite; returns (passed, [(name, passed, value, threshold)]).");

  m.def(
      "run_command",
      [](const std::string& command, const std::map<std::string, std::string>& options) {
        RunConfig config;
        for (const auto& [k, v] : options) config.set(k, v);
        std::ostringstream log;
        int code = 0;
        {
          py::gil_scoped_release release;
          if (command == "generate") code = cmd_generate(config, log);
          else if (command == "train") code = cmd_train(config, log);
          else if (command == "eval") code = cmd_eval(config, log);
          else if (command == "refine") code = cmd_refine(config, log);
          else if (command == "verify") code = cmd_verify(config, log);
          else throw Error("unknown command '" + command + "'");
        }
        return py::make_tuple(code, log.str());
      },
      py::arg("command"), py::arg("options") = std::map<std::string, std::string>{},
      "Runs a CLI subcommand in-process; returns (exit_code, log).");
}
