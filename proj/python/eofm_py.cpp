#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "eofm/config.hpp"
#include "eofm/elasticity.hpp"
#include "eofm/error.hpp"
#include "eofm/evaluation.hpp"
#include "eofm/phantom.hpp"
#include "eofm/pipeline.hpp"
#include "eofm/sparse.hpp"
#include "eofm/speckle_tracker.hpp"
#include "eofm/version.hpp"

namespace py = pybind11;
using namespace eofm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Images are (height, width) arrays; fields are (2, height, width) with u1 first.
ScalarField to_scalar(const Array& a, double spacing = 1.0) {
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-D (height, width) array");
  const GridGeometry g(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), spacing);
  return ScalarField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

VectorField to_vector(const Array& a, double spacing = 1.0) {
  if (a.ndim() != 3 || a.shape(0) != 2) throw InvalidArgument("expected a (2, height, width) array");
  const GridGeometry g(static_cast<int>(a.shape(2)), static_cast<int>(a.shape(1)), spacing);
  const auto n = g.size();
  return VectorField(g, std::vector<double>(a.data(), a.data() + n),
                     std::vector<double>(a.data() + n, a.data() + 2 * n));
}

Array from_scalar(const ScalarField& f) {
  Array out({f.height(), f.width()});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

Array from_vector(const VectorField& f) {
  Array out({2, f.height(), f.width()});
  auto* p = out.mutable_data();
  std::copy(f.u1().begin(), f.u1().end(), p);
  std::copy(f.u2().begin(), f.u2().end(), p + f.size());
  return out;
}

// Bubbles as an (n, 6) array: cx, cy, ux, uy, weight, score.
Array from_bubbles(const std::vector<Bubble>& bubbles) {
  Array out({static_cast<py::ssize_t>(bubbles.size()), py::ssize_t{6}});
  auto* p = out.mutable_data();
  for (const auto& b : bubbles) {
    *p++ = b.center[0];
    *p++ = b.center[1];
    *p++ = b.motion[0];
    *p++ = b.motion[1];
    *p++ = b.weight;
    *p++ = b.match_score;
  }
  return out;
}

std::vector<Bubble> to_bubbles(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) < 4) {
    throw InvalidArgument("bubbles must be an (n, 4+) array of cx, cy, ux, uy[, weight, score]");
  }
  std::vector<Bubble> out(static_cast<std::size_t>(a.shape(0)));
  const auto cols = a.shape(1);
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    const double* r = a.data() + i * cols;
    auto& b = out[static_cast<std::size_t>(i)];
    b.center = {r[0], r[1]};
    b.motion = {r[2], r[3]};
    if (cols > 4) b.weight = r[4];
    if (cols > 5) b.match_score = r[5];
  }
  return out;
}

py::dict report_dict(const ErrorReport& r) {
  py::dict d;
  d["e_rel_u"] = r.e_rel_u;
  d["e_rel_u1"] = r.e_rel_u1;
  d["e_rel_u2"] = r.e_rel_u2;
  d["max_abs_u1"] = r.max_abs_u1;
  d["max_abs_u2"] = r.max_abs_u2;
  d["abs_map_u1"] = from_scalar(r.abs_map_u1);
  d["abs_map_u2"] = from_scalar(r.abs_map_u2);
  return d;
}

}  // namespace

PYBIND11_MODULE(_eofm, m) {
  m.doc() = "Elastographic optical flow: phantoms, speckle tracking and displacement estimation";
  m.attr("__version__") = kVersion;

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<NumericalError>(m, "NumericalError", error.ptr());

  py::enum_<BcMode>(m, "BcMode")
      .value("natural", BcMode::natural)
      .value("dirichlet_hard", BcMode::dirichlet_hard)
      .value("dirichlet_weak", BcMode::dirichlet_weak);

  py::class_<PhantomSpec>(m, "PhantomSpec")
      .def(py::init<>())
      .def_property(
          "width", [](const PhantomSpec& s) { return s.geometry.width; },
          [](PhantomSpec& s, int w) { s.geometry = GridGeometry(w, s.geometry.height, s.geometry.spacing); })
      .def_property(
          "height", [](const PhantomSpec& s) { return s.geometry.height; },
          [](PhantomSpec& s, int h) { s.geometry = GridGeometry(s.geometry.width, h, s.geometry.spacing); })
      .def_readwrite("inclusion_center", &PhantomSpec::inclusion_center)
      .def_readwrite("inclusion_radius", &PhantomSpec::inclusion_radius)
      .def_readwrite("stiffness_ratio", &PhantomSpec::stiffness_ratio)
      .def_readwrite("n_bubbles", &PhantomSpec::n_bubbles)
      .def_readwrite("bubble_radius_range", &PhantomSpec::bubble_radius_range)
      .def_readwrite("compression", &PhantomSpec::compression)
      .def_readwrite("seed", &PhantomSpec::seed)
      .def_readwrite("speckle_mean", &PhantomSpec::speckle_mean)
      .def_readwrite("speckle_contrast", &PhantomSpec::speckle_contrast)
      .def_readwrite("speckle_blur", &PhantomSpec::speckle_blur)
      .def_readwrite("bubble_intensity", &PhantomSpec::bubble_intensity);

  py::class_<PipelineOptions>(m, "PipelineOptions")
      .def(py::init<>())
      .def_property(
          "alpha", [](const PipelineOptions& o) { return o.solver.alpha; },
          [](PipelineOptions& o, double v) { o.solver.alpha = v; })
      .def_property(
          "beta", [](const PipelineOptions& o) { return o.solver.beta; },
          [](PipelineOptions& o, double v) { o.solver.beta = v; })
      .def_property(
          "sigma", [](const PipelineOptions& o) { return o.solver.sigma; },
          [](PipelineOptions& o, double v) { o.solver.sigma = v; })
      .def_property(
          "bc_mode", [](const PipelineOptions& o) { return o.solver.bc_mode; },
          [](PipelineOptions& o, BcMode v) { o.solver.bc_mode = v; })
      .def_readwrite("levels", &PipelineOptions::levels)
      .def_readwrite("use_background", &PipelineOptions::use_background)
      .def_property(
          "compression",
          [](const PipelineOptions& o) {
            for (const auto& s : o.boundary.segments()) {
              if (s.edge == Edge::bottom) return -s.value[1];
            }
            return 0.0;
          },
          [](PipelineOptions& o, double c) { o.boundary = BoundarySpec::compression(c); })
      .def_property(
          "poisson", [](const PipelineOptions& o) { return o.material.poisson_ratio(); },
          [](PipelineOptions& o, double nu) {
            o.material = MaterialParams::from_young_poisson(o.material.young_modulus(), nu);
          });

  m.def(
      "load_config",
      [](const std::string& text, const std::vector<std::string>& overrides) {
        auto file = ConfigFile::parse(text);
        for (const auto& o : overrides) file.set_override(o);
        const auto cfg = make_experiment_config(file);
        return py::make_tuple(cfg.phantom, cfg.pipeline);
      },
      py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{},
      "Parses config text plus section.key=value overrides into (PhantomSpec, PipelineOptions).");
  m.def("default_config_text", &default_config_text);
  m.def("set_thread_count", &set_thread_count, py::arg("threads"));

  m.def(
      "generate_phantom",
      [](const PhantomSpec& spec, double poisson) {
        const auto ph = generate_phantom(spec, MaterialParams::from_young_poisson(1.0, poisson));
        py::dict d;
        d["frame0"] = from_scalar(ph.pair.frame0);
        d["frame1"] = from_scalar(ph.pair.frame1);
        d["truth"] = from_vector(ph.truth);
        d["bubbles"] = from_bubbles(ph.seeded_bubbles);
        d["stiffness"] = from_scalar(ph.stiffness);
        return d;
      },
      py::arg("spec") = PhantomSpec{}, py::arg("poisson") = 0.45);

  m.def(
      "detect_bubbles",
      [](const Array& image, int min_area, int max_area, double threshold) {
        return from_bubbles(detect_bubbles(to_scalar(image), min_area, max_area, threshold));
      },
      py::arg("image"), py::arg("min_area") = 9, py::arg("max_area") = 100, py::arg("threshold") = 0.5);

  m.def(
      "track_bubbles",
      [](const Array& frame0, const Array& frame1, const Array& bubbles, int patch_radius,
         int search_radius, double accept_score) {
        const ImagePair pair(to_scalar(frame0), to_scalar(frame1));
        return from_bubbles(
            track_bubbles(pair, to_bubbles(bubbles), patch_radius, search_radius, accept_score));
      },
      py::arg("frame0"), py::arg("frame1"), py::arg("bubbles"), py::arg("patch_radius") = 10,
      py::arg("search_radius") = 15, py::arg("accept_score") = 0.6);

  m.def(
      "solve_background",
      [](int width, int height, double compression, double poisson) {
        return from_vector(solve_background(GridGeometry(width, height),
                                            MaterialParams::from_young_poisson(1.0, poisson),
                                            BoundarySpec::compression(compression)));
      },
      py::arg("width"), py::arg("height"), py::arg("compression") = 8.0, py::arg("poisson") = 0.45);

  m.def(
      "run_eofm",
      [](const Array& frame0, const Array& frame1, const PipelineOptions& options,
         const std::optional<Array>& bubbles) {
        const ImagePair pair(to_scalar(frame0), to_scalar(frame1));
        std::optional<std::vector<Bubble>> supplied;
        if (bubbles) supplied = to_bubbles(*bubbles);
        PipelineResult result;
        {
          py::gil_scoped_release release;
          result = run_eofm(pair, options, supplied);
        }
        py::dict d;
        d["estimate"] = from_vector(result.estimate);
        d["bubbles"] = from_bubbles(result.bubbles);
        d["background"] = result.background ? py::object(from_vector(*result.background)) : py::none();
        return d;
      },
      py::arg("frame0"), py::arg("frame1"), py::arg("options") = PipelineOptions{},
      py::arg("bubbles") = py::none());

  m.def(
      "compare", [](const Array& estimate, const Array& truth) {
        return report_dict(compare(to_vector(estimate), to_vector(truth)));
      },
      py::arg("estimate"), py::arg("truth"));

  m.def(
      "run_ablation",
      [](const PhantomSpec& spec, PipelineOptions options) {
        options.boundary = BoundarySpec::compression(spec.compression);
        std::vector<AblationRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_ablation(generate_phantom(spec, options.material, options.boundary), options);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["test"] = r.test.number;
          d["multiscale"] = r.test.multiscale;
          d["background"] = r.test.background;
          d["beta"] = r.test.beta;
          d["e_rel_u"] = r.report.e_rel_u;
          d["e_rel_u1"] = r.report.e_rel_u1;
          d["e_rel_u2"] = r.report.e_rel_u2;
          out.append(d);
        }
        return out;
      },
      py::arg("spec") = PhantomSpec{}, py::arg("options") = PipelineOptions{},
      "Five-test ablation; the compression is taken from the phantom spec.");
}
