#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gqc/config.hpp"
#include "gqc/convexity.hpp"
#include "gqc/fields.hpp"
#include "gqc/lsc.hpp"

namespace py = pybind11;
using namespace gqc;

namespace {

Mat mat_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 2 || arr.shape(0) != arr.shape(1))
    throw std::invalid_argument("expected a square 2-d array");
  const int n = static_cast<int>(arr.shape(0));
  Mat m(n);
  auto r = arr.unchecked<2>();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = r(i, j);
  return m;
}

py::array_t<double> mat_to_array(const Mat& m) {
  const int n = m.dim();
  py::array_t<double> arr({n, n});
  auto r = arr.mutable_unchecked<2>();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = m(i, j);
  return arr;
}

Vec vec_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
  const int n = static_cast<int>(arr.shape(0));
  Vec v(n);
  auto r = arr.unchecked<1>();
  for (int i = 0; i < n; ++i) v[i] = r(i);
  return v;
}

py::array_t<double> vec_to_array(const Vec& v) {
  py::array_t<double> arr(v.dim());
  auto r = arr.mutable_unchecked<1>();
  for (int i = 0; i < v.dim(); ++i) r(i) = v[i];
  return arr;
}

py::dict report_to_dict(const CheckReport& rep) {
  py::module_ json = py::module_::import("json");
  return json.attr("loads")(to_json(rep).dump()).cast<py::dict>();
}

}  // namespace

PYBIND11_MODULE(_gqc, m) {
  m.doc() = "Numerical convexity analysis of stored-energy potentials on matrix Lie groups";

  py::class_<Potential>(m, "Potential")
      .def_readonly("name", &Potential::name)
      .def_property_readonly("group", [](const Potential& w) { return w.domain.str(); })
      .def_property_readonly("n", [](const Potential& w) { return w.domain.n; })
      .def("__call__", [](const Potential& w, py::array_t<double> f) {
        return w.eval(mat_from_array(f));
      })
      .def("chart", [](const Potential& w, double x, double y, double z) {
        if (!w.has_chart()) throw std::invalid_argument("potential has no chart form");
        return w.chart_eval(x, y, z);
      })
      .def("__repr__", [](const Potential& w) { return "<Potential " + w.name + ">"; });

  m.def("det", [](py::array_t<double> f) { return det(mat_from_array(f)); });
  m.def("inverse", [](py::array_t<double> f) { return mat_to_array(inverse(mat_from_array(f))); });
  m.def("mat_exp", [](py::array_t<double> h) { return mat_to_array(mat_exp(mat_from_array(h))); });
  m.def("rank_one", [](py::array_t<double> a, py::array_t<double> b) {
    return mat_to_array(rank_one(vec_from_array(a), vec_from_array(b)));
  });
  m.def("polar_svd", [](py::array_t<double> f) {
    const SingularData sd = polar_svd(mat_from_array(f));
    return py::make_tuple(vec_to_array(sd.sigma), mat_to_array(sd.rotation),
                          mat_to_array(sd.stretch));
  },
        "Returns (sigma, rotation, stretch) with F = rotation @ stretch");

  m.def("in_group", [](const std::string& tag, py::array_t<double> f, double tol) {
    const Mat mf = mat_from_array(f);
    return in_group(GroupSpec::parse(tag, mf.dim()), mf, tol);
  },
        py::arg("group"), py::arg("F"), py::arg("tol") = kMembershipTol);
  m.def("in_algebra", [](const std::string& tag, py::array_t<double> h, double tol) {
    const Mat mh = mat_from_array(h);
    return in_algebra(GroupSpec::parse(tag, mh.dim()), mh, tol);
  },
        py::arg("group"), py::arg("H"), py::arg("tol") = kMembershipTol);
  m.def("sample_group_element", [](const std::string& tag, int n, double spread, std::uint64_t seed) {
    Rng rng(seed);
    return mat_to_array(sample_group_element(GroupSpec::parse(tag, n), spread, rng));
  },
        py::arg("group"), py::arg("n"), py::arg("spread") = 0.8, py::arg("seed") = 42);
  m.def("sample_rank_one_cone", [](const std::string& tag, int n, std::uint64_t seed) -> py::object {
    Rng rng(seed);
    const auto pair = sample_rank_one_cone(GroupSpec::parse(tag, n), rng);
    if (!pair) return py::none();
    return py::make_tuple(vec_to_array(pair->a), vec_to_array(pair->b));
  },
        py::arg("group"), py::arg("n"), py::arg("seed") = 42);

  m.def("builtin", &builtin_potential, py::arg("name"), py::arg("n") = 2);
  m.def("involution", &involution);
  m.def("negate", &negate);
  m.def("conjugate", [](const Potential& w, py::array_t<double> u) {
    return conjugate_potential(w, mat_from_array(u));
  });
  m.def("iso_family", [](const std::string& gauge, int n, const std::map<std::string, double>& params) {
    return iso_family(make_gauge(gauge, params), n);
  },
        py::arg("gauge"), py::arg("n") = 2, py::arg("params") = std::map<std::string, double>{});
  m.def("sl2_affine_family", &sl2_affine_family, py::arg("k"), py::arg("b"), py::arg("c"),
        py::arg("e"), py::arg("f"));

  m.def("group_d1", [](const Potential& w, py::array_t<double> f, py::array_t<double> h) {
    return group_d1(w, mat_from_array(f), mat_from_array(h));
  });
  m.def("group_d2", [](const Potential& w, py::array_t<double> f, py::array_t<double> h,
                       py::object p) {
    const Mat mh = mat_from_array(h);
    const Mat mp = p.is_none() ? mh : mat_from_array(p.cast<py::array_t<double>>());
    return group_d2(w, mat_from_array(f), mh, mp);
  },
        py::arg("w"), py::arg("F"), py::arg("H"), py::arg("P") = py::none());

  m.def("check_rank_one_convex", [](const Potential& w, const std::string& tag, long samples,
                                    double tol, std::uint64_t seed) {
    return report_to_dict(check_g_rank_one_convex(w, GroupSpec::parse(tag, w.domain.n), samples,
                                                  tol, seed));
  },
        py::arg("w"), py::arg("group"), py::arg("samples") = 1000, py::arg("tol") = 1e-7,
        py::arg("seed") = 42);
  m.def("check_rank_one_affine", [](const Potential& w, const std::string& tag, long samples,
                                    double tol, std::uint64_t seed) {
    return report_to_dict(check_rank_one_affine(w, GroupSpec::parse(tag, w.domain.n), samples,
                                                tol, seed));
  },
        py::arg("w"), py::arg("group"), py::arg("samples") = 1000, py::arg("tol") = 1e-7,
        py::arg("seed") = 42);
  m.def("check_classical_ellipticity", [](const Potential& w, long samples, double tol,
                                          std::uint64_t seed) {
    return report_to_dict(check_classical_ellipticity(w, samples, tol, seed));
  },
        py::arg("w"), py::arg("samples") = 1000, py::arg("tol") = 1e-7, py::arg("seed") = 42);
  m.def("check_convex_gauge_hypotheses", [](const std::string& gauge, int n, long samples,
                                     std::uint64_t seed,
                                     const std::map<std::string, double>& params) {
    return report_to_dict(check_convex_gauge_hypotheses(make_gauge(gauge, params), n, samples, seed));
  },
        py::arg("gauge"), py::arg("n") = 2, py::arg("samples") = 400, py::arg("seed") = 42,
        py::arg("params") = std::map<std::string, double>{});
  m.def("check_iso_family_hypotheses", [](const std::string& gauge, int n, long samples,
                                     std::uint64_t seed, const std::string& order,
                                     const std::map<std::string, double>& params) {
    return report_to_dict(check_iso_family_hypotheses(make_gauge(gauge, params), n, samples, seed,
                                                 order == "descending" ? SortOrder::descending
                                                                       : SortOrder::ascending));
  },
        py::arg("gauge"), py::arg("n") = 2, py::arg("samples") = 400, py::arg("seed") = 42,
        py::arg("order") = "ascending", py::arg("params") = std::map<std::string, double>{});

  m.def("sl2_system_residual", [](const Potential& w, double x, double y, double z) {
    const auto res = sl2_system_residual(w, x, y, z);
    py::list residuals, scales;
    for (int i = 0; i < 5; ++i) {
      residuals.append(res.residual[static_cast<std::size_t>(i)]);
      scales.append(res.scale[static_cast<std::size_t>(i)]);
    }
    return py::make_tuple(residuals, scales);
  });
  m.def("check_sl_rank_one_condition", [](const Potential& w, py::array_t<double> f,
                                          py::array_t<double> a, py::array_t<double> b) {
    return check_sl_rank_one_condition(w, mat_from_array(f), vec_from_array(a), vec_from_array(b));
  });

  m.def("quasiconvexity_probe", [](const Potential& w, const std::string& tag,
                                   py::array_t<double> f, long budget, double tol,
                                   std::uint64_t seed) {
    return report_to_dict(quasiconvexity_probe(w, GroupSpec::parse(tag, w.domain.n),
                                               mat_from_array(f), ProbeFamily{}, budget, tol,
                                               seed));
  },
        py::arg("w"), py::arg("group"), py::arg("F"), py::arg("budget") = 200,
        py::arg("tol") = 1e-7, py::arg("seed") = 42);

  m.def("lsc_experiment", [](const Potential& w, const std::string& tag, py::array_t<double> f0,
                             const std::vector<double>& scales, double tol) {
    const GroupSpec g = GroupSpec::parse(tag, w.domain.n);
    SequenceSpec spec = SequenceSpec::defaults(g.n);
    if (!scales.empty()) spec.scales = scales;
    const LscReport rep = lsc_experiment(w, mat_from_array(f0), spec, g, tol);
    py::module_ json = py::module_::import("json");
    return json.attr("loads")(to_json(rep).dump());
  },
        py::arg("w"), py::arg("group"), py::arg("F0"), py::arg("scales") = std::vector<double>{},
        py::arg("tol") = 0.0);

  m.def("run_config", [](const std::string& config_json) {
    std::ostringstream log;
    const int code = run_config(nlohmann::json::parse(config_json), RunOverrides{}, log);
    return py::make_tuple(code, log.str());
  },
        "Run a CLI-style config; returns (exit_code, report_text)");

  m.attr("__version__") = "0.1.0";
}
