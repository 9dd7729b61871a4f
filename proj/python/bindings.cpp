#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "landis/pipeline.hpp"

namespace py = pybind11;
using namespace landis;

namespace {

template <class T>
py::array_t<T> to_numpy(const GridSpec& s, std::span<const T> v) {
    py::array_t<T> a({s.nodes_y(), s.nodes_x()});
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

template <class T>
std::vector<T> from_numpy(const GridSpec& s, const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(0) != s.nodes_y() || a.shape(1) != s.nodes_x())
        throw GridMismatch("python", "array shape must be (ny + 1, nx + 1)");
    return {a.data(), a.data() + a.size()};
}

py::array_t<double> polyline_array(const Polyline& p) {
    py::array_t<double> a({static_cast<py::ssize_t>(p.size()), py::ssize_t{2}});
    auto m = a.mutable_unchecked<2>();
    for (std::size_t k = 0; k < p.size(); ++k) {
        m(k, 0) = p.vertices[k].x;
        m(k, 1) = p.vertices[k].y;
    }
    return a;
}

} // namespace

PYBIND11_MODULE(_landis, m) {
    m.doc() = "Quasi-geometry, Beltrami reduction and vanishing-order experiments for planar elliptic equations";

    auto base = py::register_exception<Error>(m, "LandisError", PyExc_RuntimeError);
    py::register_exception<HypothesisError>(m, "HypothesisError", base.ptr());
    py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
    py::register_exception<SolverError>(m, "SolverError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<GridMismatch>(m, "GridMismatch", base.ptr());

    py::class_<Point>(m, "Point")
        .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &Point::x)
        .def_readwrite("y", &Point::y);

    py::class_<GridSpec>(m, "GridSpec")
        .def_static("centered", &GridSpec::centered, py::arg("half_width"), py::arg("n"))
        .def_readonly("nx", &GridSpec::nx)
        .def_readonly("ny", &GridSpec::ny)
        .def_readonly("h", &GridSpec::h)
        .def_property_readonly("x", [](const GridSpec& s) {
            py::array_t<double> a(s.nodes_x());
            for (int i = 0; i <= s.nx; ++i)
                a.mutable_at(i) = s.x(i);
            return a;
        })
        .def_property_readonly("y", [](const GridSpec& s) {
            py::array_t<double> a(s.nodes_y());
            for (int j = 0; j <= s.ny; ++j)
                a.mutable_at(j) = s.y(j);
            return a;
        });

    py::class_<ScalarField>(m, "ScalarField")
        .def(py::init([](const GridSpec& s, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
                 return ScalarField(s, from_numpy<double>(s, a));
             }),
             py::arg("spec"), py::arg("values"))
        .def_property_readonly("spec", &ScalarField::spec)
        .def("numpy", [](const ScalarField& f) { return to_numpy<double>(f.spec(), f.values()); })
        .def("sample", &ScalarField::sample)
        .def("max_abs", &ScalarField::max_abs);

    py::class_<ComplexField>(m, "ComplexField")
        .def(py::init([](const GridSpec& s,
                         const py::array_t<Complex, py::array::c_style | py::array::forcecast>& a) {
                 return ComplexField(s, from_numpy<Complex>(s, a));
             }),
             py::arg("spec"), py::arg("values"))
        .def_property_readonly("spec", &ComplexField::spec)
        .def("numpy", [](const ComplexField& f) { return to_numpy<Complex>(f.spec(), f.values()); })
        .def("max_abs", &ComplexField::max_abs);

    py::class_<Mat2>(m, "Mat2")
        .def(py::init<double, double, double>(), py::arg("a11"), py::arg("a12"), py::arg("a22"))
        .def_readwrite("a11", &Mat2::a11)
        .def_readwrite("a12", &Mat2::a12)
        .def_readwrite("a22", &Mat2::a22)
        .def("det", &Mat2::det)
        .def("min_eig", &Mat2::min_eig)
        .def("max_eig", &Mat2::max_eig);

    py::class_<CoefficientFamily>(m, "CoefficientFamily")
        .def_static("identity", &CoefficientFamily::identity)
        .def_static("constant", &CoefficientFamily::constant, py::arg("a"), py::arg("lam"))
        .def_static("trig", &CoefficientFamily::trig, py::arg("lam"), py::arg("mu"), py::arg("seed"),
                    py::arg("det_one") = false)
        .def("__call__", &CoefficientFamily::operator())
        .def_readonly("lam", &CoefficientFamily::lambda)
        .def_readonly("mu", &CoefficientFamily::mu);

    py::class_<CoefficientField>(m, "CoefficientField")
        .def_static("sample", &CoefficientField::sample, py::arg("family"), py::arg("spec"))
        .def_static("identity", &CoefficientField::identity, py::arg("spec"))
        .def_property_readonly("spec", &CoefficientField::spec)
        .def_property_readonly("a11", &CoefficientField::a11)
        .def_property_readonly("a12", &CoefficientField::a12)
        .def_property_readonly("a22", &CoefficientField::a22)
        .def("realized_lambda", &CoefficientField::realized_lambda)
        .def("max_gradient", &CoefficientField::max_gradient);

    py::class_<PotentialFamily>(m, "PotentialFamily")
        .def_static("zero", &PotentialFamily::zero, py::arg("M") = 1.0)
        .def_static("constant", &PotentialFamily::constant, py::arg("M"), py::arg("value"))
        .def_static("random", &PotentialFamily::random, py::arg("M"), py::arg("seed"), py::arg("with_W") = false,
                    py::arg("freq") = 1.0);

    py::class_<PotentialField>(m, "PotentialField")
        .def_static("sample", &PotentialField::sample, py::arg("family"), py::arg("spec"))
        .def_static("zero", &PotentialField::zero, py::arg("spec"), py::arg("M") = 1.0)
        .def_property_readonly("V", &PotentialField::V)
        .def_property_readonly("M", &PotentialField::M)
        .def("has_W", &PotentialField::has_W);

    py::enum_<Variant>(m, "Variant")
        .value("electric", Variant::electric)
        .value("div_magnetic", Variant::div_magnetic)
        .value("nondiv_magnetic", Variant::nondiv_magnetic);

    m.def("solve_dirichlet",
          [](const CoefficientField& A, const PotentialField& P, Variant v, const ScalarField& boundary) {
              return solve_dirichlet(A, P, v, boundary);
          },
          py::arg("A"), py::arg("P"), py::arg("variant"), py::arg("boundary"));
    m.def("apply_operator", &apply_operator, py::arg("A"), py::arg("P"), py::arg("variant"), py::arg("u"));

    py::class_<MultiplierResult>(m, "MultiplierResult")
        .def_readonly("phi", &MultiplierResult::phi)
        .def_readonly("c1", &MultiplierResult::c1)
        .def_readonly("C1", &MultiplierResult::C1)
        .def_readonly("min_phi", &MultiplierResult::min_phi)
        .def_readonly("max_phi", &MultiplierResult::max_phi)
        .def_readonly("envelope_ok", &MultiplierResult::envelope_ok);
    m.def("positive_multiplier",
          [](const CoefficientField& A, const PotentialField& P, Variant v) { return positive_multiplier(A, P, v); },
          py::arg("A"), py::arg("P"), py::arg("variant"));

    m.def("eta_nu", &eta_nu, py::arg("A"));
    m.def("hat_matrix", &hat_matrix, py::arg("alpha"), py::arg("beta"));

    py::class_<FundamentalSolution>(m, "FundamentalSolution")
        .def_readonly("G", &FundamentalSolution::G)
        .def("value", &FundamentalSolution::value)
        .def_property_readonly("closed_form", [](const FundamentalSolution& F) { return bool(F.exact); });
    m.def("fundamental_solution",
          [](const CoefficientField& A, double domain_radius, bool force_numeric) {
              FundamentalSolutionOptions o;
              o.force_numeric = force_numeric;
              return fundamental_solution(A, {0, 0}, domain_radius, o);
          },
          py::arg("A"), py::arg("domain_radius"), py::arg("force_numeric") = false);

    py::class_<QuasiBallAtlas, std::shared_ptr<QuasiBallAtlas>>(m, "QuasiBallAtlas")
        .def(py::init<FundamentalSolution, const std::vector<double>&>(), py::arg("F"), py::arg("radii"))
        .def("sigma_hat", &QuasiBallAtlas::sigma_hat)
        .def("rho_hat", &QuasiBallAtlas::rho_hat)
        .def("nested", &QuasiBallAtlas::nested)
        .def("contains", &QuasiBallAtlas::contains, py::arg("z"), py::arg("s"))
        .def("circle", [](const QuasiBallAtlas& a, double s) { return polyline_array(a.circle(s)); });

    m.def("cauchy_T",
          [](const ComplexField& w, double radius) { return cauchy_T(w, DomainMask(w.spec(), Ball{{0, 0}, radius})); },
          py::arg("omega"), py::arg("radius") = 1.0);
    m.def("beurling_S",
          [](const ComplexField& w, double radius) { return beurling_S(w, DomainMask(w.spec(), Ball{{0, 0}, radius})); },
          py::arg("omega"), py::arg("radius") = 1.0);

    py::class_<ThreeCircle>(m, "ThreeCircle")
        .def_readonly("M1", &ThreeCircle::M1)
        .def_readonly("M2", &ThreeCircle::M2)
        .def_readonly("M3", &ThreeCircle::M3)
        .def_readonly("lhs", &ThreeCircle::lhs)
        .def_readonly("rhs", &ThreeCircle::rhs)
        .def_readonly("theta", &ThreeCircle::theta)
        .def_readonly("rel_defect", &ThreeCircle::rel_defect);
    m.def("three_quasi_circle", &three_quasi_circle, py::arg("f"), py::arg("atlas"), py::arg("s1"), py::arg("s2"),
          py::arg("s3"));

    m.def("extremal_solution",
          [](const CoefficientField& A, const PotentialField& P, Variant v, double b, double d, double C0) {
              return extremal_solution(A, P, v, b, d, C0);
          },
          py::arg("A"), py::arg("P"), py::arg("variant"), py::arg("b"), py::arg("d"), py::arg("C0") = 1.0);

    py::class_<VanishingOrderReport>(m, "VanishingOrderReport")
        .def_readonly("radii", &VanishingOrderReport::radii)
        .def_readonly("sup_ball", &VanishingOrderReport::sup_ball)
        .def_readonly("kappa_hat", &VanishingOrderReport::kappa_hat)
        .def_readonly("kappa_over_sqrtM", &VanishingOrderReport::kappa_over_sqrtM)
        .def_readonly("three_circle", &VanishingOrderReport::three_circle)
        .def_readonly("stages", &VanishingOrderReport::stages)
        .def_readonly("route", &VanishingOrderReport::route);
    m.def("vanishing_order_experiment",
          [](const CoefficientField& A, const PotentialField& P, Variant v, const ScalarField& u,
             std::shared_ptr<QuasiBallAtlas> atlas, double b, double d, double C0) {
              LandisProblem pr{A, P, v, u, atlas, b, d, C0};
              return vanishing_order_experiment(pr);
          },
          py::arg("A"), py::arg("P"), py::arg("variant"), py::arg("u"), py::arg("atlas"), py::arg("b"), py::arg("d"),
          py::arg("C0") = 1.0);

    py::class_<ScanRow>(m, "ScanRow")
        .def_readonly("R", &ScanRow::R)
        .def_readonly("inf_sup", &ScanRow::inf_sup)
        .def_readonly("C_hat", &ScanRow::C_hat);
    py::class_<LandisScan>(m, "LandisScan")
        .def_readonly("rows", &LandisScan::rows)
        .def_readonly("C_envelope", &LandisScan::C_envelope);
    m.def("landis_scan", &landis_scan, py::arg("u"), py::arg("R_list"), py::arg("angles") = 64);

    m.def("loglog_slope", &loglog_slope, py::arg("x"), py::arg("y"));
}
