#include "qfeat/bounds.hpp"
#include "qfeat/error.hpp"
#include "qfeat/featuremaps.hpp"
#include "qfeat/grids.hpp"
#include "qfeat/harness.hpp"
#include "qfeat/kernels.hpp"
#include "qfeat/quad1d.hpp"
#include "qfeat/solvers.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace qfeat;

namespace {

std::vector<double> to_vec(const Eigen::Ref<const Vector>& v) { return {v.data(), v.data() + v.size()}; }

PairSet make_pairs(const RowMatrix& x, const RowMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw ArgumentError("pairs: x and y must have the same shape");
  return {x, y};
}

py::int_ big(const BigInt& v) { return py::int_(py::str(v.str())); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quadrature-based feature maps (C++ core)";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<SizeError>(m, "SizeError", error.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", error.ptr());
  py::register_exception<ContractError>(m, "ContractError", error.ptr());
  py::register_exception<UnsupportedEmbedding>(m, "UnsupportedEmbedding", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<ConstructionFailed>(m, "ConstructionFailed", error.ptr());

  m.def(
      "gauss_hermite",
      [](std::size_t L) {
        const auto r = gauss_hermite(L);
        return py::make_tuple(Vector(Vector::Map(r.nodes().data(), L)), Vector(Vector::Map(r.weights().data(), L)));
      },
      py::arg("L"), "Nodes and weights of the L-point rule for the standard normal density.");

  py::class_<GridQuadrature>(m, "GridQuadrature")
      .def(py::init<RowMatrix, Vector, std::string>(), py::arg("points"), py::arg("weights"),
           py::arg("provenance") = "")
      .def_property_readonly("points", &GridQuadrature::points)
      .def_property_readonly("weights", &GridQuadrature::weights)
      .def_property_readonly("dim", &GridQuadrature::dim)
      .def_property_readonly("count", &GridQuadrature::count)
      .def_property_readonly("nonnegative", &GridQuadrature::nonnegative)
      .def_property_readonly("provenance", &GridQuadrature::provenance)
      .def("weight_sum", &GridQuadrature::weight_sum)
      .def("to_json", [](const GridQuadrature& g) { return grid_to_json(g); })
      .def_static("from_json", &grid_from_json)
      .def("__len__", &GridQuadrature::count);

  m.def("dense_grid", &dense_grid, py::arg("L"), py::arg("d"), py::arg("cap") = kDefaultPointCap);
  m.def("sparse_grid", &sparse_grid, py::arg("level"), py::arg("d"), py::arg("cap") = kDefaultPointCap);
  m.def("subsample_grid", &subsample_grid, py::arg("grid"), py::arg("draws"), py::arg("seed"));
  m.def("subsample_dense", &subsample_dense, py::arg("L"), py::arg("d"), py::arg("draws"), py::arg("seed"));
  m.def("exactness_residual", &exactness_residual, py::arg("grid"), py::arg("R"),
        py::arg("cap") = kDefaultConstraintCap);

  m.def(
      "nnls",
      [](const Eigen::MatrixXd& M, const Vector& b, double tol, double l1_shift) {
        NnlsOptions o;
        o.tol = tol;
        o.l1_shift = l1_shift;
        const auto s = nnls(M, b, o);
        py::dict out;
        out["a"] = s.a;
        out["residual_norm"] = s.residual_norm;
        out["active_set"] = s.active_set;
        out["iterations"] = s.iterations;
        out["objective_log"] = s.objective_log;
        return out;
      },
      py::arg("M"), py::arg("b"), py::arg("tol") = 1e-10, py::arg("l1_shift") = 0.0);

  m.def(
      "construct_poly_exact",
      [](std::size_t d, std::size_t R, std::size_t candidates, Seed seed, double tol) {
        PolyExactOptions o;
        o.exactness_tol = tol;
        return construct_poly_exact(d, R, candidates, seed, o);
      },
      py::arg("d"), py::arg("R"), py::arg("candidates"), py::arg("seed"), py::arg("exactness_tol") = 1e-8);
  m.def(
      "reweight",
      [](const GridQuadrature& cand, const RowMatrix& x, const RowMatrix& y, double gamma, double lambda) {
        return reweight(cand, make_pairs(x, y), GaussianKernel(gamma), lambda);
      },
      py::arg("candidates"), py::arg("x"), py::arg("y"), py::arg("gamma"), py::arg("lam"));
  m.def(
      "bisect_lambda",
      [](const GridQuadrature& cand, const RowMatrix& x, const RowMatrix& y, double gamma, std::size_t target_D,
         std::size_t iterations) {
        auto r = bisect_lambda(cand, make_pairs(x, y), GaussianKernel(gamma), target_D, 0.0, iterations);
        return py::make_tuple(r.lambda, r.grid);
      },
      py::arg("candidates"), py::arg("x"), py::arg("y"), py::arg("gamma"), py::arg("target_D"),
      py::arg("iterations") = 30);

  m.def(
      "eval_gaussian",
      [](const Eigen::Ref<const Vector>& u, double gamma) { return eval_gaussian(GaussianKernel(gamma), to_vec(u)); },
      py::arg("u"), py::arg("gamma") = 0.5);

  py::class_<AnovaKernel>(m, "AnovaKernel")
      .def(py::init([](std::size_t d, std::vector<std::vector<std::size_t>> subsets, double gamma) {
             return AnovaKernel(d, std::move(subsets), GaussianKernel(gamma));
           }),
           py::arg("d"), py::arg("subsets"), py::arg("gamma") = 0.5, "Subsets use 0-based indices.")
      .def_static("from_json", &anova_from_json)
      .def("to_json", &anova_to_json)
      .def_property_readonly("subsets", &AnovaKernel::subsets)
      .def_property_readonly("dim", &AnovaKernel::dim)
      .def("stats", [](const AnovaKernel& k) {
        const auto s = k.stats();
        return py::make_tuple(s.rank, s.degree, s.size);
      });
  m.def(
      "eval_anova",
      [](const AnovaKernel& k, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
        return eval_anova(k, to_vec(x), to_vec(y));
      },
      py::arg("kernel"), py::arg("x"), py::arg("y"));

  py::class_<FeatureMap>(m, "FeatureMap")
      .def(py::init([](const GridQuadrature& g, const std::string& method, double gamma) {
             return FeatureMap(g, parse_method(method), gamma);
           }),
           py::arg("grid"), py::arg("method"), py::arg("gamma") = 0.5)
      .def_property_readonly("grid", &FeatureMap::grid)
      .def_property_readonly("method", [](const FeatureMap& f) { return std::string(method_name(f.method())); })
      .def_property_readonly("gamma", &FeatureMap::gamma)
      .def_property_readonly("dim", &FeatureMap::dim)
      .def_property_readonly("count", &FeatureMap::count)
      .def_property_readonly("frequencies", &FeatureMap::frequencies)
      .def(
          "approx_kernel",
          [](const FeatureMap& f, const Eigen::Ref<const Vector>& x, std::optional<Vector> y) {
            return y ? f.approx_kernel(to_vec(x), to_vec(*y)) : f.approx_kernel(to_vec(x));
          },
          py::arg("x"), py::arg("y") = py::none(), "k~(x - y), or k~(u) when only one vector is given.")
      .def("embed", [](const FeatureMap& f, const RowMatrix& X) { return f.embed(X); }, py::arg("X"))
      .def("to_json", [](const FeatureMap& f) { return feature_map_to_json(f); });
  m.def("feature_map_from_json", &feature_map_from_json, py::arg("text"));

  m.def("rff", &rff, py::arg("d"), py::arg("D"), py::arg("gamma"), py::arg("seed"));
  m.def("qmc_halton", &qmc_halton, py::arg("d"), py::arg("D"), py::arg("gamma"));
  m.def(
      "embed_grid_fast",
      [](const FeatureMap& f, const RowMatrix& X) {
        auto r = embed_grid_fast(f, X);
        return py::make_tuple(std::move(r.features), r.used_fast);
      },
      py::arg("fm"), py::arg("X"));

  m.def("poly_bound", &poly_bound, py::arg("b"), py::arg("M"), py::arg("R"));
  m.def("sparse_bound", &sparse_bound, py::arg("b"), py::arg("M"), py::arg("A"), py::arg("d"));
  m.def(
      "counts",
      [](std::size_t d, std::size_t R, std::size_t A, std::size_t L) {
        const auto c = counts(d, R, A, L);
        return py::make_tuple(big(c.poly_constraints), big(c.dense_points), big(c.sparse_point_bound));
      },
      py::arg("d"), py::arg("R"), py::arg("A"), py::arg("L"));

  m.def(
      "max_error_empirical",
      [](const FeatureMap& f, double M, std::size_t n, Seed seed) {
        return max_error_empirical(f, GaussianKernel(f.gamma()), M, n, seed);
      },
      py::arg("fm"), py::arg("M"), py::arg("n"), py::arg("seed"));
  m.def(
      "error_curve",
      [](const FeatureMap& f, const std::vector<double>& diameters, std::size_t n, Seed seed) {
        py::list out;
        for (const auto& e : error_curve(f, GaussianKernel(f.gamma()), diameters, n, seed))
          out.append(py::make_tuple(e.M, e.max_err, e.rms_err));
        return out;
      },
      py::arg("fm"), py::arg("diameters"), py::arg("n"), py::arg("seed"));
  m.def(
      "sweep", [](const std::string& config) { return reports_to_csv(sweep(parse_sweep_config(config))); },
      py::arg("config_json"), "Runs a sweep configuration and returns the CSV report.");
}
