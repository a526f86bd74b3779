#include "kpl/baselines.hpp"
#include "kpl/datasets.hpp"
#include "kpl/dictionary_learning.hpp"
#include "kpl/errors.hpp"
#include "kpl/iterative.hpp"
#include "kpl/model_io.hpp"
#include "kpl/ridge.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace kpl;

namespace {

// Samples cross the boundary as (inputs, locations, values): inputs is an
// n x p array (vector inputs) or a list of 2-D arrays (matrix inputs).
std::vector<InputPoint> to_inputs(const py::object& x) {
  std::vector<InputPoint> out;
  if (py::isinstance<py::list>(x) || py::isinstance<py::tuple>(x)) {
    for (const auto& item : x) out.emplace_back(item.cast<Eigen::MatrixXd>());
    return out;
  }
  const auto X = x.cast<Eigen::MatrixXd>();
  for (Eigen::Index i = 0; i < X.rows(); ++i) out.emplace_back(Eigen::VectorXd(X.row(i).transpose()));
  return out;
}

PartialSample to_sample(const py::object& x, const std::vector<Eigen::VectorXd>& locations,
                        const std::vector<Eigen::VectorXd>& values) {
  if (locations.size() != values.size()) throw InvalidArgument("locations and values differ in length");
  std::vector<SampledFunction> y;
  for (std::size_t i = 0; i < locations.size(); ++i) y.emplace_back(locations[i], values[i]);
  PartialSample s(to_inputs(x), std::move(y));
  s.validate();
  return s;
}

py::tuple from_sample(const PartialSample& s) {
  std::vector<Eigen::VectorXd> loc, val;
  py::list inputs;
  for (std::size_t i = 0; i < s.size(); ++i) {
    loc.push_back(s.outputs[i].locations());
    val.push_back(s.outputs[i].values());
    inputs.append(s.inputs[i].is_matrix() ? py::cast(s.inputs[i].data())
                                          : py::cast(Eigen::VectorXd(s.inputs[i].data().reshaped())));
  }
  return py::make_tuple(inputs, loc, val);
}

InputPoint to_input(const py::object& x) {
  const auto m = x.cast<Eigen::MatrixXd>();
  if (m.cols() == 1) return InputPoint(Eigen::VectorXd(m.col(0)));
  return InputPoint(m);
}

}  // namespace

PYBIND11_MODULE(_kpl, m) {
  m.doc() = "Kernel projection learning for function-valued outputs";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<OutOfRange>(m, "OutOfRange", PyExc_IndexError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_MemoryError);

  py::class_<Quadrature>(m, "Quadrature")
      .def_static("trapezoidal", &Quadrature::trapezoidal, py::arg("nodes"))
      .def_static("mean_weights", &Quadrature::mean_weights, py::arg("nodes"))
      .def_static("uniform", &Quadrature::uniform, py::arg("m"))
      .def_property_readonly("nodes", &Quadrature::nodes)
      .def_property_readonly("weights", &Quadrature::weights);

  py::class_<Dictionary>(m, "Dictionary")
      .def_property_readonly("size", &Dictionary::size)
      .def_property_readonly("family", [](const Dictionary& d) { return to_string(d.family()); })
      .def("evaluate", py::overload_cast<const Eigen::VectorXd&>(&Dictionary::evaluate, py::const_), py::arg("thetas"),
           "m x d matrix of atom values")
      .def("__len__", &Dictionary::size);

  m.def("make_fourier", &make_fourier, py::arg("frequencies"));
  m.def("make_wavelet", &make_wavelet, py::arg("vanishing_moments"), py::arg("levels"));
  m.def("make_rff", &make_rff, py::arg("lengthscale"), py::arg("d"), py::arg("seed"));
  m.def("make_learned", &make_learned, py::arg("grid"), py::arg("atoms"));
  m.def("gram", [](const Dictionary& d, const Quadrature& q) { return gram(d, q).matrix; });

  py::class_<RieszBounds>(m, "RieszBounds")
      .def_readonly("c_lower", &RieszBounds::c_lower)
      .def_readonly("c_upper", &RieszBounds::c_upper)
      .def_readonly("u_lower", &RieszBounds::u_lower)
      .def_readonly("u_upper", &RieszBounds::u_upper);
  m.def("riesz_bounds", &riesz_bounds, py::arg("dictionary"), py::arg("quadrature"));

  py::class_<ScalarKernel>(m, "ScalarKernel")
      .def_static("gaussian", &ScalarKernel::gaussian, py::arg("sigma"))
      .def_static("laplace", &ScalarKernel::laplace, py::arg("sigma"))
      .def_static("integral_gaussian", &ScalarKernel::integral_gaussian, py::arg("sigma"))
      .def_readonly("sigma", &ScalarKernel::sigma);

  py::class_<OutputStructure>(m, "OutputStructure")
      .def_static("identity", &OutputStructure::identity)
      .def_static("diagonal_scale", &OutputStructure::diagonal_scale, py::arg("b"));

  py::class_<GroundLoss>(m, "GroundLoss")
      .def_static("square", &GroundLoss::square)
      .def_static("logcosh", &GroundLoss::logcosh, py::arg("gamma"))
      .def("value", &GroundLoss::value)
      .def("deriv_second", &GroundLoss::deriv_second);

  py::class_<IterativeOptions>(m, "IterativeOptions")
      .def(py::init<>())
      .def_readwrite("tol", &IterativeOptions::tol)
      .def_readwrite("max_iter", &IterativeOptions::max_iter)
      .def_readwrite("history", &IterativeOptions::history);

  m.def("kernel_matrix", [](const ScalarKernel& k, const py::object& x) { return kernel_matrix(k, to_inputs(x)); });
  m.def("solve_stein",
        [](Eigen::MatrixXd K, Eigen::MatrixXd G, Eigen::MatrixXd B, Eigen::MatrixXd rhs, double n_lambda) {
          return solve_stein({std::move(K), std::move(G), std::move(B), std::move(rhs), n_lambda});
        },
        py::arg("K"), py::arg("G"), py::arg("B"), py::arg("rhs"), py::arg("n_lambda"),
        "Solves G B alpha K + n_lambda alpha = rhs");
  m.def("solve_multi_lambda",
        [](const Eigen::MatrixXd& K, const Eigen::MatrixXd& G, const Eigen::MatrixXd& B, const Eigen::MatrixXd& rhs,
           const std::vector<double>& lambdas) { return solve_multi_lambda(K, G, B, rhs, lambdas); },
        py::arg("K"), py::arg("G"), py::arg("B"), py::arg("rhs"), py::arg("lambdas"));

  py::class_<KplModel>(m, "Model")
      .def_readonly("alpha", &KplModel::alpha)
      .def_readonly("B", &KplModel::B)
      .def_readonly("lambda_", &KplModel::lambda)
      .def_readonly("dictionary", &KplModel::dictionary)
      .def("predict",
           [](const KplModel& model, const py::object& x, const Eigen::VectorXd& targets) {
             return predict(model, to_input(x), targets).values();
           },
           py::arg("x"), py::arg("targets"))
      .def("coefficients", [](const KplModel& model, const py::object& x) {
        return predict_coefficients(model, to_input(x));
      });

  m.def("fit_ridge_plugin",
        [](const py::object& x, const std::vector<Eigen::VectorXd>& loc, const std::vector<Eigen::VectorXd>& val,
           const Dictionary& dict, const ScalarKernel& kernel, const OutputStructure& b, const Quadrature& q,
           double lambda) { return fit_ridge_plugin(to_sample(x, loc, val), dict, kernel, b, q, lambda); },
        py::arg("inputs"), py::arg("locations"), py::arg("values"), py::arg("dictionary"), py::arg("kernel"),
        py::arg("output_structure"), py::arg("quadrature"), py::arg("lam"));
  m.def("fit_ridge_persample_gram",
        [](const py::object& x, const std::vector<Eigen::VectorXd>& loc, const std::vector<Eigen::VectorXd>& val,
           const Dictionary& dict, const ScalarKernel& kernel, const OutputStructure& b, double lambda) {
          return fit_ridge_persample_gram(to_sample(x, loc, val), dict, kernel, b, lambda);
        },
        py::arg("inputs"), py::arg("locations"), py::arg("values"), py::arg("dictionary"), py::arg("kernel"),
        py::arg("output_structure"), py::arg("lam"));
  m.def("fit_iterative",
        [](const py::object& x, const std::vector<Eigen::VectorXd>& loc, const std::vector<Eigen::VectorXd>& val,
           const Dictionary& dict, const ScalarKernel& kernel, const OutputStructure& b, double lambda,
           const GroundLoss& loss, const IterativeOptions& opts, const std::optional<Quadrature>& q) {
          IterativeResult r = fit_iterative(to_sample(x, loc, val), dict, kernel, b, lambda, loss, opts, q);
          py::dict info;
          info["status"] = to_string(r.status);
          info["iterations"] = r.iterations;
          info["objective"] = r.objective;
          info["grad_inf"] = r.grad_inf;
          info["trace"] = r.trace;
          return py::make_tuple(std::move(r.model), info);
        },
        py::arg("inputs"), py::arg("locations"), py::arg("values"), py::arg("dictionary"), py::arg("kernel"),
        py::arg("output_structure"), py::arg("lam"), py::arg("loss"), py::arg("options") = IterativeOptions{},
        py::arg("quadrature") = std::nullopt, "Returns (model, info)");

  m.def("save_model", &io::save_model, py::arg("directory"), py::arg("model"));
  m.def("load_model", &io::load_model, py::arg("directory"));

  py::class_<KeModel>(m, "KeModel")
      .def_readonly("bandwidth", &KeModel::bandwidth)
      .def("predict", [](const KeModel& model, const py::object& x, const Eigen::VectorXd& targets) {
        return ke_predict(model, to_input(x), targets).values();
      });
  m.def("fit_ke",
        [](const py::object& x, const std::vector<Eigen::VectorXd>& loc, const std::vector<Eigen::VectorXd>& val,
           double bandwidth) { return fit_ke(to_sample(x, loc, val), bandwidth); },
        py::arg("inputs"), py::arg("locations"), py::arg("values"), py::arg("bandwidth"));

  py::class_<ToyConfig>(m, "ToyConfig")
      .def(py::init<>())
      .def_readwrite("lengthscales", &ToyConfig::lengthscales)
      .def_readwrite("sigma_x", &ToyConfig::sigma_x)
      .def_readwrite("input_grid", &ToyConfig::input_grid)
      .def_readwrite("output_grid", &ToyConfig::output_grid)
      .def_readwrite("gp_seed", &ToyConfig::gp_seed)
      .def_readwrite("sample_seed", &ToyConfig::sample_seed);

  py::class_<ToyGenerator>(m, "ToyGenerator")
      .def(py::init<ToyConfig>(), py::arg("config") = ToyConfig{})
      .def_property_readonly("input_grid", &ToyGenerator::input_grid)
      .def_property_readonly("output_grid", &ToyGenerator::output_grid)
      .def_property_readonly("paths", &ToyGenerator::paths)
      .def("sample",
           [](const ToyGenerator& g, Eigen::Index n, std::uint64_t seed) {
             std::mt19937_64 rng(seed);
             return from_sample(g.sample(n, rng));
           },
           py::arg("n"), py::arg("seed"), "Returns (inputs, locations, values)");

  m.def("corrupt",
        [](const py::object& x, const std::vector<Eigen::VectorXd>& loc, const std::vector<Eigen::VectorXd>& val,
           const std::string& variant, double level, std::uint64_t seed, const ToyGenerator* gen) {
          return from_sample(corrupt(to_sample(x, loc, val), {corruption_from_string(variant), level, seed}, gen));
        },
        py::arg("inputs"), py::arg("locations"), py::arg("values"), py::arg("variant"), py::arg("level"),
        py::arg("seed"), py::arg("generator") = nullptr);

  m.def("learn_dictionary",
        [](const Eigen::MatrixXd& Y, const Quadrature& q, int d, double tau, int max_rounds, std::uint64_t seed) {
          DlProblem p{Y, q};
          p.d = d;
          p.tau = tau;
          p.max_rounds = max_rounds;
          DlResult r = learn_dictionary(p, seed);
          return py::make_tuple(std::move(r.dictionary), r.atoms, r.beta, r.objective_trace);
        },
        py::arg("Y"), py::arg("quadrature"), py::arg("d") = 30, py::arg("tau") = 0.01, py::arg("max_rounds") = 100,
        py::arg("seed") = 0, "Y holds one output per column on the quadrature nodes; returns (dictionary, atoms, beta, trace)");
}
