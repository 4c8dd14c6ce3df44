#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "tucker/cli.hpp"
#include "tucker/errors.hpp"
#include "tucker/generate.hpp"
#include "tucker/io.hpp"
#include "tucker/objective.hpp"
#include "tucker/search.hpp"
#include "tucker/verify.hpp"

namespace py = pybind11;
using namespace tucker;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor3 to_tensor(const Array& a) {
    if (a.ndim() != 3) throw DimensionError("expected a 3-dimensional array, got " + std::to_string(a.ndim()));
    const Dims dims{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                    static_cast<std::size_t>(a.shape(2))};
    return Tensor3(dims, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor3& t) {
    const Dims& d = t.dims();
    Array out({d[0], d[1], d[2]});
    std::memcpy(out.mutable_data(), t.data().data(), t.size() * sizeof(double));
    return out;
}

using PyPoint = std::tuple<Array, Matrix, Matrix, Matrix>;

FactorPoint to_point(const PyPoint& p) {
    FactorPoint out(to_tensor(std::get<0>(p)), std::get<1>(p), std::get<2>(p), std::get<3>(p));
    out.check_shapes();
    return out;
}

PyPoint from_point(const FactorPoint& p) { return {to_array(p.S), p.A, p.B, p.C}; }

double lambda_or_default(const FactorPoint& p, std::optional<double> lambda) {
    return lambda ? *lambda : default_lambda(p.rank());
}

py::dict report_dict(const ObjectiveReport& r) {
    py::dict d;
    d["L"] = r.L;
    d["phi"] = r.phi;
    d["R"] = r.R;
    d["f"] = r.f;
    d["lambda"] = r.lambda;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<ScheduleError>(m, "ScheduleError", PyExc_RuntimeError);

    m.def("default_lambda", &default_lambda, py::arg("r"));

    m.def(
        "multilinear_transform",
        [](const Array& s, const Matrix& a, const Matrix& b, const Matrix& c) {
            return to_array(multilinear_transform(to_tensor(s), a, b, c));
        },
        py::arg("S"), py::arg("A"), py::arg("B"), py::arg("C"));

    m.def(
        "reconstruct", [](const PyPoint& p) { return to_array(reconstruct(to_point(p))); }, py::arg("point"));

    m.def(
        "hosvd", [](const Array& t, std::size_t r) { return from_point(hosvd(to_tensor(t), r)); }, py::arg("T"),
        py::arg("r"));

    m.def(
        "objective",
        [](const PyPoint& p, const Array& t, std::optional<double> lambda) {
            const FactorPoint fp = to_point(p);
            return report_dict(objective_f(fp, to_tensor(t), lambda_or_default(fp, lambda)));
        },
        py::arg("point"), py::arg("T"), py::arg("lam") = py::none());

    m.def(
        "grad",
        [](const PyPoint& p, const Array& t, std::optional<double> lambda) {
            const FactorPoint fp = to_point(p);
            return from_point(grad_f(fp, to_tensor(t), lambda_or_default(fp, lambda)));
        },
        py::arg("point"), py::arg("T"), py::arg("lam") = py::none());

    m.def(
        "generate",
        [](std::size_t r, std::size_t d, std::uint64_t seed, double noise) {
            const GeneratedTensor g = generate_exact(r, d, seed, noise);
            return py::make_tuple(to_array(g.T), from_point(g.ground_truth));
        },
        py::arg("r"), py::arg("d"), py::arg("seed") = 0, py::arg("noise") = 0.0);

    m.def(
        "run",
        [](const Array& t, std::size_t r, const std::string& init, double epsilon, std::uint64_t seed, long budget,
           std::optional<double> lambda, bool theory) {
            const Tensor3 tensor = to_tensor(t);
            SearchConfig cfg;
            cfg.mode = theory ? SearchMode::Theory : SearchMode::Practical;
            cfg.epsilon = epsilon;
            cfg.seed = seed;
            cfg.budget = budget;
            cfg.lambda = lambda;
            const FactorPoint p0 = cli::make_initial_point(cli::parse_init(init), tensor, r, seed);
            RunResult res;
            {
                py::gil_scoped_release release;
                res = run(tensor, p0, cfg);
            }
            py::list trace;
            for (const TraceRecord& rec : res.trace.records) trace.append(io::dump(io::trace_record_to_json(rec)));
            py::dict out = report_dict(res.report);
            out["point"] = from_point(res.point);
            out["status"] = to_string(res.status);
            out["iterations"] = res.trace.records.size();
            out["escapes"] = res.escapes;
            out["grad_evals"] = res.grad_evals;
            out["f_evals"] = res.f_evals;
            out["trace"] = trace;
            return out;
        },
        py::arg("T"), py::arg("r"), py::arg("init") = "zero", py::arg("epsilon") = 1e-3, py::arg("seed") = 0,
        py::arg("budget") = 50000, py::arg("lam") = py::none(), py::arg("theory") = false);

    m.def(
        "verify",
        [](const std::vector<std::string>& suites, std::uint64_t seed) {
            verify::SuiteOptions opts;
            opts.seed = seed;
            verify::SuiteReport rep;
            {
                py::gil_scoped_release release;
                rep = verify::run_suite(suites, opts);
            }
            return io::dump(verify::to_json(rep));
        },
        py::arg("suites") = std::vector<std::string>{}, py::arg("seed") = 0);
}
