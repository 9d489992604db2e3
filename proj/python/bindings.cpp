#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "aggkin/analysis.hpp"
#include "aggkin/config.hpp"
#include "aggkin/rhs.hpp"
#include "aggkin/simulator.hpp"

namespace py = pybind11;
using namespace aggkin;

namespace {

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
  const auto* data = arr.data();
  return {data, data + arr.size()};
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> arr(static_cast<py::ssize_t>(v.size()));
  std::memcpy(arr.mutable_data(), v.data(), v.size() * sizeof(double));
  return arr;
}

KernelSpec make_kernel_spec(const std::string& kernel, double alpha,
                            const std::string& factors_path) {
  KernelSpec spec;
  if (kernel == "constant") {
    spec.variant = KernelVariant::constant;
  } else if (kernel == "brownian") {
    spec.variant = KernelVariant::generalized_brownian;
  } else if (kernel == "free_molecular") {
    spec.variant = KernelVariant::free_molecular;
  } else if (kernel == "factors") {
    spec.variant = KernelVariant::custom_factors;
  } else {
    throw std::invalid_argument("kernel must be constant | brownian | free_molecular | factors");
  }
  spec.alpha = alpha;
  spec.factors_path = factors_path;
  return spec;
}

ModelSpec make_model(const std::string& model, const std::string& kernel, double alpha,
                     const std::string& factors_path, std::size_t m, double lam,
                     const std::vector<std::pair<std::size_t, double>>& sources, bool dense) {
  ModelSpec spec;
  if (model == "aggregation") {
    spec.variant = ModelVariant::aggregation;
  } else if (model == "sources") {
    spec.variant = ModelVariant::aggregation_sources;
  } else if (model == "shattering") {
    spec.variant = ModelVariant::aggregation_shattering;
  } else {
    throw std::invalid_argument("model must be aggregation | sources | shattering");
  }
  const KernelSpec kspec = make_kernel_spec(kernel, alpha, factors_path);
  if (dense || kspec.variant == KernelVariant::free_molecular) {
    spec.kernel = build_dense(kspec, m);
  } else {
    spec.kernel = build_factors(kspec, m);
  }
  spec.m = m;
  spec.sources.rates = sources;
  spec.shatter_rate = lam;
  spec.validate();
  return spec;
}

py::dict report_to_dict(const RunReport& report) {
  const std::size_t count = report.records.size();
  std::vector<double> t(count), tau(count), density(count), mass(count), m2(count), err(count);
  std::vector<std::uint64_t> evals(count), rejects(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& rec = report.records[i];
    t[i] = rec.t;
    tau[i] = rec.tau;
    density[i] = rec.density;
    mass[i] = rec.mass;
    m2[i] = rec.m2;
    err[i] = rec.error_estimate;
    evals[i] = rec.rhs_evals;
    rejects[i] = rec.rejects;
  }
  py::dict d;
  d["t"] = to_array(t);
  d["tau"] = to_array(tau);
  d["N"] = to_array(density);
  d["M1"] = to_array(mass);
  d["M2"] = to_array(m2);
  d["err"] = to_array(err);
  d["rhs_evals"] = py::array_t<std::uint64_t>(static_cast<py::ssize_t>(count), evals.data());
  d["rejects"] = py::array_t<std::uint64_t>(static_cast<py::ssize_t>(count), rejects.data());
  py::dict snaps;
  for (const auto& [st, n] : report.snapshots) snaps[py::float_(st)] = to_array(n);
  d["snapshots"] = snaps;
  d["final_state"] = to_array(report.final_state.n);
  d["final_t"] = report.final_state.t;
  d["termination"] =
      report.termination == Termination::completed ? "completed" : "aborted";
  d["abort_reason"] = report.abort_reason;
  d["total_rhs_evals"] = report.total_rhs_evals;
  d["total_accepted"] = report.total_accepted;
  d["total_rejects"] = report.total_rejects;
  d["wall_seconds"] = report.wall_seconds;
  return d;
}

py::dict fit_to_dict(const SlopeFit& fit) {
  py::dict d;
  d["beta"] = fit.beta;
  d["k_lo"] = fit.k_lo;
  d["k_hi"] = fit.k_hi;
  d["residual_rms"] = fit.residual_rms;
  d["points_used"] = fit.points_used;
  d["points_excluded"] = fit.points_excluded;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "aggregation-fragmentation kinetics: fast right-hand sides, adaptive "
            "Runge-Kutta integration, and spectrum analysis";

  m.def(
      "kernel_entry",
      [](const std::string& kernel, std::size_t i, std::size_t j, double alpha) {
        return kernel_entry(make_kernel_spec(kernel, alpha, {}), i, j);
      },
      py::arg("kernel"), py::arg("i"), py::arg("j"), py::arg("alpha") = 0.0,
      "Closed-form kernel rate K(i, j).");

  m.def(
      "eval_rhs",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& n,
         const std::string& model, const std::string& kernel, double alpha, double lam,
         const std::vector<std::pair<std::size_t, double>>& sources, bool dense) {
        const auto state = to_vector(n);
        const ModelSpec spec =
            make_model(model, kernel, alpha, {}, state.size(), lam, sources, dense);
        RhsWorkspace ws;
        std::vector<double> out(state.size());
        eval_rhs(spec, state, ws, out);
        return to_array(out);
      },
      py::arg("n"), py::arg("model") = "aggregation", py::arg("kernel") = "constant",
      py::arg("alpha") = 0.0, py::arg("lam") = 0.0,
      py::arg("sources") = std::vector<std::pair<std::size_t, double>>{},
      py::arg("dense") = false,
      "Right-hand side S(n) for one state vector.");

  m.def(
      "euler_stability_bound",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& n,
         const std::string& kernel, double alpha, double a) {
        const auto state = to_vector(n);
        const KernelSpec spec = make_kernel_spec(kernel, alpha, {});
        const KernelRep rep = spec.variant == KernelVariant::free_molecular
                                  ? KernelRep{build_dense(spec, state.size())}
                                  : KernelRep{build_factors(spec, state.size())};
        return euler_stability_bound(rep, state, a);
      },
      py::arg("n"), py::arg("kernel") = "constant", py::arg("alpha") = 0.0, py::arg("a") = 0.25);

  m.def(
      "moments",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& n) {
        const auto state = to_vector(n);
        const int orders[3] = {0, 1, 2};
        const auto vals = moments(state, orders);
        return py::make_tuple(vals[0], vals[1], vals[2]);
      },
      py::arg("n"), "Total density, mass, and second moment of a state.");

  m.def(
      "run_text",
      [](const std::string& text) {
        const ExperimentConfig cfg = parse_config_text(text);
        return report_to_dict(run(to_simulation_config(cfg)));
      },
      py::arg("config_text"),
      "Integrate a system described by config text; returns the in-memory report "
      "(no files are written).");

  m.def(
      "run_file",
      [](const std::string& path) {
        const ExperimentConfig cfg = load_config(path);
        return report_to_dict(run(to_simulation_config(cfg)));
      },
      py::arg("config_path"));

  m.def(
      "fit_power_law",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& n,
         std::size_t k_lo, std::size_t k_hi) {
        return fit_to_dict(fit_power_law(to_vector(n), k_lo, k_hi));
      },
      py::arg("n"), py::arg("k_lo"), py::arg("k_hi"));

  m.def(
      "fit_cutoff",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& n, double lam,
         std::size_t k_lo, std::size_t k_hi) {
        return fit_to_dict(fit_cutoff(to_vector(n), lam, k_lo, k_hi));
      },
      py::arg("n"), py::arg("lam"), py::arg("k_lo"), py::arg("k_hi"));

  m.def(
      "detect_oscillations",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& value,
         double prominence) {
        const auto summary = detect_oscillations(to_vector(t), to_vector(value), prominence);
        py::dict d;
        d["peak_times"] = to_array(summary.peak_times);
        d["periods"] = to_array(summary.periods);
        d["amplitudes"] = to_array(summary.amplitudes);
        d["cycle_count"] = summary.cycle_count;
        return d;
      },
      py::arg("t"), py::arg("value"), py::arg("prominence") = 0.01);

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
