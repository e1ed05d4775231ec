// Python bindings for the cocycle laboratory. Scenario configs and reports
// cross the boundary as JSON strings; the python package wraps them as dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cocylab/scenario.hpp"

namespace py = pybind11;
using namespace cocylab;

namespace {

TransitionStructure ts_from(const std::vector<std::vector<int>>& rows) {
  std::vector<std::vector<bool>> q;
  for (const auto& r : rows) {
    std::vector<bool> row;
    for (int v : r) row.push_back(v != 0);
    q.push_back(std::move(row));
  }
  return TransitionStructure(static_cast<int>(q.size()), q);
}

ScenarioConfig cfg_from(const std::string& config_json) {
  return parse_scenario(Json::parse(config_json));
}

CocycleSystem system_a(const ScenarioConfig& cfg) {
  if (!cfg.gen_a) fail(Errc::ConfigInvalid, "config has no generator_a");
  return CocycleSystem(std::make_shared<LocalMap>(*cfg.gen_a), cfg.metric, "A");
}

std::vector<std::vector<double>> mat_out(const Mat& m) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < m.rows(); ++i) {
    std::vector<double> r;
    for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "linear cocycles over shifts of finite type";

  py::register_exception<Error>(m, "CocylabError");

  m.def(
      "validate_mixing",
      [](const std::vector<std::vector<int>>& q, int max_power) {
        return validate_mixing(ts_from(q), max_power);
      },
      py::arg("transition"), py::arg("max_power") = 16,
      "Smallest N with Q^N entrywise positive.");

  m.def(
      "enumerate_periodic_orbits",
      [](const std::vector<std::vector<int>>& q, int max_period) {
        std::vector<std::string> words;
        for (const auto& p : enumerate_periodic_orbits(ts_from(q), max_period))
          words.push_back(p.word);
        return words;
      },
      py::arg("transition"), py::arg("max_period"),
      "Primitive orbits as minimal-rotation cyclic words.");

  m.def(
      "trace_power",
      [](const std::vector<std::vector<int>>& q, int n) {
        return ts_from(q).trace_power(n);
      },
      py::arg("transition"), py::arg("n"));

  m.def("template_names", &template_names);

  m.def(
      "generate_template",
      [](const std::string& name, std::uint64_t seed) {
        return generate_template(name, seed).dump();
      },
      py::arg("name"), py::arg("seed") = 7,
      "Materialize a named scenario config (JSON string).");

  m.def(
      "run_scenario",
      [](const std::string& config_json, const std::string& out_dir,
         int threads) {
        const ReportBundle bundle = run_scenario(cfg_from(config_json), threads);
        if (!out_dir.empty()) write_bundle(bundle, out_dir);
        Json top{{"pass", bundle.pass},
                 {"reports", bundle.reports},
                 {"meta", bundle.meta}};
        return top.dump();
      },
      py::arg("config_json"), py::arg("out_dir") = "", py::arg("threads") = 1,
      "Execute a scenario config; returns the bundle as a JSON string.");

  m.def(
      "certify_bunching",
      [](const std::string& config_json, int max_n, int max_period) {
        const ScenarioConfig cfg = cfg_from(config_json);
        const CocycleSystem cs = system_a(cfg);
        DirectSweepOptions opt;
        opt.max_n = max_n;
        opt.violator_max_period = max_period;
        Json out{{"direct", certificate_to_json(certify_direct(cs, opt))}};
        const auto per = certify_periodic(
            cs, enumerate_periodic_orbits(cfg.ts, max_period));
        out["periodic"] = certificate_to_json(per.certificate);
        return out.dump();
      },
      py::arg("config_json"), py::arg("max_n") = 8, py::arg("max_period") = 8);

  m.def(
      "periodic_exponents",
      [](const std::string& config_json, const std::string& orbit_word) {
        const ScenarioConfig cfg = cfg_from(config_json);
        return periodic_exponents(system_a(cfg), PeriodicOrbit(orbit_word));
      },
      py::arg("config_json"), py::arg("orbit"));

  m.def(
      "measure_exponents",
      [](const std::string& config_json, long steps, int samples,
         std::uint64_t seed) {
        const ScenarioConfig cfg = cfg_from(config_json);
        MarkovSampler sampler = MarkovSampler::parry(cfg.ts, seed);
        const MeasureEstimate est =
            measure_exponents(system_a(cfg), sampler, steps, samples);
        return py::make_tuple(est.lambda_plus, est.lambda_minus,
                              est.std_error_plus, est.std_error_minus);
      },
      py::arg("config_json"), py::arg("steps") = 2000, py::arg("samples") = 16,
      py::arg("seed") = 1);

  m.def(
      "evaluate_cocycle",
      [](const std::string& config_json, const std::string& point_json,
         long n) {
        const ScenarioConfig cfg = cfg_from(config_json);
        const SftPoint x = point_from_json(cfg.ts, Json::parse(point_json));
        return mat_out(evaluate(system_a(cfg), x, n));
      },
      py::arg("config_json"), py::arg("point_json"), py::arg("n"));

  m.def(
      "distortion",
      [](const std::string& config_json, const std::string& point_json,
         long n) {
        const ScenarioConfig cfg = cfg_from(config_json);
        const SftPoint x = point_from_json(cfg.ts, Json::parse(point_json));
        return distortion(system_a(cfg), x, n);
      },
      py::arg("config_json"), py::arg("point_json"), py::arg("n"));

  m.def(
      "stable_holonomy",
      [](const std::string& config_json, const std::string& x_json,
         const std::string& y_json) {
        const ScenarioConfig cfg = cfg_from(config_json);
        const SftPoint x = point_from_json(cfg.ts, Json::parse(x_json));
        const SftPoint y = point_from_json(cfg.ts, Json::parse(y_json));
        return mat_out(stable_holonomy(system_a(cfg), x, y).matrix);
      },
      py::arg("config_json"), py::arg("x_json"), py::arg("y_json"));

  m.def(
      "unstable_holonomy",
      [](const std::string& config_json, const std::string& x_json,
         const std::string& y_json) {
        const ScenarioConfig cfg = cfg_from(config_json);
        const SftPoint x = point_from_json(cfg.ts, Json::parse(x_json));
        const SftPoint y = point_from_json(cfg.ts, Json::parse(y_json));
        return mat_out(unstable_holonomy(system_a(cfg), x, y).matrix);
      },
      py::arg("config_json"), py::arg("x_json"), py::arg("y_json"));

  m.def(
      "match_periodic_data",
      [](const std::string& config_json, const std::string& mode,
         int max_period) {
        const ScenarioConfig cfg = cfg_from(config_json);
        if (!cfg.gen_a || !cfg.gen_b)
          fail(Errc::ConfigInvalid, "config needs generator_a and generator_b");
        const CocycleSystem a(std::make_shared<LocalMap>(*cfg.gen_a),
                              cfg.metric, "A");
        const CocycleSystem b(std::make_shared<LocalMap>(*cfg.gen_b),
                              cfg.metric, "B");
        const MatchReport rep = match_periodic_data(
            a, b, enumerate_periodic_orbits(cfg.ts, max_period),
            mode == "equal" ? MatchMode::Equal : MatchMode::Conjugate);
        Json rows = Json::array();
        for (const auto& r : rep.rows)
          rows.push_back(Json{{"orbit", r.orbit.word},
                              {"residual", r.residual},
                              {"pass", r.pass}});
        return Json{{"pass", rep.pass},
                    {"worst_residual", rep.worst_residual},
                    {"rows", rows}}
            .dump();
      },
      py::arg("config_json"), py::arg("mode") = "equal",
      py::arg("max_period") = 8);

  m.def(
      "commutant_tower",
      [](const std::string& config_json, const std::string& orbit, int kmax) {
        const ScenarioConfig cfg = cfg_from(config_json);
        const CommutantReport rep =
            commutant_tower(system_a(cfg), PeriodicOrbit(orbit), kmax);
        Json dims = Json::array();
        for (const auto& [k, d] : rep.dims) dims.push_back(Json::array({k, d}));
        return Json{{"dims", dims},
                    {"l_star", rep.l_star},
                    {"tower_verified", rep.tower_verified}}
            .dump();
      },
      py::arg("config_json"), py::arg("orbit") = "0", py::arg("kmax") = 12);

  m.attr("__version__") = "0.1.0";
}
