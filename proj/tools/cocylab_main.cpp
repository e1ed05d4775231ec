// cocylab: scenario-driven experiments on linear cocycles over shifts of
// finite type. Subcommands cover the individual analyses; `run` executes a
// whole scenario config and writes a machine-readable report bundle.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cocylab/scenario.hpp"

using namespace cocylab;

namespace {

Json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(Errc::ConfigInvalid, "cannot open " + path);
  Json j;
  try {
    f >> j;
  } catch (const Json::exception& e) {
    fail(Errc::ConfigInvalid, std::string("bad JSON in ") + path + ": " + e.what());
  }
  return j;
}

void emit(const Json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream f(out);
    f << j.dump(2) << "\n";
  }
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("COCYLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

struct Common {
  std::string config;
  std::string out_dir;
  std::string out_file;
  std::uint64_t seed = 0;
  int threads = 0;
  double tol_scale = 1.0;
};

ScenarioConfig load_scenario(Common& c) {
  Json j = load_json(c.config);
  if (c.seed != 0) j["seed"] = c.seed;
  if (c.tol_scale != 1.0) j["tol_scale"] = c.tol_scale;
  return parse_scenario(j);
}

// run a single synthesized experiment through the scenario runner
int run_single(Common& c, Json exp) {
  ScenarioConfig cfg = load_scenario(c);
  cfg.experiments = Json::array({std::move(exp)});
  const ReportBundle bundle = run_scenario(cfg, resolve_threads(c.threads));
  if (!c.out_dir.empty()) write_bundle(bundle, c.out_dir);
  emit(bundle.reports[0]["report"], c.out_file);
  return bundle.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cocylab: fiber-bunched cocycle laboratory over shifts of finite type"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Common c;
  app.add_option("--config", c.config, "scenario config JSON");
  app.add_option("--out", c.out_dir, "output directory for report bundles");
  app.add_option("--emit", c.out_file, "write the primary JSON report here");
  app.add_option("--seed", c.seed, "override the config seed");
  app.add_option("--threads", c.threads,
                 "worker threads (default: COCYLAB_THREADS or 1)");
  app.add_option("--tol-scale", c.tol_scale, "scale all pass tolerances");

  // validate
  auto* validate = app.add_subcommand("validate", "mixing check of the transition matrix");
  int max_power = 16;
  validate->add_option("--max-power", max_power);

  // periodic
  auto* periodic = app.add_subcommand("periodic", "enumerate periodic orbits");
  int max_period = 12;
  periodic->add_option("--max-period", max_period);

  // bunching
  auto* bunching = app.add_subcommand("bunching", "fiber-bunching certification");
  int max_n = 8;
  std::string route = "both";
  bunching->add_option("--max-n", max_n);
  bunching->add_option("--max-period", max_period);
  bunching->add_option("--route", route)->check(CLI::IsMember({"direct", "periodic", "both"}));

  // holonomy
  auto* holonomy = app.add_subcommand("holonomy", "holonomies for point pairs");
  std::string pairs_path;
  holonomy->add_option("--pairs", pairs_path, "JSON list of {x, y, kind}")->required();

  // conjugacy
  auto* conjugacy = app.add_subcommand("conjugacy", "periodic data matching and transfer construction");
  std::string mode = "equal";
  int window = 10;
  conjugacy->add_option("--mode", mode)->check(CLI::IsMember({"equal", "conjugate"}));
  conjugacy->add_option("--window", window);

  // centralizer
  auto* centralizer = app.add_subcommand("centralizer", "commutant tower of a return product");
  std::string orbit_word = "0";
  int kmax = 12;
  centralizer->add_option("--orbit", orbit_word);
  centralizer->add_option("--kmax", kmax);

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "Lyapunov exponents and the approximation gap");
  long steps = 5000;
  int samples = 64;
  spectrum->add_option("--steps", steps);
  spectrum->add_option("--samples", samples);
  spectrum->add_option("--max-period", max_period);

  // splitting
  auto* splitting = app.add_subcommand("splitting", "dominated splitting of a near-constant system");
  int depth = 8;
  int iters = 60;
  splitting->add_option("--depth", depth);
  splitting->add_option("--iters", iters);

  // run / template
  auto* run = app.add_subcommand("run", "execute a scenario config");
  auto* tmpl = app.add_subcommand("template", "materialize a named scenario template");
  std::string tmpl_name;
  tmpl->add_option("--name", tmpl_name, "one of the built-in templates")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (tmpl->parsed()) {
      const Json cfg = generate_template(tmpl_name, c.seed ? c.seed : 7);
      emit(cfg, c.out_file);
      return 0;
    }
    if (c.config.empty()) fail(Errc::ConfigInvalid, "--config is required");

    if (run->parsed()) {
      ScenarioConfig cfg = load_scenario(c);
      const ReportBundle bundle = run_scenario(cfg, resolve_threads(c.threads));
      if (!c.out_dir.empty()) write_bundle(bundle, c.out_dir);
      std::cout << (bundle.pass ? "PASS" : "FAIL") << " ("
                << bundle.reports.size() << " experiments)\n";
      return bundle.pass ? 0 : 1;
    }
    if (validate->parsed())
      return run_single(c, Json{{"op", "validate_mixing"}, {"max_power", max_power}});
    if (periodic->parsed())
      return run_single(c, Json{{"op", "enumerate_orbits"}, {"max_period", max_period}});
    if (bunching->parsed())
      return run_single(c, Json{{"op", "bunching"},
                                {"route", route},
                                {"max_n", max_n},
                                {"max_period", max_period}});
    if (holonomy->parsed()) {
      ScenarioConfig cfg = load_scenario(c);
      const Json pairs = load_json(pairs_path);
      CocycleSystem cs(std::make_shared<LocalMap>(*cfg.gen_a), cfg.metric, "A");
      const BunchingCertificate cert = certify_direct(cs);
      Json out = Json::array();
      for (const auto& pj : pairs) {
        const SftPoint x = point_from_json(cfg.ts, pj.at("x"));
        const SftPoint y = point_from_json(cfg.ts, pj.at("y"));
        const bool stable = pj.value("kind", std::string("stable")) == "stable";
        const HolonomyMap h =
            (stable ? stable_holonomy(cs, x, y) : unstable_holonomy(cs, x, y))
                .certified(cert);
        const HolonomyMap back =
            stable ? stable_holonomy(cs, y, x) : unstable_holonomy(cs, y, x);
        out.push_back(Json{{"kind", stable ? "stable" : "unstable"},
                           {"matrix", mat_to_json(h.matrix)},
                           {"depth", h.stabilization_depth},
                           {"formal", h.formal},
                           {"inverse_residual",
                            opnorm(inverse(h.matrix) - back.matrix)}});
      }
      emit(out, c.out_file);
      return 0;
    }
    if (conjugacy->parsed()) {
      ScenarioConfig cfg = load_scenario(c);
      if (!cfg.gen_a || !cfg.gen_b)
        fail(Errc::ConfigInvalid, "conjugacy needs generator_a and generator_b");
      const CocycleSystem a(std::make_shared<LocalMap>(*cfg.gen_a), cfg.metric, "A");
      const CocycleSystem b(std::make_shared<LocalMap>(*cfg.gen_b), cfg.metric, "B");
      int loop = -1;
      for (int s = 0; s < cfg.ts.k && loop < 0; ++s)
        if (cfg.ts.edge(s, s)) loop = s;
      if (loop < 0) fail(Errc::NoFixedPoint, "use the run subcommand for power-shift pipelines");
      const SftPoint p0 = SftPoint::fixed(cfg.ts, loop);

      const MatchReport match = match_periodic_data(
          a, b, enumerate_periodic_orbits(cfg.ts, max_period),
          mode == "equal" ? MatchMode::Equal : MatchMode::Conjugate);
      std::cout << "periodic data (" << mode
                << "): " << (match.pass ? "PASS" : "FAIL")
                << ", worst residual " << match.worst_residual << "\n";

      Mat c_p;
      if (cfg.conjugator) {
        c_p = cfg.conjugator->at_point(p0);
      } else {
        const TransferSolution sol =
            solve_transfer(evaluate(a, p0, 1), evaluate(b, p0, 1));
        if (!sol.c_p) fail(Errc::MissingOrbitData, "no transfer at the fixed point");
        c_p = *sol.c_p;
      }
      const BunchingCertificate ca = certify_direct(a);
      const BunchingCertificate cb = certify_direct(b);
      BuildOptions opts;
      opts.cert_a = &ca;
      opts.cert_b = &cb;
      const ConjugacyField field = build_conjugacy(a, b, p0, c_p, window, opts);
      std::cout << "field built on " << field.cache().size()
                << " homoclinic points, holder estimate "
                << field.holder_estimate() << "\n";
      emit(field_to_json(field), c.out_file);
      return match.pass ? 0 : 1;
    }
    if (centralizer->parsed())
      return run_single(c, Json{{"op", "commutant_tower"},
                                {"orbit", orbit_word},
                                {"kmax", kmax}});
    if (spectrum->parsed()) {
      ScenarioConfig cfg = load_scenario(c);
      cfg.experiments = Json::array(
          {Json{{"id", "periodic"}, {"op", "periodic_exponents"},
                {"max_period", max_period}},
           Json{{"id", "measure"}, {"op", "measure_exponents"},
                {"steps", steps}, {"samples", samples}},
           Json{{"id", "gap"}, {"op", "approximation_gap"},
                {"max_period", max_period}, {"steps", steps},
                {"samples", samples}}});
      const ReportBundle bundle = run_scenario(cfg, resolve_threads(c.threads));
      if (!c.out_dir.empty()) write_bundle(bundle, c.out_dir);
      emit(bundle.reports, c.out_file);
      return bundle.pass ? 0 : 1;
    }
    if (splitting->parsed())
      return run_single(c, Json{{"op", "splitting"},
                                {"depth", depth},
                                {"iters", iters},
                                {"compare_truth", true}});
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
