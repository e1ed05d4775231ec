#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "cocylab/centralizer.hpp"
#include "cocylab/conjugacy.hpp"
#include "cocylab/spectrum.hpp"
#include "cocylab/splitting.hpp"

namespace cocylab {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// serialization (row-major nested arrays for matrices, words as strings)
// ---------------------------------------------------------------------------

Json mat_to_json(const Mat& m);
Mat mat_from_json(const Json& j);

Json point_to_json(const SftPoint& x);
SftPoint point_from_json(const TransitionStructure& ts, const Json& j);

Json generator_to_json(const LocalMap& g);
LocalMap generator_from_json(const TransitionStructure& ts, const Json& j);

Json certificate_to_json(const BunchingCertificate& c);
Json field_to_json(const ConjugacyField& f);

// ---------------------------------------------------------------------------
// scenario configs
// ---------------------------------------------------------------------------

struct ScenarioConfig {
  std::string label;
  std::uint64_t seed = 0;
  TransitionStructure ts;
  Metric metric;
  int dimension = 2;
  std::optional<LocalMap> gen_a;
  std::optional<LocalMap> gen_b;
  std::optional<LocalMap> conjugator;  // ground truth transfer, when known
  double tol_scale = 1.0;
  Json experiments = Json::array();
};

ScenarioConfig parse_scenario(const Json& j);
Json scenario_to_json(const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// runner
// ---------------------------------------------------------------------------

struct ReportBundle {
  Json reports = Json::array();
  std::map<std::string, std::string> csv_tables;
  bool pass = true;
  Json meta;  // label, seed, timings; excluded from determinism comparisons
};

ReportBundle run_scenario(const ScenarioConfig& cfg, int threads = 1);

// Writes bundle.json, meta.json and the CSV tables into out_dir.
void write_bundle(const ReportBundle& bundle, const std::string& out_dir);

// ---------------------------------------------------------------------------
// templates: named experiment pipelines, fully materialized from the seed
// ---------------------------------------------------------------------------

std::vector<std::string> template_names();
Json generate_template(const std::string& name, std::uint64_t seed);

// Deterministic helper RNG used by templates so materialized configs depend
// only on this code and the seed.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();          // [0, 1)
  double symmetric();        // (-1, 1)
  int below(int n);

 private:
  std::uint64_t state_;
};

// Random near-identity generator table: entries I + spread * (uniform bump).
LocalMap random_near_identity(const TransitionStructure& ts, int d,
                              int window_radius, double spread, SplitMix& rng);
// Scalar field exp(spread * symmetric) * I.
LocalMap random_scalar_field(const TransitionStructure& ts, int d,
                             int window_radius, double spread, SplitMix& rng);

}  // namespace cocylab
