#ifndef FAIRPSY_SYNTH_HPP
#define FAIRPSY_SYNTH_HPP

#include "fairpsy/ehr_schema.hpp"

#include <json.hpp>

#include <cstdint>

namespace fairpsy {

/// Parameters of the synthetic EHR generator.
///
/// Gender-blind quantities (ages, durations, diagnoses, incidents, past
/// medication) depend only on a per-admission latent severity. Benzodiazepine
/// administration after day 14 happens with probability
/// p_g + k_g (severity - 1/2), where p_g = base_benzo_rate (1 +/- bias_strength / 2)
/// for men / women, so the expected rate gap between the groups is
/// bias_strength * base_benzo_rate.
struct SynthConfig {
  std::uint64_t seed = 0;
  int n_patients = 500;
  double mean_admissions_per_patient = 1.5;
  double p_emergency = 0.3;
  double base_benzo_rate = 0.4;
  double bias_strength = 0.0;
  Date start_date = make_date(2011, 6, 1);
  Date end_date = make_date(2021, 5, 31);
  double p_long_stay = 0.75;               ///< share of admissions lasting >= 14 days
  double p_missing_diagnosis_date = 0.2;   ///< half of these also lack an end date

  void validate() const;
};

SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& cfg);

/// Deterministic for a fixed config. Always contains one administered
/// medication row without an administration date.
RawEhrBundle generate(const SynthConfig& cfg);

/// Headline counts over completed admissions of at least 14 days.
struct BundleSummary {
  std::size_t admissions = 0;
  std::size_t men = 0;
  std::size_t women = 0;
  std::size_t benzo_first_14_days = 0;
  std::size_t benzo_after_14_days = 0;

  bool operator==(const BundleSummary&) const = default;
};

BundleSummary summarize(const RawEhrBundle& bundle);
nlohmann::json to_json(const BundleSummary& s);

}  // namespace fairpsy

#endif  // FAIRPSY_SYNTH_HPP
