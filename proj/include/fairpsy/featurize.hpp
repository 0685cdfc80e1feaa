#ifndef FAIRPSY_FEATURIZE_HPP
#define FAIRPSY_FEATURIZE_HPP

#include "fairpsy/dataset.hpp"
#include "fairpsy/ehr_schema.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fairpsy {

/// Multipliers converting a tranquilizer dose to a diazepam-equivalent dose.
/// Lookup is case-insensitive.
class DoseTable {
 public:
  /// The 17 standard tranquilizers.
  DoseTable();
  static DoseTable empty() { return DoseTable(std::map<std::string, double>{}); }

  /// Adds or replaces an entry; the multiplier must be positive and finite.
  void set(std::string_view drug, double multiplier);
  std::optional<double> multiplier(std::string_view drug) const;
  std::size_t size() const { return entries_.size(); }

 private:
  explicit DoseTable(std::map<std::string, double> entries) : entries_(std::move(entries)) {}
  std::map<std::string, double> entries_;
};

/// dose_mg * multiplier(drug). Throws DataError for an unknown drug or a
/// negative dose.
double diazepam_equivalent(std::string_view drug, double dose_mg, const DoseTable& table);

/// Keeps completed admissions ("Discharged") lasting at least 14 days; row
/// order is preserved.
Table filter_admissions(const Table& admissions);

enum class DateProvenance { primary, end_fallback, start_fallback };

struct ResolvedDate {
  Date date;
  DateProvenance provenance;
};

/// Diagnosis date, else treatment end date, else treatment start date.
/// Throws DataError when all three are missing.
ResolvedDate resolve_diagnosis_date(std::optional<Date> diagnosis, std::optional<Date> end,
                                    std::optional<Date> start);

// Column names of the assembled feature table.
namespace feature {
inline constexpr std::string_view patient_id = "Patient ID";
inline constexpr std::string_view emergency = "Emergency";
inline constexpr std::string_view first_admission = "First admission";
inline constexpr std::string_view gender = "Gender";
inline constexpr std::string_view age_at_admission = "Age at admission";
inline constexpr std::string_view duration = "Duration in days";
inline constexpr std::string_view dossier_age = "Age at start of dossier";
inline constexpr std::string_view incidents_during = "Incidents during admission";
inline constexpr std::string_view incidents_before = "Incidents before admission";
inline constexpr std::string_view multiple_problem = "Multiple problem";
inline constexpr std::string_view personality_disorder = "Personality disorder";
inline constexpr std::string_view min_care = "Minimum level of care demand";
inline constexpr std::string_view max_care = "Maximum level of care demand";
inline constexpr std::string_view past_dose = "Past diazepam-equivalent dose";
inline constexpr std::string_view future_dose = "Future diazepam-equivalent dose";
inline constexpr std::string_view target = "Target";
}  // namespace feature

/// The 38 columns of the feature table in output order.
Schema feature_schema(bool drop_duration = false);
std::string ward_column(std::string_view ward);
std::string diagnosis_column(std::string_view group);

struct FeaturizeOptions {
  bool drop_duration = false;
  /// Only diagnoses with a recorded diagnosis date contribute.
  bool primary_diagnosis_dates_only = false;
};

struct FeatureProvenance {
  std::size_t admissions_in = 0;
  std::size_t admissions_kept = 0;
  std::size_t medication_rows = 0;
  std::size_t dropped_dateless_medication = 0;
  std::size_t not_administered_rows = 0;
  std::size_t admissions_without_ward = 0;
  std::size_t diagnosis_primary = 0;
  std::size_t diagnosis_end_fallback = 0;
  std::size_t diagnosis_start_fallback = 0;
  std::size_t diagnosis_excluded = 0;
};

nlohmann::json to_json(const FeatureProvenance& p);

struct FeatureSet {
  Table features;
  std::vector<int> target;  ///< 1 iff the future diazepam-equivalent dose is positive
  FeatureProvenance provenance;
};

/// Builds one feature row per qualifying admission, ordered by (Patient ID,
/// admission date). Doses in days 0..13 after admission count as past, doses
/// from day 14 to discharge as future; only administered, dated medication
/// counts. Diagnosis-derived features use diagnoses whose resolved date falls
/// in days 0..13. Throws DataError on an integrity violation or unknown drug.
FeatureSet assemble(const RawEhrBundle& bundle, const DoseTable& doses, const FeaturizeOptions& options = {});

/// Replaces the future-dose column by a boolean "Target" column (dose > 0).
Table with_binary_target(const Table& features);

/// The LabeledDataset view used for experiments: label = Target, privileged =
/// man, groups = Patient ID. Gender stays in the feature set when
/// `gender_as_feature` is true.
LabeledDataset experiment_dataset(const Table& features, bool gender_as_feature = true);

}  // namespace fairpsy

#endif  // FAIRPSY_FEATURIZE_HPP
