#ifndef FAIRPSY_EHR_SCHEMA_HPP
#define FAIRPSY_EHR_SCHEMA_HPP

#include "fairpsy/table.hpp"

#include <array>
#include <filesystem>
#include <string_view>

namespace fairpsy {

// Column names of the five source tables.
namespace col {
inline constexpr std::string_view admission_id = "Admission ID";
inline constexpr std::string_view patient_id = "Patient ID";
inline constexpr std::string_view ward_id = "Nursing ward ID";
inline constexpr std::string_view admission_date = "Admission date";
inline constexpr std::string_view discharge_date = "Discharge date";
inline constexpr std::string_view admission_time = "Admission time";
inline constexpr std::string_view discharge_time = "Discharge time";
inline constexpr std::string_view emergency = "Emergency";
inline constexpr std::string_view first_admission = "First admission";
inline constexpr std::string_view gender = "Gender";
inline constexpr std::string_view age_at_admission = "Age at admission";
inline constexpr std::string_view admission_status = "Admission status";
inline constexpr std::string_view duration_days = "Duration in days";

inline constexpr std::string_view prescription_id = "Prescription ID";
inline constexpr std::string_view atc_code = "ATC code (medication ID)";
inline constexpr std::string_view medication_name = "Medication name";
inline constexpr std::string_view dose = "Dose";
inline constexpr std::string_view unit = "Unit (for dose)";
inline constexpr std::string_view administration_date = "Administration date";
inline constexpr std::string_view administration_time = "Administration time";
inline constexpr std::string_view administered = "Administered";
inline constexpr std::string_view dose_used = "Dose used";
inline constexpr std::string_view original_dose = "Original dose";
inline constexpr std::string_view continuation = "IsContinuationAfterSuspension";
inline constexpr std::string_view not_administered = "Not administered";

inline constexpr std::string_view diagnosis_number = "Diagnosis number";
inline constexpr std::string_view start_date = "Start date";
inline constexpr std::string_view end_date = "End date";
inline constexpr std::string_view diagnosis_group = "Main diagnosis group";
inline constexpr std::string_view care_demand = "Level of care demand";
inline constexpr std::string_view multiple_problem = "Multiple problem";
inline constexpr std::string_view personality_disorder = "Personality disorder";
inline constexpr std::string_view admission_flag = "Admission";
inline constexpr std::string_view diagnosis_date = "Diagnosis date";

inline constexpr std::string_view incident_date = "Date of incident";
inline constexpr std::string_view incident_time = "Start time";

inline constexpr std::string_view dossier_age = "Age at start of dossier";
}  // namespace col

inline constexpr std::string_view kStatusDischarged = "Discharged";
inline constexpr std::string_view kStatusOngoing = "Ongoing";
inline constexpr std::string_view kGenderMan = "man";
inline constexpr std::string_view kGenderWoman = "woman";

inline constexpr std::array<std::string_view, 4> kNursingWards = {
    "Clinical Affective & Psychotic Disorders",
    "Clinical Acute & Intensive Care",
    "Clinical Acute & Intensive Care Youth",
    "Clinical Diagnosis & Early Psychosis",
};

inline constexpr std::array<std::string_view, 19> kDiagnosisGroups = {
    "Attention Deficit Disorder",
    "Other issues that may be a cause for concern",
    "Anxiety disorders",
    "Autism spectrum disorder",
    "Bipolar Disorders",
    "Cognitive disorders",
    "Depressive Disorders",
    "Dissociative Disorders",
    "Behavioral disorders",
    "Substance-Related and Addiction Disorders",
    "Obsessive Compulsive and Related Disorders",
    "Other mental disorders",
    "Overige stoornissen op zuigelingen of kinderleeftijd",
    "Personality Disorders",
    "Psychiatric disorders due to a general medical condition",
    "Schizophrenia and other psychotic disorders",
    "Somatic Symptom Disorder and Related Disorders",
    "Trauma- and stressor-related disorders",
    "Nutrition and Eating Disorders",
};

struct Tranquilizer {
  std::string_view name;
  std::string_view atc;
  double multiplier;  ///< mg diazepam per mg of the drug
};

/// Benzodiazepines and Z-drugs with their diazepam-equivalence multipliers.
inline constexpr std::array<Tranquilizer, 17> kTranquilizers = {{
    {"Diazepam", "N05BA01", 1.0},
    {"Alprazolam", "N05BA12", 10.0},
    {"Bromazepam", "N05BA08", 1.0},
    {"Brotizolam", "N05CD09", 40.0},
    {"Chlordiazepoxide", "N05BA02", 0.5},
    {"Clobazam", "N05BA09", 0.5},
    {"Clorazepate potassium", "N05BA05", 0.75},
    {"Flunitrazepam", "N05CD03", 0.1},
    {"Flurazepam", "N05CD01", 0.33},
    {"Lorazepam", "N05BA06", 5.0},
    {"Lormetazepam", "N05CD06", 10.0},
    {"Midazolam", "N05CD08", 1.33},
    {"Nitrazepam", "N05CD02", 1.0},
    {"Oxazepam", "N05BA04", 0.33},
    {"Temazepam", "N05CD07", 1.0},
    {"Zolpidem", "N05CF02", 1.0},
    {"Zopiclone", "N05CF01", 1.33},
}};

Schema admissions_schema();
Schema medication_schema();
Schema diagnoses_schema();
Schema aggression_schema();
Schema patient_schema();

/// The five source tables of the psychiatry EHR export.
struct RawEhrBundle {
  Table admissions{"admissions", admissions_schema()};
  Table medication{"medication", medication_schema()};
  Table diagnoses{"diagnoses", diagnoses_schema()};
  Table aggression{"aggression", aggression_schema()};
  Table patient{"patient", patient_schema()};

  bool operator==(const RawEhrBundle&) const = default;
};

inline constexpr std::array<std::string_view, 5> kBundleFiles = {"admissions.csv", "medication.csv", "diagnoses.csv",
                                                                 "aggression.csv", "patient.csv"};

void write_bundle(const RawEhrBundle& bundle, const std::filesystem::path& dir);
RawEhrBundle read_bundle(const std::filesystem::path& dir);

/// Throws DataError if a medication, diagnosis, aggression or admission row
/// references a Patient ID absent from the patient table.
void check_referential_integrity(const RawEhrBundle& bundle);

}  // namespace fairpsy

#endif  // FAIRPSY_EHR_SCHEMA_HPP
