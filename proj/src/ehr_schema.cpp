#include "fairpsy/ehr_schema.hpp"

#include <set>

namespace fairpsy {

namespace {

Column c(std::string_view name, ColumnKind kind) { return Column{std::string(name), kind}; }

std::set<std::string> patient_ids(const Table& t) {
  std::set<std::string> ids;
  const std::size_t idx = t.column_index(col::patient_id);
  for (std::size_t r = 0; r < t.n_rows(); ++r)
    if (auto id = cell_string(t.at(r, idx))) ids.insert(*id);
  return ids;
}

}  // namespace

Schema admissions_schema() {
  using K = ColumnKind;
  return {c(col::admission_id, K::identifier),  c(col::patient_id, K::identifier),
          c(col::ward_id, K::identifier),       c(col::admission_date, K::date),
          c(col::discharge_date, K::date),      c(col::admission_time, K::time),
          c(col::discharge_time, K::time),      c(col::emergency, K::boolean),
          c(col::first_admission, K::boolean),  c(col::gender, K::categorical),
          c(col::age_at_admission, K::integer), c(col::admission_status, K::categorical),
          c(col::duration_days, K::integer)};
}

Schema medication_schema() {
  using K = ColumnKind;
  return {c(col::patient_id, K::identifier),   c(col::prescription_id, K::identifier),
          c(col::atc_code, K::categorical),    c(col::medication_name, K::categorical),
          c(col::dose, K::floating),           c(col::unit, K::categorical),
          c(col::administration_date, K::date), c(col::administration_time, K::time),
          c(col::administered, K::boolean),    c(col::dose_used, K::floating),
          c(col::original_dose, K::floating),  c(col::continuation, K::boolean),
          c(col::not_administered, K::boolean)};
}

Schema diagnoses_schema() {
  using K = ColumnKind;
  return {c(col::patient_id, K::identifier),      c(col::diagnosis_number, K::identifier),
          c(col::start_date, K::date),            c(col::end_date, K::date),
          c(col::diagnosis_group, K::categorical), c(col::care_demand, K::integer),
          c(col::multiple_problem, K::boolean),   c(col::personality_disorder, K::boolean),
          c(col::admission_flag, K::boolean),     c(col::diagnosis_date, K::date)};
}

Schema aggression_schema() {
  using K = ColumnKind;
  return {c(col::patient_id, K::identifier), c(col::incident_date, K::date), c(col::incident_time, K::time)};
}

Schema patient_schema() {
  using K = ColumnKind;
  return {c(col::patient_id, K::identifier), c(col::dossier_age, K::integer)};
}

void write_bundle(const RawEhrBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_csv(bundle.admissions, dir / kBundleFiles[0]);
  write_csv(bundle.medication, dir / kBundleFiles[1]);
  write_csv(bundle.diagnoses, dir / kBundleFiles[2]);
  write_csv(bundle.aggression, dir / kBundleFiles[3]);
  write_csv(bundle.patient, dir / kBundleFiles[4]);
}

RawEhrBundle read_bundle(const std::filesystem::path& dir) {
  RawEhrBundle b;
  b.admissions = load_csv(dir / kBundleFiles[0], admissions_schema());
  b.medication = load_csv(dir / kBundleFiles[1], medication_schema());
  b.diagnoses = load_csv(dir / kBundleFiles[2], diagnoses_schema());
  b.aggression = load_csv(dir / kBundleFiles[3], aggression_schema());
  b.patient = load_csv(dir / kBundleFiles[4], patient_schema());
  return b;
}

void check_referential_integrity(const RawEhrBundle& bundle) {
  const auto known = patient_ids(bundle.patient);
  for (const Table* t : {&bundle.admissions, &bundle.medication, &bundle.diagnoses, &bundle.aggression}) {
    const std::size_t idx = t->column_index(col::patient_id);
    for (std::size_t r = 0; r < t->n_rows(); ++r) {
      const auto id = cell_string(t->at(r, idx));
      if (!id) throw DataError(t->name() + ": row " + std::to_string(r + 1) + " has no Patient ID");
      if (!known.count(*id))
        throw DataError(t->name() + ": row " + std::to_string(r + 1) + " references unknown Patient ID '" + *id +
                        "'");
    }
  }
}

}  // namespace fairpsy
