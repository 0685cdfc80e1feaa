#include "fairpsy/featurize.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <tuple>
#include <unordered_map>

namespace fairpsy {

namespace {

using std::chrono::days;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

struct Administration {
  Date date;
  std::string drug;
  double dose_mg;
};

struct DiagnosisRecord {
  Date date;
  DateProvenance provenance;
  std::string group;
  double care_demand;
  bool multiple_problem;
  bool personality_disorder;
};

// Patient IDs sort numerically when they are integers.
std::tuple<bool, long long, std::string> patient_key(const std::string& id) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), v);
  if (ec == std::errc() && ptr == id.data() + id.size()) return {false, v, id};
  return {true, 0, id};
}

template <typename T>
T require(std::optional<T> v, const std::string& what) {
  if (!v) throw DataError(what);
  return *v;
}

}  // namespace

DoseTable::DoseTable() {
  for (const auto& t : kTranquilizers) set(t.name, t.multiplier);
}

void DoseTable::set(std::string_view drug, double multiplier) {
  if (!(multiplier > 0.0) || !std::isfinite(multiplier))
    throw ConfigError("dose multiplier for '" + std::string(drug) + "' must be positive");
  entries_[lower(drug)] = multiplier;
}

std::optional<double> DoseTable::multiplier(std::string_view drug) const {
  auto it = entries_.find(lower(drug));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double diazepam_equivalent(std::string_view drug, double dose_mg, const DoseTable& table) {
  if (!(dose_mg >= 0.0)) throw DataError("negative dose for '" + std::string(drug) + "'");
  const auto m = table.multiplier(drug);
  if (!m) throw DataError("unknown tranquilizer '" + std::string(drug) + "'; extend the dose table");
  return dose_mg * *m;
}

Table filter_admissions(const Table& admissions) {
  const std::size_t status = admissions.column_index(col::admission_status);
  const std::size_t duration = admissions.column_index(col::duration_days);
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < admissions.n_rows(); ++r) {
    const auto s = cell_string(admissions.at(r, status));
    const auto d = cell_int(admissions.at(r, duration));
    if (s && lower(*s) == "discharged" && d && *d >= 14) keep.push_back(r);
  }
  return admissions.select_rows(keep);
}

ResolvedDate resolve_diagnosis_date(std::optional<Date> diagnosis, std::optional<Date> end,
                                    std::optional<Date> start) {
  if (diagnosis) return {*diagnosis, DateProvenance::primary};
  if (end) return {*end, DateProvenance::end_fallback};
  if (start) return {*start, DateProvenance::start_fallback};
  throw DataError("diagnosis has no diagnosis, end or start date");
}

std::string ward_column(std::string_view ward) { return "Nursing ward: " + std::string(ward); }
std::string diagnosis_column(std::string_view group) { return "Diagnosis: " + std::string(group); }

Schema feature_schema(bool drop_duration) {
  using K = ColumnKind;
  auto c = [](std::string_view n, K k) { return Column{std::string(n), k}; };
  Schema s = {c(feature::patient_id, K::identifier),     c(feature::emergency, K::boolean),
              c(feature::first_admission, K::boolean),   c(feature::gender, K::categorical),
              c(feature::age_at_admission, K::integer),  c(feature::duration, K::integer),
              c(feature::dossier_age, K::integer),       c(feature::incidents_during, K::integer),
              c(feature::incidents_before, K::integer),  c(feature::multiple_problem, K::boolean),
              c(feature::personality_disorder, K::boolean), c(feature::min_care, K::floating),
              c(feature::max_care, K::floating),         c(feature::past_dose, K::floating),
              c(feature::future_dose, K::floating)};
  for (auto w : kNursingWards) s.push_back(Column{ward_column(w), K::boolean});
  for (auto g : kDiagnosisGroups) s.push_back(Column{diagnosis_column(g), K::boolean});
  if (drop_duration) s.erase(s.begin() + 5);
  return s;
}

nlohmann::json to_json(const FeatureProvenance& p) {
  return {{"admissions_in", p.admissions_in},
          {"admissions_kept", p.admissions_kept},
          {"medication_rows", p.medication_rows},
          {"dropped_dateless_medication", p.dropped_dateless_medication},
          {"not_administered_rows", p.not_administered_rows},
          {"admissions_without_ward", p.admissions_without_ward},
          {"diagnosis_dates",
           {{"primary", p.diagnosis_primary},
            {"end_fallback", p.diagnosis_end_fallback},
            {"start_fallback", p.diagnosis_start_fallback},
            {"excluded", p.diagnosis_excluded}}}};
}

FeatureSet assemble(const RawEhrBundle& bundle, const DoseTable& doses, const FeaturizeOptions& options) {
  check_referential_integrity(bundle);
  FeatureProvenance prov;

  // Administered, dated medication per patient.
  std::unordered_map<std::string, std::vector<Administration>> medication;
  {
    const Table& t = bundle.medication;
    const std::size_t pid = t.column_index(col::patient_id), date = t.column_index(col::administration_date),
                      given = t.column_index(col::administered), name = t.column_index(col::medication_name),
                      dose = t.column_index(col::dose), used = t.column_index(col::dose_used),
                      unit = t.column_index(col::unit);
    prov.medication_rows = t.n_rows();
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      const auto when = cell_date(t.at(r, date));
      if (!when) {
        ++prov.dropped_dateless_medication;
        continue;
      }
      if (!cell_bool(t.at(r, given)).value_or(false)) {
        ++prov.not_administered_rows;
        continue;
      }
      const std::string where = "medication row " + std::to_string(r + 1);
      const auto u = cell_string(t.at(r, unit));
      if (u && lower(*u) != "mg") throw DataError(where + ": unsupported dose unit '" + *u + "'");
      auto mg = cell_number(t.at(r, used));
      if (!mg) mg = cell_number(t.at(r, dose));
      medication[*cell_string(t.at(r, pid))].push_back(
          {*when, require(cell_string(t.at(r, name)), where + ": missing medication name"),
           require(mg, where + ": missing dose")});
    }
  }

  std::unordered_map<std::string, std::vector<Date>> incidents;
  {
    const Table& t = bundle.aggression;
    const std::size_t pid = t.column_index(col::patient_id), date = t.column_index(col::incident_date);
    for (std::size_t r = 0; r < t.n_rows(); ++r)
      if (auto d = cell_date(t.at(r, date))) incidents[*cell_string(t.at(r, pid))].push_back(*d);
  }

  std::unordered_map<std::string, std::vector<DiagnosisRecord>> diagnoses;
  {
    const Table& t = bundle.diagnoses;
    const std::size_t pid = t.column_index(col::patient_id), diag = t.column_index(col::diagnosis_date),
                      end = t.column_index(col::end_date), start = t.column_index(col::start_date),
                      group = t.column_index(col::diagnosis_group), care = t.column_index(col::care_demand),
                      mp = t.column_index(col::multiple_problem), pd = t.column_index(col::personality_disorder);
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      const auto resolved =
          resolve_diagnosis_date(cell_date(t.at(r, diag)), cell_date(t.at(r, end)), cell_date(t.at(r, start)));
      switch (resolved.provenance) {
        case DateProvenance::primary: ++prov.diagnosis_primary; break;
        case DateProvenance::end_fallback: ++prov.diagnosis_end_fallback; break;
        case DateProvenance::start_fallback: ++prov.diagnosis_start_fallback; break;
      }
      if (options.primary_diagnosis_dates_only && resolved.provenance != DateProvenance::primary) {
        ++prov.diagnosis_excluded;
        continue;
      }
      const std::string where = "diagnosis row " + std::to_string(r + 1);
      diagnoses[*cell_string(t.at(r, pid))].push_back(
          {resolved.date, resolved.provenance, require(cell_string(t.at(r, group)), where + ": missing group"),
           require(cell_number(t.at(r, care)), where + ": missing level of care demand"),
           cell_bool(t.at(r, mp)).value_or(false), cell_bool(t.at(r, pd)).value_or(false)});
    }
  }

  std::unordered_map<std::string, std::int64_t> dossier_age;
  {
    const Table& t = bundle.patient;
    const std::size_t pid = t.column_index(col::patient_id), age = t.column_index(col::dossier_age);
    for (std::size_t r = 0; r < t.n_rows(); ++r)
      if (auto a = cell_int(t.at(r, age))) dossier_age[*cell_string(t.at(r, pid))] = *a;
  }

  const Table kept = filter_admissions(bundle.admissions);
  prov.admissions_in = bundle.admissions.n_rows();
  prov.admissions_kept = kept.n_rows();

  const std::size_t a_pid = kept.column_index(col::patient_id), a_date = kept.column_index(col::admission_date),
                    a_dis = kept.column_index(col::discharge_date), a_ward = kept.column_index(col::ward_id),
                    a_em = kept.column_index(col::emergency), a_first = kept.column_index(col::first_admission),
                    a_gender = kept.column_index(col::gender), a_age = kept.column_index(col::age_at_admission),
                    a_dur = kept.column_index(col::duration_days), a_id = kept.column_index(col::admission_id);

  std::vector<std::size_t> order(kept.n_rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = patient_key(*cell_string(kept.at(a, a_pid)));
    const auto kb = patient_key(*cell_string(kept.at(b, a_pid)));
    if (ka != kb) return ka < kb;
    return cell_date(kept.at(a, a_date)) < cell_date(kept.at(b, a_date));
  });

  FeatureSet out{Table("features", feature_schema(options.drop_duration)), {}, prov};
  for (std::size_t r : order) {
    const std::string pid = *cell_string(kept.at(r, a_pid));
    const std::string where = "admission " + cell_string(kept.at(r, a_id)).value_or("?");
    const Date admitted = require(cell_date(kept.at(r, a_date)), where + ": missing admission date");
    const std::int64_t duration = *cell_int(kept.at(r, a_dur));
    const Date discharged = cell_date(kept.at(r, a_dis)).value_or(admitted + days{duration});
    const Date window_end = admitted + days{13};
    auto in_window = [&](Date d) { return d >= admitted && d <= window_end; };

    double past = 0.0, future = 0.0;
    if (auto it = medication.find(pid); it != medication.end())
      for (const auto& m : it->second) {
        if (m.date < admitted || m.date > discharged) continue;
        const double de = diazepam_equivalent(m.drug, m.dose_mg, doses);
        (in_window(m.date) ? past : future) += de;
      }

    std::int64_t before = 0, during = 0;
    if (auto it = incidents.find(pid); it != incidents.end())
      for (Date d : it->second) {
        if (d < admitted) ++before;
        else if (in_window(d)) ++during;
      }

    std::vector<bool> diag_hot(kDiagnosisGroups.size(), false);
    bool multiple = false, personality = false;
    double min_care = 0.0, max_care = 0.0;
    bool any_diag = false;
    if (auto it = diagnoses.find(pid); it != diagnoses.end())
      for (const auto& d : it->second) {
        if (!in_window(d.date)) continue;
        auto g = std::find(kDiagnosisGroups.begin(), kDiagnosisGroups.end(), d.group);
        if (g == kDiagnosisGroups.end()) throw DataError(where + ": unknown diagnosis group '" + d.group + "'");
        diag_hot[static_cast<std::size_t>(g - kDiagnosisGroups.begin())] = true;
        multiple = multiple || d.multiple_problem;
        personality = personality || d.personality_disorder;
        min_care = any_diag ? std::min(min_care, d.care_demand) : d.care_demand;
        max_care = any_diag ? std::max(max_care, d.care_demand) : d.care_demand;
        any_diag = true;
      }

    const auto ward = cell_string(kept.at(r, a_ward));
    std::vector<bool> ward_hot(kNursingWards.size(), false);
    bool ward_found = false;
    if (ward)
      for (std::size_t w = 0; w < kNursingWards.size(); ++w)
        if (*ward == kNursingWards[w]) ward_hot[w] = ward_found = true;
    if (!ward_found) ++out.provenance.admissions_without_ward;

    const std::string gender = require(cell_string(kept.at(r, a_gender)), where + ": missing gender");
    if (gender != kGenderMan && gender != kGenderWoman)
      throw DataError(where + ": gender must be '" + std::string(kGenderMan) + "' or '" +
                      std::string(kGenderWoman) + "'");
    auto age_it = dossier_age.find(pid);
    if (age_it == dossier_age.end()) throw DataError(where + ": patient has no age at start of dossier");

    std::vector<Cell> row = {pid,
                             require(cell_bool(kept.at(r, a_em)), where + ": missing Emergency"),
                             require(cell_bool(kept.at(r, a_first)), where + ": missing First admission"),
                             gender,
                             require(cell_int(kept.at(r, a_age)), where + ": missing age at admission"),
                             duration,
                             age_it->second,
                             during,
                             before,
                             multiple,
                             personality,
                             min_care,
                             max_care,
                             past,
                             future};
    for (bool w : ward_hot) row.emplace_back(w);
    for (bool d : diag_hot) row.emplace_back(d);
    if (options.drop_duration) row.erase(row.begin() + 5);
    out.features.add_row(std::move(row));
    out.target.push_back(future > 0.0 ? 1 : 0);
  }
  return out;
}

Table with_binary_target(const Table& features) {
  const std::size_t idx = features.column_index(feature::future_dose);
  Schema schema = features.columns();
  schema[idx] = Column{std::string(feature::target), ColumnKind::boolean};
  Table out(features.name(), std::move(schema));
  for (std::size_t r = 0; r < features.n_rows(); ++r) {
    auto row = features.row(r);
    const auto dose = cell_number(row[idx]);
    if (!dose) throw DataError("row " + std::to_string(r + 1) + ": missing future dose");
    row[idx] = *dose > 0.0;
    out.add_row(std::move(row));
  }
  return out;
}

LabeledDataset experiment_dataset(const Table& features, bool gender_as_feature) {
  LabelingSpec spec{std::string(feature::target),    std::string(feature::gender),    std::string(feature::patient_id),
                    std::string(kGenderMan),          "true",                          gender_as_feature};
  return to_labeled(with_binary_target(features), spec);
}

}  // namespace fairpsy
