#include "fairpsy/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace fairpsy {

namespace {

using std::chrono::days;

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  bool bernoulli(double p) { return uniform() < p; }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  int poisson(double mean) { return mean > 0.0 ? std::poisson_distribution<int>(mean)(rng_) : 0; }
  int binomial(int n, double p) { return std::binomial_distribution<int>(n, std::clamp(p, 0.0, 1.0))(rng_); }
  TimeOfDay time_of_day() { return TimeOfDay{uniform_int(0, 86399)}; }

 private:
  std::mt19937_64 rng_;
};

double round_to(double v, double quantum) { return std::round(v / quantum) * quantum; }

struct Generator {
  const SynthConfig& cfg;
  Sampler rnd;
  RawEhrBundle bundle;
  long admission_counter = 0;
  long prescription_counter = 0;
  long diagnosis_counter = 0;

  Generator(const SynthConfig& c) : cfg(c), rnd(c.seed) {}

  void administration(const std::string& pid, Date date, bool given) {
    const Tranquilizer& drug = kTranquilizers[static_cast<std::size_t>(rnd.uniform_int(0, 16))];
    static constexpr double kEquivalents[] = {2.5, 5.0, 10.0};
    const double mg = round_to(kEquivalents[rnd.uniform_int(0, 2)] / drug.multiplier, 0.001);
    const std::string rx = std::to_string(++prescription_counter);
    // "Administered" and "Not administered" carry the same information; one of
    // them is sometimes left empty.
    Cell administered = given ? Cell{true} : (rnd.bernoulli(0.5) ? Cell{false} : Cell{});
    Cell not_administered = given ? (rnd.bernoulli(0.3) ? Cell{} : Cell{false}) : Cell{true};
    bundle.medication.add_row({pid, rx, std::string(drug.atc), std::string(drug.name), mg, std::string("mg"), date,
                               rnd.time_of_day(), administered, mg, mg, rnd.bernoulli(0.05), not_administered});
  }

  void medication_course(const std::string& pid, Date admitted, int first_day, int last_day, int extra_doses) {
    const int n = 1 + rnd.poisson(extra_doses);
    for (int k = 0; k < n; ++k) {
      const Date when = admitted + days{rnd.uniform_int(first_day, last_day)};
      administration(pid, when, true);
      if (rnd.bernoulli(0.1)) administration(pid, when, false);
    }
  }

  void diagnoses(const std::string& pid, Date admitted, double severity) {
    const int n = 1 + rnd.poisson(0.6);
    for (int k = 0; k < n; ++k) {
      std::string_view group = rnd.bernoulli(0.5 * severity) ? kDiagnosisGroups[2]
                                                             : kDiagnosisGroups[static_cast<std::size_t>(
                                                                   rnd.uniform_int(0, 18))];
      const Date diagnosed = admitted + days{rnd.uniform_int(0, 20)};
      const Date start = diagnosed - days{rnd.uniform_int(0, 90)};
      const Date end = diagnosed + days{rnd.uniform_int(0, 120)};
      const int care = 1 + rnd.binomial(8, 0.2 + 0.6 * severity);
      const bool multiple = rnd.bernoulli(0.15 + 0.3 * severity);
      const bool personality = group == kDiagnosisGroups[13] || rnd.bernoulli(0.1);
      Cell diag_cell = diagnosed, end_cell = end;
      if (rnd.bernoulli(cfg.p_missing_diagnosis_date)) {
        diag_cell = Cell{};
        if (rnd.bernoulli(0.5)) end_cell = Cell{};
      }
      bundle.diagnoses.add_row({pid, std::to_string(++diagnosis_counter), start, end_cell, std::string(group),
                                std::int64_t{care}, multiple, personality, true, diag_cell});
    }
  }

  void incidents(const std::string& pid, Date admitted, std::optional<int> duration, double severity) {
    for (int k = rnd.poisson(0.2 + 0.8 * severity); k > 0; --k)
      bundle.aggression.add_row({pid, admitted - days{rnd.uniform_int(1, 365)}, rnd.time_of_day()});
    for (int k = rnd.poisson(0.6 * severity); k > 0; --k)
      bundle.aggression.add_row({pid, admitted + days{rnd.uniform_int(0, 13)}, rnd.time_of_day()});
    if (duration && *duration >= 14)
      for (int k = rnd.poisson(0.3); k > 0; --k)
        bundle.aggression.add_row({pid, admitted + days{rnd.uniform_int(14, *duration)}, rnd.time_of_day()});
  }

  double future_rate(bool man, double severity) const {
    const double shift = 0.5 * cfg.bias_strength;
    const double p = cfg.base_benzo_rate * (man ? 1.0 + shift : 1.0 - shift);
    const double slope = std::min(2.0 * p, 2.0 * (1.0 - p));
    return std::clamp(p + slope * (severity - 0.5), 0.0, 1.0);
  }

  void patient(int index) {
    const std::string pid = std::to_string(index + 1);
    const bool man = rnd.bernoulli(0.5);
    const int dossier_age = rnd.uniform_int(16, 75);
    const int age_offset = rnd.uniform_int(0, 5);
    bundle.patient.add_row({pid, std::int64_t{dossier_age}});

    const int span = static_cast<int>((cfg.end_date - cfg.start_date).count());
    const int n_admissions = 1 + rnd.poisson(cfg.mean_admissions_per_patient - 1.0);
    Date admitted = cfg.start_date + days{rnd.uniform_int(0, std::max(0, span - 30))};
    const Date first = admitted;

    for (int k = 0; k < n_admissions && admitted <= cfg.end_date; ++k) {
      const double severity = rnd.uniform();
      const bool long_stay = rnd.bernoulli(cfg.p_long_stay);
      const int duration = long_stay ? rnd.uniform_int(14, 60) : rnd.uniform_int(1, 13);
      const Date discharged = admitted + days{duration};
      const bool ongoing = discharged > cfg.end_date;
      const int ward_pick = rnd.uniform_int(0, 9);
      const std::string ward =
          ward_pick < 9 ? std::string(kNursingWards[static_cast<std::size_t>(ward_pick % 4)]) : "Outside psychiatry";
      const auto age = static_cast<std::int64_t>(dossier_age + age_offset + (admitted - first).count() / 365);

      bundle.admissions.add_row({std::to_string(++admission_counter), pid, ward, admitted,
                                 ongoing ? Cell{} : Cell{discharged}, rnd.time_of_day(),
                                 ongoing ? Cell{} : Cell{rnd.time_of_day()}, rnd.bernoulli(cfg.p_emergency),
                                 k == 0 && rnd.bernoulli(0.7), std::string(man ? kGenderMan : kGenderWoman), age,
                                 std::string(ongoing ? kStatusOngoing : kStatusDischarged),
                                 ongoing ? Cell{} : Cell{std::int64_t{duration}}});

      diagnoses(pid, admitted, severity);
      incidents(pid, admitted, ongoing ? std::nullopt : std::optional<int>(duration), severity);

      if (rnd.bernoulli(0.15 + 0.7 * severity))
        medication_course(pid, admitted, 0, ongoing ? 13 : std::min(13, duration), 2);
      if (!ongoing && duration >= 14 && rnd.bernoulli(future_rate(man, severity)))
        medication_course(pid, admitted, 14, duration, 3);

      admitted = discharged + days{rnd.uniform_int(7, 365)};
    }
  }
};

}  // namespace

void SynthConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must be a probability");
  };
  if (n_patients <= 0) throw ConfigError("n_patients must be positive");
  if (!(mean_admissions_per_patient >= 1.0))
    throw ConfigError("mean_admissions_per_patient must be at least 1 (every patient has one admission)");
  prob(p_emergency, "p_emergency");
  prob(base_benzo_rate, "base_benzo_rate");
  prob(bias_strength, "bias_strength");
  prob(p_long_stay, "p_long_stay");
  prob(p_missing_diagnosis_date, "p_missing_diagnosis_date");
  if (base_benzo_rate * (1.0 + 0.5 * bias_strength) > 1.0)
    throw ConfigError("base_benzo_rate * (1 + bias_strength / 2) must not exceed 1");
  if (!(start_date < end_date)) throw ConfigError("start_date must precede end_date");
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig cfg;
  try {
    if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
    cfg.seed = j.value("seed", cfg.seed);
    cfg.n_patients = j.value("n_patients", cfg.n_patients);
    cfg.mean_admissions_per_patient = j.value("mean_admissions_per_patient", cfg.mean_admissions_per_patient);
    cfg.p_emergency = j.value("p_emergency", cfg.p_emergency);
    cfg.base_benzo_rate = j.value("base_benzo_rate", cfg.base_benzo_rate);
    cfg.bias_strength = j.value("bias_strength", cfg.bias_strength);
    cfg.p_long_stay = j.value("p_long_stay", cfg.p_long_stay);
    cfg.p_missing_diagnosis_date = j.value("p_missing_diagnosis_date", cfg.p_missing_diagnosis_date);
    auto date_field = [&](const char* key, Date fallback) {
      if (!j.contains(key)) return fallback;
      auto d = parse_date(j.at(key).get<std::string>());
      if (!d) throw ConfigError(std::string(key) + " must be YYYY-MM-DD");
      return *d;
    };
    cfg.start_date = date_field("start_date", cfg.start_date);
    cfg.end_date = date_field("end_date", cfg.end_date);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid synth config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const SynthConfig& cfg) {
  return {{"seed", cfg.seed},
          {"n_patients", cfg.n_patients},
          {"mean_admissions_per_patient", cfg.mean_admissions_per_patient},
          {"p_emergency", cfg.p_emergency},
          {"base_benzo_rate", cfg.base_benzo_rate},
          {"bias_strength", cfg.bias_strength},
          {"start_date", format_date(cfg.start_date)},
          {"end_date", format_date(cfg.end_date)},
          {"p_long_stay", cfg.p_long_stay},
          {"p_missing_diagnosis_date", cfg.p_missing_diagnosis_date}};
}

RawEhrBundle generate(const SynthConfig& cfg) {
  cfg.validate();
  Generator gen(cfg);
  for (int p = 0; p < cfg.n_patients; ++p) gen.patient(p);

  // One administered entry without a date, which featurization must drop.
  const Tranquilizer& drug = kTranquilizers[0];
  gen.bundle.medication.add_row({std::string("1"), std::to_string(++gen.prescription_counter),
                                 std::string(drug.atc), std::string(drug.name), 5.0, std::string("mg"), Cell{},
                                 Cell{}, true, 5.0, 5.0, false, false});
  return std::move(gen.bundle);
}

BundleSummary summarize(const RawEhrBundle& bundle) {
  const Table& adm = bundle.admissions;
  const Table& med = bundle.medication;
  const std::size_t a_pid = adm.column_index(col::patient_id), a_status = adm.column_index(col::admission_status),
                    a_dur = adm.column_index(col::duration_days), a_date = adm.column_index(col::admission_date),
                    a_dis = adm.column_index(col::discharge_date), a_gender = adm.column_index(col::gender);
  const std::size_t m_pid = med.column_index(col::patient_id), m_date = med.column_index(col::administration_date),
                    m_given = med.column_index(col::administered);

  std::multimap<std::string, Date> given;
  for (std::size_t r = 0; r < med.n_rows(); ++r) {
    const auto date = cell_date(med.at(r, m_date));
    if (date && cell_bool(med.at(r, m_given)).value_or(false)) given.emplace(*cell_string(med.at(r, m_pid)), *date);
  }

  BundleSummary s;
  for (std::size_t r = 0; r < adm.n_rows(); ++r) {
    const auto status = cell_string(adm.at(r, a_status));
    const auto duration = cell_int(adm.at(r, a_dur));
    if (!status || *status != kStatusDischarged || !duration || *duration < 14) continue;
    ++s.admissions;
    const auto gender = cell_string(adm.at(r, a_gender)).value_or("");
    if (gender == kGenderMan) ++s.men;
    if (gender == kGenderWoman) ++s.women;
    const Date start = *cell_date(adm.at(r, a_date));
    const Date end = cell_date(adm.at(r, a_dis)).value_or(start + days{*duration});
    bool early = false, late = false;
    auto [lo, hi] = given.equal_range(*cell_string(adm.at(r, a_pid)));
    for (auto it = lo; it != hi; ++it) {
      const auto offset = (it->second - start).count();
      if (offset >= 0 && offset <= 13) early = true;
      if (offset >= 14 && it->second <= end) late = true;
    }
    s.benzo_first_14_days += early;
    s.benzo_after_14_days += late;
  }
  return s;
}

nlohmann::json to_json(const BundleSummary& s) {
  return {{"admissions", s.admissions},
          {"men", s.men},
          {"women", s.women},
          {"benzo_first_14_days", s.benzo_first_14_days},
          {"benzo_after_14_days", s.benzo_after_14_days}};
}

}  // namespace fairpsy
