#ifndef FAIRPSY_TESTS_SUPPORT_HPP
#define FAIRPSY_TESTS_SUPPORT_HPP

#include "fairpsy/ehr_schema.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace fairpsy::test {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("fairpsy_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Bundle assembled from CSV bodies (header rows are added here).
inline RawEhrBundle bundle_from_csv(const std::string& admissions, const std::string& medication,
                                    const std::string& diagnoses, const std::string& aggression,
                                    const std::string& patient) {
  auto parse = [](const char* name, const Schema& schema, const std::string& body) {
    std::string header;
    for (std::size_t i = 0; i < schema.size(); ++i) header += (i ? "," : "") + schema[i].name;
    return parse_csv(header + "\n" + body, name, schema);
  };
  RawEhrBundle b;
  b.admissions = parse("admissions", admissions_schema(), admissions);
  b.medication = parse("medication", medication_schema(), medication);
  b.diagnoses = parse("diagnoses", diagnoses_schema(), diagnoses);
  b.aggression = parse("aggression", aggression_schema(), aggression);
  b.patient = parse("patient", patient_schema(), patient);
  return b;
}

}  // namespace fairpsy::test

#endif  // FAIRPSY_TESTS_SUPPORT_HPP
