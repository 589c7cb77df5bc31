#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gqc/linalg.hpp"

namespace gqc {

enum class Verdict { pass, fail, vacuous };

std::string to_string(Verdict v);

struct Witness {
  std::optional<Mat> F;
  std::optional<Vec> a;
  std::optional<Vec> b;
  double value = 0.0;
  std::string note;
};

// Outcome of a sampled property check. verdict == fail iff violations > 0;
// verdict == vacuous iff the relevant rank-one cone is empty.
struct CheckReport {
  std::string check;
  long samples_run = 0;
  long violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<Witness> witnesses;
  Verdict verdict = Verdict::pass;
  std::map<std::string, std::string> metadata;

  int witness_cap = 16;

  bool passed() const { return verdict != Verdict::fail; }

  // Record one sample. margin is the checked quantity; witnesses are kept
  // for violations up to the cap.
  void record(double margin, bool violated, Witness w = {});
  void finalize();  // sets verdict from the counters
};

nlohmann::json to_json(const Witness& w);
nlohmann::json to_json(const CheckReport& r);

nlohmann::json mat_to_json(const Mat& m);
nlohmann::json vec_to_json(const Vec& v);
Mat mat_from_json(const nlohmann::json& j);
Vec vec_from_json(const nlohmann::json& j);

}  // namespace gqc
