#include "gqc/report.hpp"

namespace gqc {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::vacuous: return "vacuous";
  }
  return "?";
}

void CheckReport::record(double margin, bool violated, Witness w) {
  ++samples_run;
  if (margin < worst_margin) worst_margin = margin;
  if (violated) {
    ++violations;
    if (witness_cap < 0 || static_cast<int>(witnesses.size()) < witness_cap) {
      w.value = margin;
      witnesses.push_back(std::move(w));
    }
  }
}

void CheckReport::finalize() {
  if (verdict == Verdict::vacuous) return;
  verdict = (violations > 0) ? Verdict::fail : Verdict::pass;
}

nlohmann::json mat_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json vec_to_json(const Vec& v) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < v.dim(); ++i) out.push_back(v[i]);
  return out;
}

Mat mat_from_json(const nlohmann::json& j) {
  const int n = static_cast<int>(j.size());
  Mat m(n);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < n; ++c) m(i, c) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)).get<double>();
  return m;
}

Vec vec_from_json(const nlohmann::json& j) {
  const int n = static_cast<int>(j.size());
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

nlohmann::json to_json(const Witness& w) {
  nlohmann::json j;
  if (w.F) j["F"] = mat_to_json(*w.F);
  if (w.a) j["a"] = vec_to_json(*w.a);
  if (w.b) j["b"] = vec_to_json(*w.b);
  j["value"] = w.value;
  if (!w.note.empty()) j["note"] = w.note;
  return j;
}

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json j;
  j["check"] = r.check;
  j["samples_run"] = r.samples_run;
  j["violations"] = r.violations;
  j["worst_margin"] = r.worst_margin;
  nlohmann::json ws = nlohmann::json::array();
  for (const auto& w : r.witnesses) ws.push_back(to_json(w));
  j["witnesses"] = ws;
  j["verdict"] = to_string(r.verdict);
  if (!r.metadata.empty()) j["metadata"] = r.metadata;
  return j;
}

}  // namespace gqc
