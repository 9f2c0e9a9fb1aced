#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hkdelay/analysis.hpp"
#include "hkdelay/engine.hpp"
#include "hkdelay/meanfield.hpp"
#include "hkdelay/verification.hpp"

namespace hkdelay {

/// Shortest form is not used on purpose: 17 significant digits always
/// round-trip a double and keep column widths stable across runs.
std::string format_number(double x);

/// Minimal ordered JSON object writer. Numbers use format_number; non-finite
/// values become null.
class JsonObject {
 public:
  JsonObject& number(const std::string& key, double v);
  JsonObject& integer(const std::string& key, long long v);
  JsonObject& boolean(const std::string& key, bool v);
  JsonObject& string(const std::string& key, const std::string& v);
  JsonObject& null(const std::string& key);
  JsonObject& numbers(const std::string& key, const std::vector<double>& v);
  JsonObject& object(const std::string& key, const JsonObject& v);
  JsonObject& objects(const std::string& key, const std::vector<JsonObject>& v);

  /// Pretty-printed with two-space indentation.
  std::string str(int indent = 0) const;

 private:
  struct Field {
    std::string key;
    std::string text;                 // rendered scalar or array of scalars
    std::vector<JsonObject> children;  // nested objects
    bool nested = false;
    bool array = false;
  };
  std::vector<Field> fields_;
};

/// Header `t,agent,coord,x,v`, one row per recorded node, agent and coordinate.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

JsonObject run_summary_json(const RunSummary& s, const WeightDiagnostics& d);
JsonObject certificate_json(const ShrinkageCertificate& c);

/// Header `direction,k,m_k,M_k,D_k,sigma_k,gamma_k,gamma_tilde,bound_rhs,pass`.
/// The direction column is the 0-based index into the run's direction list.
void write_report_csv(std::ostream& os, const VerifiedRun& run);

/// Header `N,seed,t,diameter,w1_vs_ref`.
void write_meanfield_csv(std::ostream& os, const MeanFieldTable& table);

}  // namespace hkdelay
