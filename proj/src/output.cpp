#include "hkdelay/output.hpp"

#include <fmt/format.h>

#include <cmath>

namespace hkdelay {

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) out += fmt::format("\\u{:04x}", ch);
        else out += ch;
    }
  }
  return out + "\"";
}

std::string json_number(double v) { return std::isfinite(v) ? format_number(v) : "null"; }

}  // namespace

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

JsonObject& JsonObject::number(const std::string& key, double v) {
  fields_.push_back({key, json_number(v), {}, false, false});
  return *this;
}

JsonObject& JsonObject::integer(const std::string& key, long long v) {
  fields_.push_back({key, std::to_string(v), {}, false, false});
  return *this;
}

JsonObject& JsonObject::boolean(const std::string& key, bool v) {
  fields_.push_back({key, v ? "true" : "false", {}, false, false});
  return *this;
}

JsonObject& JsonObject::string(const std::string& key, const std::string& v) {
  fields_.push_back({key, quoted(v), {}, false, false});
  return *this;
}

JsonObject& JsonObject::null(const std::string& key) {
  fields_.push_back({key, "null", {}, false, false});
  return *this;
}

JsonObject& JsonObject::numbers(const std::string& key, const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + json_number(v[i]);
  fields_.push_back({key, s + "]", {}, false, false});
  return *this;
}

JsonObject& JsonObject::object(const std::string& key, const JsonObject& v) {
  fields_.push_back({key, {}, {v}, true, false});
  return *this;
}

JsonObject& JsonObject::objects(const std::string& key, const std::vector<JsonObject>& v) {
  fields_.push_back({key, {}, v, true, true});
  return *this;
}

std::string JsonObject::str(int indent) const {
  if (fields_.empty()) return "{}";
  const std::string pad(2 * (indent + 1), ' ');
  std::string out = "{";
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    const auto& f = fields_[i];
    out += (i ? ",\n" : "\n") + pad + quoted(f.key) + ": ";
    if (!f.nested) {
      out += f.text;
    } else if (!f.array) {
      out += f.children.front().str(indent + 1);
    } else if (f.children.empty()) {
      out += "[]";
    } else {
      out += "[";
      for (std::size_t c = 0; c < f.children.size(); ++c)
        out += (c ? ",\n" : "\n") + pad + "  " + f.children[c].str(indent + 2);
      out += "\n" + pad + "]";
    }
  }
  return out + "\n" + std::string(2 * indent, ' ') + "}";
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,agent,coord,x,v\n";
  const std::size_t n = traj.agents(), d = traj.dim();
  for (std::size_t r = 0; r < traj.size(); ++r) {
    const auto t = format_number(traj.time(r));
    const auto x = traj.position(r);
    const auto v = traj.velocity(r);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c)
        os << t << ',' << i << ',' << c << ',' << format_number(x[i * d + c]) << ','
           << format_number(v[i * d + c]) << '\n';
  }
}

JsonObject run_summary_json(const RunSummary& s, const WeightDiagnostics& d) {
  JsonObject o;
  o.number("end_time", s.end_time).boolean("consensus", s.consensus);
  if (s.consensus) o.number("consensus_time", s.consensus_time);
  else o.null("consensus_time");
  o.number("final_diameter", s.final_diameter);
  o.number("max_row_sum", d.max_row_sum)
      .number("min_row_sum", d.min_row_sum)
      .number("max_deviation_from_one", d.max_deviation_from_one)
      .integer("rhs_evaluations", d.evaluations);
  return o;
}

JsonObject certificate_json(const ShrinkageCertificate& c) {
  JsonObject o;
  o.number("m", c.m)
      .number("M", c.M)
      .number("psi_lower", c.psi_lower)
      .number("sigma", c.sigma)
      .number("gamma", c.gamma)
      .number("gamma_minus", c.gamma_minus)
      .number("gamma_plus", c.gamma_plus)
      .number("tau", c.tau)
      .integer("N", static_cast<long long>(c.N))
      .number("distance_bound", c.distance_bound);
  return o;
}

void write_report_csv(std::ostream& os, const VerifiedRun& run) {
  os << "direction,k,m_k,M_k,D_k,sigma_k,gamma_k,gamma_tilde,bound_rhs,pass\n";
  for (std::size_t d = 0; d < run.directions.size(); ++d) {
    const auto& rep = run.directions[d].contraction;
    if (!rep) continue;
    for (const auto& r : rep->rows)
      os << d << ',' << r.k << ',' << format_number(r.m_k) << ',' << format_number(r.M_k) << ','
         << format_number(r.D_k) << ',' << format_number(r.sigma_k) << ','
         << format_number(r.gamma_k) << ',' << format_number(r.gamma_tilde) << ','
         << format_number(r.bound_rhs) << ',' << (r.pass ? "true" : "false") << '\n';
  }
}

void write_meanfield_csv(std::ostream& os, const MeanFieldTable& table) {
  os << "N,seed,t,diameter,w1_vs_ref\n";
  for (const auto& r : table.rows)
    os << r.n << ',' << r.seed << ',' << format_number(r.t) << ',' << format_number(r.diameter)
       << ',' << format_number(r.w1_vs_ref) << '\n';
}

}  // namespace hkdelay
