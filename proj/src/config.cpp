#include "hkdelay/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hkdelay/analysis.hpp"
#include "hkdelay/errors.hpp"

namespace hkdelay {

namespace {

int line_of(const YAML::Node& n) {
  const auto mark = n.Mark();
  return mark.line >= 0 ? mark.line + 1 : -1;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& msg) {
  throw ConfigError(field + ": " + msg, line_of(n));
}

template <class T>
T scalar(const YAML::Node& n, const std::string& field, const char* expected) {
  if (!n.IsScalar()) fail(n, field, std::string("expected ") + expected);
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, field, std::string("expected ") + expected + ", got '" + n.Scalar() + "'");
  }
}

double real(const YAML::Node& n, const std::string& field) {
  const double v = scalar<double>(n, field, "a number");
  if (!std::isfinite(v)) fail(n, field, "must be finite");
  return v;
}

std::int64_t integer(const YAML::Node& n, const std::string& field) {
  return scalar<std::int64_t>(n, field, "an integer");
}

std::uint64_t unsigned64(const YAML::Node& n, const std::string& field) {
  if (n.IsScalar() && !n.Scalar().empty() && n.Scalar().front() == '-')
    fail(n, field, "must be a non-negative integer");
  return scalar<std::uint64_t>(n, field, "a non-negative integer");
}

std::size_t count(const YAML::Node& n, const std::string& field, std::int64_t min) {
  const auto v = integer(n, field);
  if (v < min) fail(n, field, "must be >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

template <class F>
auto list(const YAML::Node& n, const std::string& field, F&& item) {
  if (!n.IsSequence()) fail(n, field, "expected a list");
  std::vector<decltype(item(n, field))> out;
  for (std::size_t i = 0; i < n.size(); ++i)
    out.push_back(item(n[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> reals(const YAML::Node& n, const std::string& field) {
  return list(n, field, real);
}

/// Mapping with a fixed key set; unknown keys are an error.
class Section {
 public:
  Section(YAML::Node node, std::string path, std::set<std::string> allowed)
      : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap()) fail(node_, path_.empty() ? "config" : path_, "expected a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, field(key), "unknown key");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const YAML::Node& node() const { return node_; }
  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
  YAML::Node get(const std::string& key) const { return node_[key]; }
  YAML::Node required(const std::string& key) const {
    auto n = node_[key];
    if (!n) fail(node_, field(key), "required field is missing");
    return n;
  }

 private:
  YAML::Node node_;
  std::string path_;
};

/// Runs a library constructor/validator and pins its ConfigError to a line.
template <class F>
auto anchored(const YAML::Node& n, const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    if (e.line() >= 0) throw;
    fail(n, field, e.what());
  }
}

InfluenceFunction parse_influence(const YAML::Node& node) {
  const std::string path = "model.influence";
  const auto family = node.IsMap() && node["family"] ? node["family"].as<std::string>("") : "";
  std::set<std::string> keys{"family", "declared_sup"};
  if (family == "power_law") keys.insert("beta");
  else if (family == "constant") keys.insert("level");
  else if (family == "tabulated") keys.insert("knots");
  Section s(node, path, keys);
  const auto fam_node = s.required("family");
  std::optional<double> sup;
  if (s.has("declared_sup")) sup = real(s.get("declared_sup"), s.field("declared_sup"));

  if (family == "power_law") {
    const auto b = s.required("beta");
    const double beta = real(b, s.field("beta"));
    if (beta < 0.0) fail(b, s.field("beta"), "must be >= 0");
    return anchored(node, path, [&] { return InfluenceFunction::power_law(beta, sup); });
  }
  if (family == "constant") {
    const auto l = s.required("level");
    const double level = real(l, s.field("level"));
    return anchored(l, s.field("level"), [&] { return InfluenceFunction::constant(level, sup); });
  }
  if (family == "tabulated") {
    const auto k = s.required("knots");
    auto rows = list(k, s.field("knots"), reals);
    std::vector<Knot> knots;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != 2) fail(k[i], s.field("knots"), "each knot is [distance, value]");
      knots.push_back({rows[i][0], rows[i][1]});
    }
    return anchored(k, s.field("knots"), [&] { return InfluenceFunction::tabulated(knots, sup); });
  }
  fail(fam_node, s.field("family"), "expected power_law, constant or tabulated");
}

ModelParams parse_model(const YAML::Node& node) {
  Section s(node, "model", {"n_agents", "dim", "tau", "scheme", "influence"});
  ModelParams p;
  p.n_agents = count(s.required("n_agents"), "model.n_agents", 2);
  p.dim = count(s.required("dim"), "model.dim", 1);
  const auto t = s.required("tau");
  p.tau = real(t, "model.tau");
  if (!(p.tau > 0.0)) fail(t, "model.tau", "must be > 0");
  const auto sch = s.required("scheme");
  p.scheme = anchored(sch, "model.scheme",
                      [&] { return parse_scheme(scalar<std::string>(sch, "model.scheme", "a name")); });
  p.influence = parse_influence(s.required("influence"));
  return p;
}

HistorySpec parse_history(const YAML::Node& node, const ModelParams& model) {
  const auto kind = node.IsMap() && node["kind"] ? node["kind"].as<std::string>("") : "";
  std::set<std::string> keys{"kind"};
  if (kind == "constant") keys.insert("positions");
  if (kind == "uniform_box") keys.insert({"lo", "hi"});
  Section s(node, "history", keys);
  const auto k = s.required("kind");
  HistorySpec h;
  if (kind == "constant") {
    h.kind = HistorySpec::Kind::Constant;
    const auto pos = s.required("positions");
    h.positions = list(pos, "history.positions", reals);
    if (h.positions.size() != model.n_agents)
      fail(pos, "history.positions", "expected " + std::to_string(model.n_agents) + " agents");
    for (std::size_t i = 0; i < h.positions.size(); ++i)
      if (h.positions[i].size() != model.dim)
        fail(pos[i], "history.positions", "expected " + std::to_string(model.dim) + " coordinates");
  } else if (kind == "uniform_box") {
    h.kind = HistorySpec::Kind::UniformBox;
    h.lo = real(s.required("lo"), "history.lo");
    const auto hi = s.required("hi");
    h.hi = real(hi, "history.hi");
    if (h.hi < h.lo) fail(hi, "history.hi", "must be >= history.lo");
  } else {
    fail(k, "history.kind", "expected constant or uniform_box");
  }
  return h;
}

SourceDensity parse_source(const YAML::Node& node) {
  const auto kind = node.IsMap() && node["kind"] ? node["kind"].as<std::string>("") : "";
  std::set<std::string> keys{"kind", "lo", "hi"};
  if (kind == "gaussian") keys.insert({"mean", "scale"});
  Section s(node, "meanfield.source", keys);
  const auto k = s.required("kind");
  SourceDensity src;
  if (kind == "uniform_box") src.kind = SourceDensity::Kind::UniformBox;
  else if (kind == "gaussian") src.kind = SourceDensity::Kind::Gaussian;
  else fail(k, s.field("kind"), "expected uniform_box or gaussian");
  src.lo = reals(s.required("lo"), s.field("lo"));
  src.hi = reals(s.required("hi"), s.field("hi"));
  if (src.kind == SourceDensity::Kind::Gaussian) {
    src.mean = reals(s.required("mean"), s.field("mean"));
    src.scale = reals(s.required("scale"), s.field("scale"));
  }
  anchored(node, "meanfield.source", [&] { src.validate(); return 0; });
  return src;
}

MeanFieldSpec parse_meanfield(const YAML::Node& node, const ModelParams& model) {
  Section s(node, "meanfield", {"source", "n_values", "seeds", "horizon", "sample_interval"});
  MeanFieldSpec m;
  const auto src = s.required("source");
  m.source = parse_source(src);
  if (m.source.dim() != model.dim)
    fail(src, "meanfield.source", "box dimension must equal model.dim");
  m.n_values = list(s.required("n_values"), "meanfield.n_values",
                    [](const YAML::Node& n, const std::string& f) { return count(n, f, 2); });
  m.seeds = list(s.required("seeds"), "meanfield.seeds", unsigned64);
  if (m.n_values.empty()) fail(s.get("n_values"), "meanfield.n_values", "must not be empty");
  if (m.seeds.empty()) fail(s.get("seeds"), "meanfield.seeds", "must not be empty");
  const auto h = s.required("horizon");
  m.horizon = real(h, "meanfield.horizon");
  if (!(m.horizon > 0.0)) fail(h, "meanfield.horizon", "must be > 0");
  if (s.has("sample_interval")) {
    m.sample_interval = real(s.get("sample_interval"), "meanfield.sample_interval");
    if (!(m.sample_interval > 0.0))
      fail(s.get("sample_interval"), "meanfield.sample_interval", "must be > 0");
  }
  return m;
}

SweepGrid parse_sweep(const YAML::Node& node, const ModelParams& model) {
  Section s(node, "sweep", {"tau", "beta", "n_agents", "seeds"});
  SweepGrid g;
  if (s.has("tau")) {
    g.tau = reals(s.get("tau"), "sweep.tau");
    for (std::size_t i = 0; i < g.tau.size(); ++i)
      if (!(g.tau[i] > 0.0)) fail(s.get("tau")[i], "sweep.tau", "entries must be > 0");
  }
  if (s.has("beta")) {
    if (model.influence.family() != InfluenceFunction::Family::PowerLaw)
      fail(s.get("beta"), "sweep.beta", "requires a power_law influence");
    g.beta = reals(s.get("beta"), "sweep.beta");
    for (std::size_t i = 0; i < g.beta.size(); ++i)
      if (g.beta[i] < 0.0) fail(s.get("beta")[i], "sweep.beta", "entries must be >= 0");
  }
  if (s.has("n_agents"))
    g.n_agents = list(s.get("n_agents"), "sweep.n_agents",
                      [](const YAML::Node& n, const std::string& f) { return count(n, f, 2); });
  if (s.has("seeds")) g.seeds = list(s.get("seeds"), "sweep.seeds", unsigned64);
  return g;
}

std::vector<std::vector<double>> parse_directions(const YAML::Node& node, std::size_t dim) {
  if (node.IsScalar()) {
    if (node.Scalar() == "basis") return {};
    fail(node, "analysis.directions", "expected 'basis' or a list of unit vectors");
  }
  auto dirs = list(node, "analysis.directions", reals);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    double s2 = 0.0;
    for (double c : dirs[i]) s2 += c * c;
    if (dirs[i].size() != dim || std::abs(std::sqrt(s2) - 1.0) > 1e-12)
      fail(node[i], "analysis.directions", "each direction must be a unit vector of length model.dim");
  }
  if (dirs.empty()) fail(node, "analysis.directions", "must not be empty");
  return dirs;
}

bool same_influence(const InfluenceFunction& a, const InfluenceFunction& b) {
  if (a.family() != b.family() || a.declared_sup() != b.declared_sup()) return false;
  switch (a.family()) {
    case InfluenceFunction::Family::PowerLaw: return a.beta() == b.beta();
    case InfluenceFunction::Family::Constant: return a.level() == b.level();
    case InfluenceFunction::Family::Tabulated:
      return std::equal(a.knots().begin(), a.knots().end(), b.knots().begin(), b.knots().end(),
                        [](const Knot& x, const Knot& y) {
                          return x.distance == y.distance && x.value == y.value;
                        });
  }
  return false;
}

bool same_model(const ModelParams& a, const ModelParams& b) {
  return a.n_agents == b.n_agents && a.dim == b.dim && a.tau == b.tau && a.scheme == b.scheme &&
         same_influence(a.influence, b.influence);
}

YAML::Emitter& flow(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << x;
  return out << YAML::EndSeq;
}

template <class T>
YAML::Emitter& flow_ints(YAML::Emitter& out, const std::vector<T>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (auto x : v) out << x;
  return out << YAML::EndSeq;
}

}  // namespace

bool MeanFieldSpec::operator==(const MeanFieldSpec& o) const {
  return source.kind == o.source.kind && source.lo == o.source.lo && source.hi == o.source.hi &&
         source.mean == o.source.mean && source.scale == o.source.scale &&
         n_values == o.n_values && seeds == o.seeds && horizon == o.horizon &&
         sample_interval == o.sample_interval;
}

bool RunConfig::operator==(const RunConfig& o) const {
  return same_model(model, o.model) && steps_per_delay == o.steps_per_delay && t_end == o.t_end &&
         record_stride == o.record_stride && stop_at_consensus == o.stop_at_consensus &&
         eps_consensus == o.eps_consensus && history == o.history && directions == o.directions &&
         seed == o.seed && output == o.output && sweep == o.sweep && meanfield == o.meanfield;
}

IntegratorConfig RunConfig::integrator() const {
  if (!t_end) throw ConfigError("integrator.t_end: required field is missing");
  IntegratorConfig c;
  c.steps_per_delay = steps_per_delay;
  c.t_end = *t_end;
  c.record_stride = record_stride;
  c.eps_consensus = eps_consensus;
  c.stop_at_consensus = stop_at_consensus;
  return c;
}

InitialHistory RunConfig::initial_history() const {
  if (!history) throw ConfigError("history: required section is missing");
  if (history->kind == HistorySpec::Kind::Constant) {
    Positions p(model.n_agents, model.dim);
    for (std::size_t i = 0; i < model.n_agents; ++i)
      for (std::size_t c = 0; c < model.dim; ++c) p(i, c) = history->positions.at(i).at(c);
    return InitialHistory::constant_per_agent(std::move(p));
  }
  if (!seed) throw ConfigError("seed: required for a randomized history");
  return InitialHistory::random_constant(*seed, history->lo, history->hi);
}

std::vector<std::vector<double>> RunConfig::analysis_directions() const {
  return directions.empty() ? basis_directions(model.dim) : directions;
}

MeanFieldExperiment RunConfig::meanfield_experiment() const {
  if (!meanfield) throw ConfigError("meanfield: required section is missing");
  MeanFieldExperiment e;
  e.source = meanfield->source;
  e.n_values = meanfield->n_values;
  e.seeds = meanfield->seeds;
  e.horizon = meanfield->horizon;
  e.sample_interval = meanfield->sample_interval;
  e.params = model;
  e.steps_per_delay = steps_per_delay;
  e.eps_consensus = eps_consensus;
  return e;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(std::string("malformed YAML: ") + e.msg, e.mark.line >= 0 ? e.mark.line + 1 : -1);
  }
  if (!root || root.IsNull()) throw ConfigError("config: empty document");
  Section top(root, "", {"model", "integrator", "history", "analysis", "seed", "output", "sweep",
                         "meanfield"});
  RunConfig c;
  c.model = parse_model(top.required("model"));

  if (top.has("integrator")) {
    Section s(top.get("integrator"), "integrator",
              {"steps_per_delay", "t_end", "record_stride", "stop_at_consensus"});
    if (s.has("steps_per_delay"))
      c.steps_per_delay = static_cast<int>(count(s.get("steps_per_delay"), s.field("steps_per_delay"), 4));
    if (s.has("t_end")) {
      c.t_end = real(s.get("t_end"), s.field("t_end"));
      if (*c.t_end < 0.0) fail(s.get("t_end"), s.field("t_end"), "must be >= 0");
    }
    if (s.has("record_stride"))
      c.record_stride = static_cast<int>(count(s.get("record_stride"), s.field("record_stride"), 1));
    if (s.has("stop_at_consensus"))
      c.stop_at_consensus = scalar<bool>(s.get("stop_at_consensus"), s.field("stop_at_consensus"), "true or false");
  }

  if (top.has("seed")) c.seed = unsigned64(top.get("seed"), "seed");

  if (top.has("analysis")) {
    Section s(top.get("analysis"), "analysis", {"directions", "eps_consensus"});
    if (s.has("directions")) c.directions = parse_directions(s.get("directions"), c.model.dim);
    if (s.has("eps_consensus")) {
      c.eps_consensus = real(s.get("eps_consensus"), s.field("eps_consensus"));
      if (!(c.eps_consensus > 0.0)) fail(s.get("eps_consensus"), s.field("eps_consensus"), "must be > 0");
    }
  }

  if (top.has("output")) {
    Section s(top.get("output"), "output",
              {"trajectory", "summary", "report", "certificate", "sweep", "meanfield"});
    const auto name = [&](const char* key, std::string& dst) {
      if (!s.has(key)) return;
      dst = scalar<std::string>(s.get(key), s.field(key), "a file name");
      if (dst.empty()) fail(s.get(key), s.field(key), "must not be empty");
    };
    name("trajectory", c.output.trajectory);
    name("summary", c.output.summary);
    name("report", c.output.report);
    name("certificate", c.output.certificate);
    name("sweep", c.output.sweep);
    name("meanfield", c.output.meanfield);
  }

  if (top.has("sweep")) c.sweep = parse_sweep(top.get("sweep"), c.model);
  if (top.has("meanfield")) c.meanfield = parse_meanfield(top.get("meanfield"), c.model);

  if (top.has("history")) {
    c.history = parse_history(top.get("history"), c.model);
    const bool seeded = c.seed || (c.sweep && !c.sweep->seeds.empty());
    if (c.history->kind == HistorySpec::Kind::UniformBox && !seeded)
      fail(top.get("history"), "seed", "required for a randomized history");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_agents" << YAML::Value << c.model.n_agents;
  out << YAML::Key << "dim" << YAML::Value << c.model.dim;
  out << YAML::Key << "tau" << YAML::Value << c.model.tau;
  out << YAML::Key << "scheme" << YAML::Value << std::string(to_string(c.model.scheme));
  out << YAML::Key << "influence" << YAML::Value << YAML::BeginMap;
  const auto& f = c.model.influence;
  switch (f.family()) {
    case InfluenceFunction::Family::PowerLaw:
      out << YAML::Key << "family" << YAML::Value << "power_law";
      out << YAML::Key << "beta" << YAML::Value << f.beta();
      break;
    case InfluenceFunction::Family::Constant:
      out << YAML::Key << "family" << YAML::Value << "constant";
      out << YAML::Key << "level" << YAML::Value << f.level();
      break;
    case InfluenceFunction::Family::Tabulated:
      out << YAML::Key << "family" << YAML::Value << "tabulated";
      out << YAML::Key << "knots" << YAML::Value << YAML::BeginSeq;
      for (const auto& k : f.knots()) flow(out, {k.distance, k.value});
      out << YAML::EndSeq;
      break;
  }
  out << YAML::Key << "declared_sup" << YAML::Value << f.declared_sup();
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "steps_per_delay" << YAML::Value << c.steps_per_delay;
  if (c.t_end) out << YAML::Key << "t_end" << YAML::Value << *c.t_end;
  out << YAML::Key << "record_stride" << YAML::Value << c.record_stride;
  out << YAML::Key << "stop_at_consensus" << YAML::Value << c.stop_at_consensus;
  out << YAML::EndMap;

  if (c.history) {
    out << YAML::Key << "history" << YAML::Value << YAML::BeginMap;
    if (c.history->kind == HistorySpec::Kind::Constant) {
      out << YAML::Key << "kind" << YAML::Value << "constant";
      out << YAML::Key << "positions" << YAML::Value << YAML::BeginSeq;
      for (const auto& row : c.history->positions) flow(out, row);
      out << YAML::EndSeq;
    } else {
      out << YAML::Key << "kind" << YAML::Value << "uniform_box";
      out << YAML::Key << "lo" << YAML::Value << c.history->lo;
      out << YAML::Key << "hi" << YAML::Value << c.history->hi;
    }
    out << YAML::EndMap;
  }

  out << YAML::Key << "analysis" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "directions" << YAML::Value;
  if (c.directions.empty()) {
    out << "basis";
  } else {
    out << YAML::BeginSeq;
    for (const auto& d : c.directions) flow(out, d);
    out << YAML::EndSeq;
  }
  out << YAML::Key << "eps_consensus" << YAML::Value << c.eps_consensus;
  out << YAML::EndMap;

  if (c.seed) out << YAML::Key << "seed" << YAML::Value << *c.seed;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "trajectory" << YAML::Value << c.output.trajectory;
  out << YAML::Key << "summary" << YAML::Value << c.output.summary;
  out << YAML::Key << "report" << YAML::Value << c.output.report;
  out << YAML::Key << "certificate" << YAML::Value << c.output.certificate;
  out << YAML::Key << "sweep" << YAML::Value << c.output.sweep;
  out << YAML::Key << "meanfield" << YAML::Value << c.output.meanfield;
  out << YAML::EndMap;

  if (c.sweep) {
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    if (!c.sweep->tau.empty()) flow(out << YAML::Key << "tau" << YAML::Value, c.sweep->tau);
    if (!c.sweep->beta.empty()) flow(out << YAML::Key << "beta" << YAML::Value, c.sweep->beta);
    if (!c.sweep->n_agents.empty())
      flow_ints(out << YAML::Key << "n_agents" << YAML::Value, c.sweep->n_agents);
    if (!c.sweep->seeds.empty()) flow_ints(out << YAML::Key << "seeds" << YAML::Value, c.sweep->seeds);
    out << YAML::EndMap;
  }

  if (c.meanfield) {
    const auto& m = *c.meanfield;
    out << YAML::Key << "meanfield" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "source" << YAML::Value << YAML::BeginMap;
    const bool gauss = m.source.kind == SourceDensity::Kind::Gaussian;
    out << YAML::Key << "kind" << YAML::Value << (gauss ? "gaussian" : "uniform_box");
    flow(out << YAML::Key << "lo" << YAML::Value, m.source.lo);
    flow(out << YAML::Key << "hi" << YAML::Value, m.source.hi);
    if (gauss) {
      flow(out << YAML::Key << "mean" << YAML::Value, m.source.mean);
      flow(out << YAML::Key << "scale" << YAML::Value, m.source.scale);
    }
    out << YAML::EndMap;
    flow_ints(out << YAML::Key << "n_values" << YAML::Value, m.n_values);
    flow_ints(out << YAML::Key << "seeds" << YAML::Value, m.seeds);
    out << YAML::Key << "horizon" << YAML::Value << m.horizon;
    out << YAML::Key << "sample_interval" << YAML::Value << m.sample_interval;
    out << YAML::EndMap;
  }

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace hkdelay
