#include "hkdelay/commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "hkdelay/config.hpp"
#include "hkdelay/errors.hpp"
#include "hkdelay/output.hpp"
#include "hkdelay/parallel.hpp"
#include "hkdelay/verification.hpp"

namespace hkdelay {

namespace {

unsigned worker_count(unsigned jobs) {
  return jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << content;
  if (!f) throw ConfigError("failed writing " + path.string());
}

/// Maps the error taxonomy onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IntegrationFailure& e) {
    err << "integration failure: " << e.what() << '\n';
    return kExitIntegration;
  } catch (const UnsupportedCertificate& e) {
    err << "unsupported certificate: " << e.what() << '\n';
    return kExitUnsupported;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

void require_horizon(const RunConfig& c) {
  const auto cfg = c.integrator();
  if (cfg.t_end < 6.0 * c.model.tau)
    throw ConfigError("integrator.t_end: horizon too short for k=1 (need t_end >= 6 tau = " +
                      format_number(6.0 * c.model.tau) + ")");
}

std::string describe_failure(const VerifiedRun& run) {
  std::ostringstream os;
  for (std::size_t d = 0; d < run.directions.size(); ++d) {
    const auto& v = run.directions[d];
    if (v.contraction) {
      if (auto k = v.contraction->first_failure()) {
        const auto& r = v.contraction->rows[*k];
        os << fmt::format("direction {}: first failing row k={} (D_k={}, D_next={}, bound_rhs={}, "
                          "claim={}, shrink={})\n",
                          d, r.k, format_number(r.D_k), format_number(r.D_next),
                          format_number(r.bound_rhs), r.claim_pass, r.shrink_pass);
      }
    }
    if (!v.stay.pass)
      os << fmt::format("direction {}: stay bound violated (forward [{}, {}] vs initial [{}, {}])\n", d,
                        format_number(v.stay.forward.m), format_number(v.stay.forward.M),
                        format_number(v.stay.initial.m), format_number(v.stay.initial.M));
    if (!v.speed.pass)
      os << fmt::format("direction {}: speed {} exceeds bound {}\n", d,
                        format_number(v.speed.max_speed), format_number(v.speed.bound));
  }
  return os.str();
}

JsonObject verification_json(const RunConfig& c, const VerifiedRun& run) {
  std::vector<JsonObject> dirs;
  for (const auto& v : run.directions) {
    JsonObject d;
    d.numbers("direction", v.direction).number("offset", v.offset);
    if (v.contraction) {
      d.object("certificate", certificate_json(v.contraction->certificate));
      d.integer("rows", static_cast<long long>(v.contraction->rows.size()));
      d.number("tolerance", v.contraction->tolerance);
      if (auto k = v.contraction->first_failure()) d.integer("first_failure", static_cast<long long>(*k));
      else d.null("first_failure");
    }
    JsonObject stay, speed;
    stay.number("m", v.stay.initial.m)
        .number("M", v.stay.initial.M)
        .number("forward_m", v.stay.forward.m)
        .number("forward_M", v.stay.forward.M)
        .number("tolerance", v.stay.tolerance)
        .boolean("pass", v.stay.pass);
    speed.number("max_speed", v.speed.max_speed).number("bound", v.speed.bound).boolean("pass", v.speed.pass);
    d.object("stay", stay).object("speed", speed).boolean("passed", v.passed());
    dirs.push_back(std::move(d));
  }
  JsonObject o;
  o.string("scheme", std::string(to_string(c.model.scheme)))
      .boolean("passed", run.passed())
      .object("run", run_summary_json(run.summary, run.diagnostics))
      .objects("directions", dirs);
  return o;
}

struct Cell {
  double tau = 0.0;
  std::optional<double> beta;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
};

struct CellResult {
  int code = kExitOk;
  std::string status;
  std::optional<VerifiedRun> run;
};

CellResult run_cell(const RunConfig& base, const Cell& cell) {
  RunConfig c = base;
  c.model.tau = cell.tau;
  c.model.n_agents = cell.n;
  if (cell.beta) c.model.influence = InfluenceFunction::power_law(*cell.beta, c.model.influence.declared_sup());
  c.seed = cell.seed;
  CellResult res;
  if (c.integrator().t_end < 6.0 * cell.tau) {
    res.code = kExitConfig;
    res.status = "horizon_too_short";
    return res;
  }
  try {
    res.run = verified_run(c.model, c.initial_history(), c.integrator(), c.analysis_directions());
  } catch (const IntegrationFailure&) {
    res.code = kExitIntegration;
    res.status = "integration_failure";
    return res;
  }
  if (!res.run->certificates_supported()) {
    res.code = kExitUnsupported;
    res.status = "unsupported_certificate";
  } else if (!res.run->passed()) {
    res.code = kExitCheckFailed;
    res.status = "check_failed";
  } else {
    res.status = "ok";
  }
  return res;
}

}  // namespace

int cmd_simulate(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto c = load_config(opt.config);
    Simulation sim(c.model, c.initial_history(), c.integrator());
    const auto traj = run_until(sim, c.integrator().t_end);

    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    write_file(opt.out / c.output.trajectory, csv.str());
    JsonObject summary = run_summary_json(traj.summary, sim.diagnostics());
    summary.integer("n_agents", static_cast<long long>(c.model.n_agents))
        .integer("dim", static_cast<long long>(c.model.dim))
        .number("tau", c.model.tau)
        .string("scheme", std::string(to_string(c.model.scheme)))
        .integer("steps_per_delay", c.steps_per_delay);
    write_file(opt.out / c.output.summary, summary.str() + "\n");
    if (!opt.quiet)
      out << fmt::format("simulate: t_end={} consensus={} final_diameter={}\n",
                         format_number(traj.summary.end_time), traj.summary.consensus,
                         format_number(traj.summary.final_diameter));
    return kExitOk;
  });
}

int cmd_verify(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto c = load_config(opt.config);
    if (c.model.scheme == WeightScheme::NormalizedWithSelf)
      throw UnsupportedCertificate("normalized_with_self has no shrinkage certificate");
    require_horizon(c);
    const auto run = verified_run(c.model, c.initial_history(), c.integrator(), c.analysis_directions());

    std::ostringstream csv;
    write_report_csv(csv, run);
    write_file(opt.out / c.output.report, csv.str());
    write_file(opt.out / c.output.certificate, verification_json(c, run).str() + "\n");
    if (!run.passed()) {
      err << "verification failed:\n" << describe_failure(run);
      return kExitCheckFailed;
    }
    if (!opt.quiet) {
      const auto g = run.min_gamma_tilde();
      out << fmt::format("verify: passed, consensus={} min_gamma_tilde={}\n", run.summary.consensus,
                         g ? format_number(*g) : "n/a");
    }
    return kExitOk;
  });
}

int cmd_sweep(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto c = load_config(opt.config);
    const SweepGrid grid = c.sweep.value_or(SweepGrid{});
    c.integrator();  // t_end must be present
    if (!c.history) throw ConfigError("history: required section is missing");
    if (c.history->kind == HistorySpec::Kind::Constant && !grid.n_agents.empty())
      throw ConfigError("sweep.n_agents: needs a uniform_box history");

    const std::vector<double> taus = grid.tau.empty() ? std::vector<double>{c.model.tau} : grid.tau;
    std::vector<std::optional<double>> betas;
    for (double b : grid.beta) betas.emplace_back(b);
    if (betas.empty()) betas.emplace_back(std::nullopt);
    const std::vector<std::size_t> ns = grid.n_agents.empty() ? std::vector{c.model.n_agents} : grid.n_agents;
    std::vector<std::optional<std::uint64_t>> seeds;
    for (auto s : grid.seeds) seeds.emplace_back(s);
    if (seeds.empty()) seeds.emplace_back(c.seed);

    std::vector<Cell> cells;
    for (double tau : taus)
      for (const auto& beta : betas)
        for (auto n : ns)
          for (const auto& seed : seeds) cells.push_back({tau, beta, n, seed});

    std::vector<CellResult> results(cells.size());
    parallel_for(cells.size(), worker_count(opt.jobs),
                 [&](std::size_t i) { results[i] = run_cell(c, cells[i]); });

    const bool power = c.model.influence.family() == InfluenceFunction::Family::PowerLaw;
    std::ostringstream csv;
    csv << "tau,beta,n_agents,seed,status,exit_code,consensus,t_to_consensus,final_diameter,"
           "min_gamma_tilde,end_time\n";
    int worst = kExitOk;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& cell = cells[i];
      const auto& r = results[i];
      worst = std::max(worst, r.code);
      const double beta = cell.beta ? *cell.beta : c.model.influence.beta();
      csv << format_number(cell.tau) << ',' << (power ? format_number(beta) : "") << ',' << cell.n
          << ',' << (cell.seed ? std::to_string(*cell.seed) : "") << ',' << r.status << ','
          << r.code << ',';
      if (r.run) {
        const auto& s = r.run->summary;
        const auto g = r.run->min_gamma_tilde();
        csv << (s.consensus ? "true" : "false") << ','
            << (s.consensus ? format_number(s.consensus_time) : "") << ','
            << format_number(s.final_diameter) << ',' << (g ? format_number(*g) : "") << ','
            << format_number(s.end_time);
      } else {
        csv << ",,,,";
      }
      csv << '\n';
    }
    write_file(opt.out / c.output.sweep, csv.str());
    if (!opt.quiet) out << fmt::format("sweep: {} cells, exit {}\n", cells.size(), worst);
    return worst;
  });
}

int cmd_meanfield(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto c = load_config(opt.config);
    const auto table = run_meanfield(c.meanfield_experiment(), worker_count(opt.jobs));

    std::ostringstream csv;
    write_meanfield_csv(csv, table);
    write_file(opt.out / c.output.meanfield, csv.str());

    std::vector<JsonObject> runs;
    for (const auto& r : table.runs) {
      JsonObject o;
      o.integer("N", static_cast<long long>(r.n))
          .string("seed", std::to_string(r.seed))
          .number("initial_diameter", r.initial_diameter);
      if (r.time_to_half) o.number("time_to_half", *r.time_to_half);
      else o.null("time_to_half");
      o.number("final_diameter", r.final_diameter).boolean("consensus", r.consensus);
      if (r.consensus) o.number("consensus_time", r.consensus_time);
      else o.null("consensus_time");
      runs.push_back(std::move(o));
    }
    JsonObject summary;
    summary.boolean("all_consensus", table.all_consensus());
    if (auto s = table.half_time_spread()) summary.number("half_time_spread", *s);
    else summary.null("half_time_spread");
    if (auto s = table.half_time_spread_across_n()) summary.number("half_time_spread_across_n", *s);
    else summary.null("half_time_spread_across_n");
    summary.objects("runs", runs);
    write_file(opt.out / c.output.summary, summary.str() + "\n");

    if (!opt.quiet)
      out << fmt::format("meanfield: {} runs, all_consensus={}\n", table.runs.size(),
                         table.all_consensus());
    if (!table.all_consensus()) {
      err << "meanfield: not every run reached eps_consensus within the horizon\n";
      return kExitCheckFailed;
    }
    return kExitOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delayed Hegselmann-Krause consensus simulator and verification harness", "hkdelay"};
  app.require_subcommand(1);
  CommandOptions opt;
  using Command = int (*)(const CommandOptions&, std::ostream&, std::ostream&);
  const std::pair<const char*, Command> commands[] = {
      {"simulate", cmd_simulate}, {"verify", cmd_verify}, {"sweep", cmd_sweep}, {"meanfield", cmd_meanfield}};
  const std::pair<const char*, const char*> help[] = {
      {"simulate", "integrate one configuration; writes trajectory CSV and summary JSON"},
      {"verify", "check the stay, speed and contraction bounds; writes report CSV and certificate JSON"},
      {"sweep", "run a parameter grid; writes one CSV row per cell"},
      {"meanfield", "particle approximation experiment; writes the N/seed table"}};
  Command chosen = nullptr;
  for (std::size_t i = 0; i < 4; ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i].second);
    sub->add_option("--config", opt.config, "YAML configuration file")->required();
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--jobs", opt.jobs, "worker threads (0: all cores)")->capture_default_str();
    sub->add_flag("--quiet", opt.quiet, "suppress progress output");
    const Command cmd = commands[i].second;
    sub->callback([&chosen, cmd] { chosen = cmd; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitConfig;
  }
  return chosen(opt, out, err);
}

}  // namespace hkdelay
