#include "bellsim/commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <optional>
#include <ostream>

#include "bellsim/analysis.hpp"
#include "bellsim/coincidence_sim.hpp"
#include "bellsim/event_io.hpp"
#include "bellsim/inequalities.hpp"
#include "bellsim/run_config.hpp"

namespace bellsim {

using nlohmann::json;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string output;
  bool compact = false;
  int threads = 1;
};

json setting_deg_json(const Setting& s) {
  if (s.is_absent()) return json{{"absent", true}};
  return json{{"absent", false}, {"theta_deg", rad_to_deg(s.theta())}};
}

json quad_deg_json(const Quad& q) {
  return json{{"theta1", rad_to_deg(q.theta1)},
              {"theta1_prime", rad_to_deg(q.theta1_prime)},
              {"theta2", rad_to_deg(q.theta2)},
              {"theta2_prime", rad_to_deg(q.theta2_prime)}};
}

template <typename T>
json decomposition_json(const CHDecomposition<T>& d) {
  static const char* names[6] = {"N(t1,t2)", "N(t1,t2')", "N(t1',t2)", "N(t1',t2')", "N(t1',inf)", "N(inf,t2)"};
  json terms = json::array();
  for (int i = 0; i < 6; ++i) {
    terms.push_back(json{{"term", names[i]}, {"sign", kCHSigns[i]}, {"value", d.terms[i]}});
  }
  return json{{"terms", terms}, {"total", d.total}, {"violation", d.violates()}};
}

Setting setting_from_flags(const std::optional<double>& deg, bool absent, const char* arm) {
  if (absent && deg) throw CLI::ValidationError(std::string("arm ") + arm + ": give an angle or --absent, not both");
  if (absent) return Setting::absent();
  if (!deg) throw CLI::ValidationError(std::string("arm ") + arm + ": an angle or --absent is required");
  return Setting::degrees(*deg);
}

void emit(const json& doc, const GlobalOptions& g, std::ostream& out) {
  const std::string text = g.compact ? doc.dump() : doc.dump(2);
  out << text << '\n';
  if (!g.output.empty()) {
    std::ofstream file(g.output);
    if (!file) throw InvalidArgument("cannot write output file '" + g.output + "'");
    file << text << '\n';
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clauser-Horne Bell-test laboratory: predictions, angle and efficiency searches, "
               "coincidence-counting simulation and falsification analyses. Angles are in degrees."};
  app.name("bellsim");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Master RNG seed (unsigned 64-bit); overrides the config seed");
  app.add_option("--output", g.output, "Also write the JSON result document to this path");
  app.add_flag("--json", g.compact, "Emit compact single-line JSON instead of indented JSON");
  app.add_option("--threads", g.threads, "Worker threads; results do not depend on this")->check(CLI::PositiveNumber);

  std::function<json()> action;

  // predict
  auto* predict = app.add_subcommand("predict", "Quantum pass probabilities for one pair of polarizer settings");
  double f = 0.4;
  std::optional<double> theta1, theta2;
  bool absent1 = false, absent2 = false;
  predict->add_option("--f", f, "Amplitude ratio f of |VV> to |HH> (dimensionless, >= 0)")->required();
  predict->add_option("--theta1", theta1, "Arm 1 polarizer angle, degrees (0 = horizontal)");
  predict->add_option("--theta2", theta2, "Arm 2 polarizer angle, degrees (0 = horizontal)");
  predict->add_flag("--absent1", absent1, "No polarizer in arm 1");
  predict->add_flag("--absent2", absent2, "No polarizer in arm 2");
  predict->callback([&] {
    action = [&] {
      const State state(f);
      const Setting s1 = setting_from_flags(theta1, absent1, "1");
      const Setting s2 = setting_from_flags(theta2, absent2, "2");
      const JointPass p = joint_pass_probabilities(state, s1, s2);
      return json{{"command", "predict"},
                  {"f", f},
                  {"setting1", setting_deg_json(s1)},
                  {"setting2", setting_deg_json(s2)},
                  {"coincidence_probability", p.q12},
                  {"single_pass_probability_1", p.q1},
                  {"single_pass_probability_2", p.q2}};
    };
  });

  // ch
  auto* ch = app.add_subcommand("ch", "Quantum Clauser-Horne value for four settings");
  double t1 = 0, t1p = 0, t2 = 0, t2p = 0, eta = 1.0;
  auto add_quad = [&](CLI::App* cmd, bool required) {
    auto* a = cmd->add_option("--theta1", t1, "theta1, degrees");
    auto* b = cmd->add_option("--theta1p", t1p, "theta1', degrees");
    auto* c = cmd->add_option("--theta2", t2, "theta2, degrees");
    auto* d = cmd->add_option("--theta2p", t2p, "theta2', degrees");
    if (required) {
      a->required();
      b->required();
      c->required();
      d->required();
    }
  };
  ch->add_option("--f", f, "Amplitude ratio f (dimensionless, >= 0)")->required();
  add_quad(ch, true);
  ch->add_option("--eta", eta, "Detection efficiency of both arms, in (0, 1]");
  ch->callback([&] {
    action = [&] {
      const State state(f);
      const Quad quad = Quad::degrees(t1, t1p, t2, t2p);
      const auto d = ch_quantum(state, quad, eta);
      return json{{"command", "ch"}, {"f", f}, {"eta", eta}, {"quad_deg", quad_deg_json(quad)}, {"ch", decomposition_json(d)}};
    };
  });

  // optimize
  auto* optimize = app.add_subcommand("optimize", "Angles maximizing the quantum CH value");
  AngleSearchConfig search;
  std::vector<double> seed_quad;
  optimize->add_option("--f", f, "Amplitude ratio f (dimensionless, >= 0)")->required();
  optimize->add_option("--eta", eta, "Detection efficiency of both arms, in (0, 1]");
  optimize->add_option("--restarts", search.restarts, "Number of best seed-grid points refined by Nelder-Mead");
  optimize->add_option("--tolerance", search.angle_tolerance, "Angle convergence tolerance, radians");
  optimize->add_option("--grid-pitch", search.grid_pitch_deg, "Seed grid spacing, degrees");
  optimize->add_option("--max-iterations", search.max_iterations, "Nelder-Mead iteration limit per restart");
  optimize->add_option("--seed-quad", seed_quad, "Extra starting quad: theta1 theta1' theta2 theta2', degrees")
      ->expected(4);
  optimize->callback([&] {
    action = [&] {
      search.threads = g.threads;
      if (!seed_quad.empty()) search.seeds.push_back(Quad::degrees(seed_quad[0], seed_quad[1], seed_quad[2], seed_quad[3]));
      const auto r = optimize_angles(f, eta, search);
      json optima = json::array();
      for (const auto& o : r.distinct_optima) optima.push_back(json{{"quad_deg", quad_deg_json(o.quad)}, {"ch", o.ch}});
      return json{{"command", "optimize"},
                  {"f", f},
                  {"eta", eta},
                  {"quad_deg", quad_deg_json(r.quad)},
                  {"ch_max", r.ch_max},
                  {"converged_restarts", r.converged_restarts},
                  {"distinct_optima", optima}};
    };
  });

  // threshold
  auto* threshold = app.add_subcommand("threshold", "Critical detection efficiency for a CH violation");
  ThresholdConfig tcfg;
  threshold->add_option("--f", f, "Amplitude ratio f (dimensionless), in (0, 1]")->required();
  threshold->add_option("--tolerance", tcfg.tolerance, "Final bisection bracket width (efficiency, dimensionless)");
  threshold->add_option("--lower-eta", tcfg.lower_eta, "Lower bracket end (efficiency), must not violate");
  threshold->add_option("--restarts", tcfg.search.restarts, "Optimizer restarts per bisection step");
  threshold->callback([&] {
    action = [&] {
      tcfg.search.threads = g.threads;
      const auto r = critical_efficiency(f, tcfg);
      return json{{"command", "threshold"},
                  {"f", f},
                  {"eta_crit", r.eta_crit},
                  {"bracket", {r.bracket[0], r.bracket[1]}},
                  {"bisection_steps", r.bisection_steps},
                  {"witness", {{"eta", r.witness_eta}, {"quad_deg", quad_deg_json(r.witness_quad)}, {"ch", r.witness_ch}}}};
    };
  });

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulated CH coincidence experiment from a JSON run config");
  std::string config_path;
  std::string events_dir;
  simulate->add_option("--config", config_path, "Run config (JSON, schema bellsim.run/1; SI units)")->required();
  simulate->add_option("--events-dir", events_dir, "Write per-run event CSV + JSON sidecars here");
  simulate->callback([&] {
    action = [&] {
      RunConfig cfg = load_run_config(config_path);
      if (g.seed_given) cfg.seed = g.seed;
      if (!events_dir.empty()) cfg.events_dir = events_dir;
      ChExperimentOptions opts;
      opts.threads = g.threads;
      opts.keep_logs = cfg.events_dir.has_value();
      const auto r = run_ch_experiment(cfg.source, cfg.detector, cfg.quad, cfg.window, cfg.seed, opts);
      json runs = json::array();
      for (int k = 0; k < 6; ++k) {
        json c = counts_to_json(r.runs[k]);
        c["seed"] = derive_run_seed(cfg.seed, k);
        runs.push_back(c);
      }
      if (cfg.events_dir) {
        std::filesystem::create_directories(*cfg.events_dir);
        for (int k = 0; k < 6; ++k) {
          save_event_log(std::filesystem::path(*cfg.events_dir) / ("run_" + std::to_string(k)), r.logs[k]);
        }
      }
      json doc{{"command", "simulate"},
               {"config", run_config_to_json(cfg)},
               {"runs", runs},
               {"ch", decomposition_json(r.ch.decomposition)},
               {"sigma", r.ch.sigma},
               {"significance", r.ch.significance}};
      if (cfg.counts_json) {
        std::ofstream file(*cfg.counts_json);
        if (!file) throw InvalidArgument("cannot write counts file '" + *cfg.counts_json + "'");
        file << doc.dump(2) << '\n';
      }
      return doc;
    };
  });

  // sed
  auto* sed = app.add_subcommand("sed", "Stochastic-optics singles-rate bound and absorption-time verdict");
  SedGeometry geo;
  double focal_mm = 0, radius_mm = 0, coherence_ps = 0, distance_mm = 0, wavelength_nm = 0, depth_um = 0;
  double observed_rate = 0, t_max_ns = kSedMaxAbsorptionTime * 1e9;
  std::optional<double> absorption_ns;
  bool no_violation = false;
  sed->add_option("--eta", geo.eta, "Detection quantum efficiency, in (0, 1]")->required();
  sed->add_option("--focal-mm", focal_mm, "Focal length F of the lens before the detectors, mm")->required();
  sed->add_option("--radius-mm", radius_mm, "Active radius R_c of the non-linear medium, mm")->required();
  sed->add_option("--coherence-ps", coherence_ps, "Coherence time tau of the photons, ps")->required();
  sed->add_option("--distance-mm", distance_mm, "Distance d from medium to detectors, mm")->required();
  sed->add_option("--wavelength-nm", wavelength_nm, "Mean detected wavelength lambda, nm")->required();
  sed->add_option("--depth-um", depth_um, "Active detector depth L, micrometres")->required();
  sed->add_option("--observed-rate", observed_rate, "Observed singles rate R_S, counts/s")->required();
  sed->add_option("--absorption-ns", absorption_ns, "Absorption time T, ns; also report the threshold at this T");
  sed->add_option("--t-max-ns", t_max_ns, "Ceiling on the absorption time T, ns");
  sed->add_flag("--no-violation", no_violation, "The experiment did not observe a CH violation");
  sed->callback([&] {
    action = [&] {
      geo.focal_length = focal_mm * 1e-3;
      geo.source_radius = radius_mm * 1e-3;
      geo.coherence_time = coherence_ps * 1e-12;
      geo.distance = distance_mm * 1e-3;
      geo.wavelength = wavelength_nm * 1e-9;
      geo.detector_depth = depth_um * 1e-6;
      const auto v = sed_verdict(geo, observed_rate, !no_violation, t_max_ns * 1e-9);
      json doc{{"command", "sed"},
               {"observed_rate", v.observed_rate},
               {"threshold_rate_at_t_max", v.threshold_rate},
               {"t_max_s", v.t_max},
               {"implied_T_min_s", v.implied_T_min},
               {"consistent", v.consistent},
               {"falsified", v.falsified}};
      if (absorption_ns) doc["threshold_rate"] = sed_rate_threshold(SedParams{geo, *absorption_ns * 1e-9});
      return doc;
    };
  });

  // spuc
  auto* spuc = app.add_subcommand("spuc", "Power-normalized bound on spontaneous up-conversion relative to PDC");
  double n_spuc = 0, n_pdc = 0, p_spuc = 0, p_pdc = 0;
  spuc->add_option("--spuc-counts", n_spuc, "Upper limit on the up-conversion signal, counts")->required();
  spuc->add_option("--pdc-counts", n_pdc, "Down-conversion signal, counts (> 0)")->required();
  spuc->add_option("--spuc-power-w", p_spuc, "Pump power for the up-conversion search, W")->required();
  spuc->add_option("--pdc-power-w", p_pdc, "Pump power for the down-conversion reference, W")->required();
  spuc->callback([&] {
    action = [&] {
      const double ratio = spuc_bound(n_spuc, n_pdc, p_spuc, p_pdc);
      const double factor = spuc_suppression_factor(ratio);
      return json{{"command", "spuc"},
                  {"ratio", ratio},
                  {"suppression_factor", std::isinf(factor) ? json(nullptr) : json(factor)},
                  {"infinite_suppression", std::isinf(factor)}};
    };
  });

  // dbb
  auto* dbb = app.add_subcommand("dbb", "Poisson significance of same-semiplane double-slit coincidences");
  std::uint64_t observed = 0;
  double background = 0;
  dbb->add_option("--observed", observed, "Observed same-semiplane coincidences, counts")->required();
  dbb->add_option("--background", background, "Expected background coincidences in the same interval, counts")
      ->required()
      ->check(CLI::NonNegativeNumber);
  dbb->callback([&] {
    action = [&] {
      const double log_p = poisson_upper_tail_log(observed, background);
      return json{{"command", "dbb"},
                  {"observed", observed},
                  {"background_mean", background},
                  {"p_value", std::exp(log_p)},
                  {"log10_p_value", std::isinf(log_p) ? json(nullptr) : json(log_p / std::log(10.0))}};
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    g.seed_given = app.count("--seed") > 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    emit(action(), g, out);
  } catch (const CLI::ValidationError& e) {
    err << "bellsim: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "bellsim: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConvergenceError& e) {
    err << "bellsim: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const BracketError& e) {
    err << "bellsim: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const InvalidArgument& e) {
    err << "bellsim: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace bellsim
