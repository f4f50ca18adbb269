// priming: reanalysis, estimation and simulation front end.
//
// Exit status: 0 success, 1 computation error, 2 usage or input error.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "priming/classifier.hpp"
#include "priming/errors.hpp"
#include "priming/estimators.hpp"
#include "priming/registry.hpp"
#include "priming/simulator.hpp"
#include "priming/trial_io.hpp"

using namespace priming;
using nlohmann::ordered_json;

namespace {

struct Globals {
  bool json = false;
  bool csv = false;
  std::string out_path;
  std::uint64_t seed = 42;
  double q2 = kDefaultQ2;
  bool seed_given = false;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

ordered_json estimate_json(const SensitivityEstimate& e) {
  return {{"source", std::string(to_string(e.source))},
          {"d_est", e.d_est},
          {"se", e.se},
          {"n_participants", e.n_participants},
          {"m_per_condition", e.m_per_condition},
          {"q2", e.q_squared}};
}

ordered_json difference_json(const DifferenceResult& d) {
  return {{"d_diff", d.d_diff},     {"se_diff", d.se_diff},
          {"ci_low", d.ci_low},     {"ci_high", d.ci_high},
          {"alpha", d.alpha},       {"verdict", std::string(to_string(d.verdict))}};
}

std::string estimate_text(const SensitivityEstimate& e) {
  return std::string(to_string(e.source)) + ": d_est = " + fmt(e.d_est) + "  SE = " + fmt(e.se) +
         "  (N = " + std::to_string(e.n_participants) + ", M = " + fmt(e.m_per_condition, 1) +
         ", q2 = " + fmt(e.q_squared) + ")\n";
}

std::string difference_text(const DifferenceResult& d) {
  return "difference (indirect - direct): " + fmt(d.d_diff) + "  SE = " + fmt(d.se_diff) +
         "  CI [" + fmt(d.ci_low) + ", " + fmt(d.ci_high) + "]  verdict: " +
         std::string(to_string(d.verdict)) + "\n";
}

SensitivityEstimate estimate_kind(const std::string& kind, double stat, int n, double trials,
                                  double q2) {
  const double m = trials / 2.0;
  if (kind == "direct-dprime") return estimate_direct_from_dprime(DPrime(stat), n, m, q2);
  if (kind == "direct-accuracy") {
    return estimate_direct_from_accuracy(Probability(stat), n, m, q2);
  }
  if (kind == "indirect-t") return estimate_indirect_from_t(stat, n, m, q2);
  if (kind == "indirect-f") return estimate_indirect_from_f(stat, n, m, q2);
  fail(ErrorKind::usage, "unknown estimate kind '" + kind + "'");
}

std::string simulate_text(const std::string& label, const SimConfig& config,
                          const SimOutcome& outcome, std::optional<int> scenario) {
  std::ostringstream out;
  out << "simulation " << label << ": N " << config.n_direct << "/" << config.n_indirect << ", M "
      << config.m_direct << "/" << config.m_indirect << ", d' " << config.d_true_direct << "/"
      << config.d_true_indirect << ", q_gen " << config.q_gen << ", q_analysis "
      << config.q_analysis << ", " << to_string(config.pairing) << ", "
      << to_string(config.distribution) << ", reps " << outcome.reps << ", seed " << config.seed
      << "\n\n";
  for (auto name : outcome_metric_names()) {
    if (!outcome.appropriate_evaluated && name.find("appropriate") != std::string_view::npos) {
      continue;
    }
    out << "  " << std::left << std::setw(30) << name << fmt(metric(outcome, name)) << "\n";
  }
  if (scenario) {
    out << "\npublished rates";
    if (outcome.reps != 10000) out << " (tolerances assume 10000 reps)";
    out << ":\n";
    for (const auto& p : published_rates(*scenario)) {
      if (!outcome.appropriate_evaluated && p.metric.find("appropriate") != std::string::npos) {
        continue;
      }
      const double got = metric(outcome, p.metric);
      const bool ok = std::abs(got - p.value) <= p.tolerance;
      out << "  " << std::left << std::setw(30) << p.metric << fmt(got) << "  published "
          << fmt(p.value, 3) << " +/- " << fmt(p.tolerance, 3)
          << (ok ? "  within tolerance" : "  OUTSIDE TOLERANCE") << "\n";
    }
  }
  return out.str();
}

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::istringstream cell(item);
    T v{};
    if (!(cell >> v)) fail(ErrorKind::usage, "bad list element '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(ErrorKind::usage, "empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensitivity reanalysis for unconscious priming studies"};
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json", g.json, "Machine-readable JSON output");
  app.add_flag("--csv", g.csv, "Machine-readable CSV output");
  app.add_option("--out", g.out_path, "Write output to this file");
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--q2", g.q2, "Assumed q^2 (default 0.0225)");

  std::function<std::string()> command;

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Sensitivity estimate from a reported statistic");
  std::string est_kind;
  double est_stat = 0.0, est_trials = 0.0;
  int est_n = 0;
  estimate->add_option("kind", est_kind, "direct-dprime | direct-accuracy | indirect-t | indirect-f")
      ->required()
      ->check(CLI::IsMember({"direct-dprime", "direct-accuracy", "indirect-t", "indirect-f"}));
  estimate->add_option("--stat", est_stat, "Reported statistic")->required();
  estimate->add_option("--n", est_n, "Participants")->required();
  estimate->add_option("--trials", est_trials, "Trials per participant, both conditions")->required();
  estimate->callback([&] {
    command = [&] {
      const auto e = estimate_kind(est_kind, est_stat, est_n, est_trials, g.q2);
      if (g.json) return estimate_json(e).dump(2) + "\n";
      return estimate_text(e);
    };
  });

  // diff
  auto* diff = app.add_subcommand("diff", "Compare a direct and an indirect task");
  std::string diff_dkind = "direct-dprime", diff_ikind = "indirect-t";
  double diff_dstat = 0, diff_dtrials = 0, diff_istat = 0, diff_itrials = 0, diff_alpha = 0.05;
  int diff_dn = 0, diff_in = 0;
  diff->add_option("--direct-kind", diff_dkind)
      ->check(CLI::IsMember({"direct-dprime", "direct-accuracy"}));
  diff->add_option("--direct-stat", diff_dstat)->required();
  diff->add_option("--direct-n", diff_dn)->required();
  diff->add_option("--direct-trials", diff_dtrials)->required();
  diff->add_option("--indirect-kind", diff_ikind)->check(CLI::IsMember({"indirect-t", "indirect-f"}));
  diff->add_option("--indirect-stat", diff_istat)->required();
  diff->add_option("--indirect-n", diff_in)->required();
  diff->add_option("--indirect-trials", diff_itrials)->required();
  diff->add_option("--alpha", diff_alpha);
  diff->callback([&] {
    command = [&] {
      const auto d = estimate_kind(diff_dkind, diff_dstat, diff_dn, diff_dtrials, g.q2);
      const auto i = estimate_kind(diff_ikind, diff_istat, diff_in, diff_itrials, g.q2);
      const auto r = difference(d, i, diff_alpha);
      if (g.json) {
        return ordered_json{{"direct", estimate_json(d)},
                            {"indirect", estimate_json(i)},
                            {"difference", difference_json(r)}}
                   .dump(2) + "\n";
      }
      return estimate_text(d) + estimate_text(i) + difference_text(r);
    };
  });

  // reanalyze
  auto* reanalyze_cmd = app.add_subcommand("reanalyze", "Batch reanalysis of a studies fixture");
  std::string fixture = std::string(PRIMING_DATA_DIR) + "/studies.json";
  std::string report_format;
  reanalyze_cmd->add_option("fixture", fixture, "Studies file (.json or .csv)");
  reanalyze_cmd->add_option("--format", report_format, "csv | json | markdown");
  reanalyze_cmd->callback([&] {
    command = [&] {
      const auto rows = reanalyze(load_records(fixture), g.q2);
      const auto summary = summarize(rows);
      std::string format = report_format;
      if (format.empty() && g.json) format = "json";
      if (format.empty() && g.csv) format = "csv";
      if (!format.empty()) return export_report(rows, summary, format);
      std::ostringstream out;
      for (const auto& r : rows) {
        out << std::left << std::setw(22) << r.indirect.study_id << std::setw(42)
            << r.indirect.row_label << " ind " << std::right << std::setw(6)
            << fmt(r.indirect_estimate.d_est, 2) << " +/- " << fmt(r.indirect_estimate.se, 2)
            << "  diff " << std::setw(6) << fmt(r.difference.d_diff, 2) << " +/- "
            << fmt(r.difference.se_diff, 2) << "  " << to_string(r.difference.verdict) << "\n";
      }
      out << "\nq2 = " << g.q2 << ", " << summary.total << " comparisons\n"
          << summary_line(summary) << "\n";
      return out.str();
    };
  });

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo validation run");
  int scenario = 0, reps = 10000;
  unsigned threads = 0;
  std::string config_path, distribution;
  bool no_appropriate = false;
  auto* scen_opt = simulate->add_option("--scenario", scenario, "Named scenario 1..6");
  auto* conf_opt = simulate->add_option("--config", config_path, "JSON SimConfig file");
  scen_opt->excludes(conf_opt);
  auto* reps_opt = simulate->add_option("--reps", reps, "Repetitions (default 10000)");
  simulate->add_option("--threads", threads, "Worker threads (0: all cores)");
  simulate->add_option("--distribution", distribution)->check(CLI::IsMember({"normal", "lognormal"}));
  simulate->add_flag("--no-appropriate", no_appropriate, "Skip the trial-level analysis");

  auto build_config = [&](CLI::App* sub) {
    SimConfig c;
    std::optional<int> id;
    if (!config_path.empty()) {
      c = config_from_json(read_text_file(config_path));
    } else if (sub->count("--scenario")) {
      c = named_scenario(scenario);
      id = scenario;
    } else {
      fail(ErrorKind::usage, "either --scenario or --config is required");
    }
    if (sub->count("--reps") || config_path.empty()) c.reps = reps;
    if (g.seed_given) c.seed = g.seed;
    if (distribution == "lognormal") c.distribution = Family::lognormal;
    if (distribution == "normal") c.distribution = Family::normal;
    return std::pair{c, id};
  };
  (void)reps_opt;

  simulate->callback([&] {
    command = [&] {
      auto [config, id] = build_config(simulate);
      const auto outcome = run_simulation(config, {!no_appropriate, threads});
      const std::string label = id ? std::to_string(*id) : "custom";
      if (g.json) return outcome_json(label, config, outcome);
      if (g.csv) return outcome_csv(label, config, outcome);
      return simulate_text(label, config, outcome, id);
    };
  });

  // power
  auto* power = app.add_subcommand("power", "Power of an analysis for a design");
  std::string analysis = "reanalysis";
  power->add_option("--scenario", scenario, "Named scenario 1..6")->excludes(
      power->add_option("--config", config_path, "JSON SimConfig file"));
  power->add_option("--reps", reps, "Repetitions (default 10000)");
  power->add_option("--threads", threads);
  power->add_option("--analysis", analysis)->check(CLI::IsMember({"reanalysis", "appropriate"}));
  power->callback([&] {
    command = [&] {
      auto [config, id] = build_config(power);
      const auto kind =
          analysis == "appropriate" ? PowerAnalysis::appropriate : PowerAnalysis::reanalysis;
      const double p = estimate_power(config, kind, {true, threads});
      if (g.json) {
        return ordered_json{{"analysis", analysis}, {"power", p}, {"reps", config.reps},
                            {"seed", config.seed}, {"config", ordered_json::parse(config_to_json(config))}}
                   .dump(2) + "\n";
      }
      return "power (" + analysis + "): " + fmt(p) + "  (" + std::to_string(config.reps) +
             " reps, seed " + std::to_string(config.seed) + ")\n";
    };
  });

  // classify
  auto* classify = app.add_subcommand("classify", "Median-split sensitivity from trial data");
  std::string trials_path, histogram_path, pairing_name;
  double classify_alpha = 0.05;
  auto* trials_opt = classify->add_option("--trials", trials_path, "Trial CSV file");
  auto* hist_opt = classify->add_option("--histogram", histogram_path, "Histogram JSON file");
  trials_opt->excludes(hist_opt);
  classify->add_option("--pairing", pairing_name)
      ->check(CLI::IsMember({"within_subject", "between_groups"}));
  classify->add_option("--alpha", classify_alpha);
  classify->callback([&] {
    command = [&]() -> std::string {
      if (!histogram_path.empty()) {
        const auto r = grand_median_dprime(load_histogram_json(histogram_path));
        if (g.json) {
          return ordered_json{{"dprime", r.dprime.value}, {"se", r.se}, {"accuracy", r.accuracy},
                              {"median", r.median}, {"total", r.total}}
                     .dump(2) + "\n";
        }
        return "grand median " + fmt(r.median) + ": accuracy " + fmt(r.accuracy) + ", d' " +
               fmt(r.dprime.value) + " +/- " + fmt(r.se) + " (" + fmt(r.total, 0) + " trials)\n";
      }
      if (trials_path.empty()) fail(ErrorKind::usage, "either --trials or --histogram is required");
      std::optional<Pairing> pairing;
      if (pairing_name == "within_subject") pairing = Pairing::within_subject;
      if (pairing_name == "between_groups") pairing = Pairing::between_groups;
      const auto data = load_trial_csv(trials_path, pairing);
      const auto r = appropriate_analysis(data, classify_alpha);
      if (g.json) {
        auto task = [](const TaskSummary& t) {
          return ordered_json{{"n", t.n}, {"mean_dprime", t.mean_dprime}, {"sd_dprime", t.sd_dprime}};
        };
        return ordered_json{{"pairing", std::string(to_string(data.pairing))},
                            {"direct", task(r.direct)},
                            {"indirect", task(r.indirect)},
                            {"df", r.df},
                            {"difference", difference_json(r.difference)}}
                   .dump(2) + "\n";
      }
      return std::string(to_string(data.pairing)) + "\n" + "direct:   N = " +
             std::to_string(r.direct.n) + ", mean d' " + fmt(r.direct.mean_dprime) + ", SD " +
             fmt(r.direct.sd_dprime) + "\nindirect: N = " + std::to_string(r.indirect.n) +
             ", mean d' " + fmt(r.indirect.mean_dprime) + ", SD " + fmt(r.indirect.sd_dprime) +
             "\ndf = " + fmt(r.df, 2) + "\n" + difference_text(r.difference);
    };
  });

  // kappa
  auto* kappa_cmd = app.add_subcommand("kappa", "kappa constant for N, M and q^2");
  int kappa_n = 0;
  double kappa_trials = 0.0;
  kappa_cmd->add_option("--n", kappa_n)->required();
  kappa_cmd->add_option("--trials", kappa_trials, "Trials per participant, both conditions")->required();
  kappa_cmd->callback([&] {
    command = [&] {
      const double k = kappa(kappa_n, kappa_trials / 2.0, g.q2);
      if (g.json) {
        return ordered_json{{"n", kappa_n}, {"m_per_condition", kappa_trials / 2.0}, {"q2", g.q2},
                            {"kappa", k}}
                   .dump(2) + "\n";
      }
      return fmt(k, 6) + "\n";
    };
  });

  // grid
  auto* grid = app.add_subcommand("grid", "Bias and SE calibration grid");
  std::string n_set = "5,10,20", m_set = "50,100,200", d_set = "0,0.1,0.2,0.5", q_set = "0.1,0.15,0.3";
  int grid_reps = 10000;
  grid->add_option("--n-set", n_set);
  grid->add_option("--m-set", m_set);
  grid->add_option("--d-set", d_set);
  grid->add_option("--q-set", q_set);
  grid->add_option("--reps", grid_reps);
  grid->add_option("--threads", threads);
  grid->callback([&] {
    command = [&] {
      const auto report = run_calibration_grid(parse_list<int>(n_set), parse_list<int>(m_set),
                                               parse_list<double>(d_set), parse_list<double>(q_set),
                                               grid_reps, g.seed, {false, threads});
      if (g.json) return grid_json(report);
      if (g.csv) return grid_csv(report);
      std::ostringstream out;
      double bias = 0, cal10 = 0, cal5 = 0;
      for (const auto& c : report.cells) {
        bias = std::max({bias, c.abs_bias_direct(), c.abs_bias_indirect()});
        const double cal = std::max(c.abs_se_calibration_direct(), c.abs_se_calibration_indirect());
        (c.n >= 10 ? cal10 : cal5) = std::max(c.n >= 10 ? cal10 : cal5, cal);
      }
      out << report.cells.size() << " cells x " << report.reps << " reps, seed " << report.seed
          << "\nmax |bias|: " << fmt(bias) << "\nmax |SE calibration| (N >= 10): " << fmt(cal10)
          << "\nmax |SE calibration| (N < 10): " << fmt(cal5) << "\n";
      return out.str();
    };
  });

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    const std::string output = command();
    if (g.out_path.empty()) {
      std::cout << output;
    } else {
      std::ofstream out(g.out_path, std::ios::binary);
      if (!out) fail(ErrorKind::usage, "cannot write '" + g.out_path + "'");
      out << output;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.is_input_error() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
