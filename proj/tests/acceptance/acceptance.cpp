// Acceptance runner. One PASS/FAIL line per criterion, followed by the
// measured values. Tolerances are fixed here.
//
//   priming_acceptance                 all criteria
//   priming_acceptance --criterion N   one criterion (exit 1 on FAIL)
//   priming_acceptance --full-grid     criterion 7 at 10,000 reps per cell

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "priming/classifier.hpp"
#include "priming/estimators.hpp"
#include "priming/registry.hpp"
#include "priming/rng.hpp"
#include "priming/sdt.hpp"
#include "priming/simulator.hpp"
#include "priming/trial_io.hpp"

using namespace priming;

namespace {

bool g_full_grid = false;

class Report {
 public:
  bool check(bool ok, const std::string& what) {
    lines_.push_back(std::string(ok ? "  ok   " : "  FAIL ") + what);
    passed_ = passed_ && ok;
    return ok;
  }
  bool near(double got, double want, double tol, const std::string& what) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s: %.5f (target %.5f +/- %.4g)", what.c_str(), got, want, tol);
    return check(std::abs(got - want) <= tol, buf);
  }
  void note(const std::string& text) { lines_.push_back("  note " + text); }
  bool passed() const { return passed_; }
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  bool passed_ = true;
  std::vector<std::string> lines_;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void criterion_1(Report& r) {
  r.near(kappa(12, 256, 0.0225), 0.047, 0.001, "kappa(12, 256, 0.0225)");
}

void criterion_2(Report& r) {
  const auto indirect = estimate_indirect_from_t(6.16, 12, 256, kDefaultQ2);
  const auto direct = estimate_direct_from_dprime(DPrime(0.2), 7, 56, kDefaultQ2);
  const auto diff = difference(direct, indirect);
  r.near(indirect.d_est, 0.29, 0.005, "indirect d_est");
  r.near(indirect.se, 0.09, 0.005, "indirect SE");
  r.near(direct.se, 0.11, 0.005, "direct SE");
  r.near(diff.d_diff, 0.09, 0.01, "difference");
  r.near(diff.se_diff, 0.14, 0.01, "difference SE");
  r.near(diff.ci_low, -0.18, 0.01, "CI low");
  r.near(diff.ci_high, 0.35, 0.01, "CI high");
  r.check(diff.verdict == Verdict::inconclusive,
          "verdict " + std::string(to_string(diff.verdict)) + " (target inconclusive)");
}

void criterion_3(Report& r) {
  const auto records = load_records(std::string(PRIMING_DATA_DIR) + "/studies.json");
  const auto rows = reanalyze(records, 0.0225);
  const auto printed =
      nlohmann::json::parse(read_text_file(std::string(PRIMING_TEST_DATA_DIR) +
                                           "/appendix_f_printed.json"))["rows"];
  r.check(rows.size() == 44 && printed.size() == 44,
          "44 comparisons (got " + std::to_string(rows.size()) + ")");

  int fidelity_failures = 0, verdict_deviations = 0;
  const double z = 1.959963984540054;
  for (std::size_t i = 0; i < std::min(rows.size(), printed.size()); ++i) {
    const auto& row = rows[i];
    const auto& p = printed[i];
    if (p["study_id"] != row.indirect.study_id || p["row_label"] != row.indirect.row_label) {
      r.check(false, "printed fixture out of order at row " + std::to_string(i + 1));
      return;
    }
    const double pd = p["d_indirect"], pse = p["se_indirect"], pdiff = p["d_diff"],
                 psediff = p["se_diff"];
    const bool ok = std::abs(row.indirect_estimate.d_est - pd) <= 0.005 &&
                    std::abs(row.indirect_estimate.se - pse) <= 0.005 &&
                    std::abs(row.difference.d_diff - pdiff) <= 0.015 &&
                    std::abs(row.difference.se_diff - psediff) <= 0.015;
    const Verdict printed_verdict = verdict_from_interval(pdiff - z * psediff, pdiff + z * psediff);
    const std::string label = row.indirect.study_id + " / " + row.indirect.row_label;
    if (!ok) {
      ++fidelity_failures;
      r.note("row mismatch " + label + ": computed " + fmt(row.indirect_estimate.d_est, 3) +
             " +/- " + fmt(row.indirect_estimate.se, 3) + ", diff " +
             fmt(row.difference.d_diff, 3) + " +/- " + fmt(row.difference.se_diff, 3) +
             "; printed " + fmt(pd, 2) + " +/- " + fmt(pse, 2) + ", diff " + fmt(pdiff, 2) +
             " +/- " + fmt(psediff, 2));
    }
    if (printed_verdict != row.difference.verdict) {
      ++verdict_deviations;
      r.note("verdict deviation " + label + ": computed " +
             std::string(to_string(row.difference.verdict)) + ", from printed values " +
             std::string(to_string(printed_verdict)));
    }
  }
  r.check(fidelity_failures == 0,
          "row fidelity (d_est/SE +/- 0.005, diff/SE +/- 0.015): " +
              std::to_string(44 - fidelity_failures) + " of 44 rows within tolerance");
  r.check(verdict_deviations <= 2, "row-level verdict deviations: " +
                                       std::to_string(verdict_deviations) + " (allowed 2)");

  const auto base = summarize(rows);
  r.check(base.count(Verdict::ita) == 8 && base.count(Verdict::inconclusive) == 35 &&
              base.count(Verdict::dta) == 1,
          "q2 = 0.0225: " + summary_line(base) + " (target ITA 8, inconclusive 35, DTA 1)");
  const auto low = summarize(reanalyze(records, 0.01));
  r.check(low.count(Verdict::ita) == 7 && low.count(Verdict::dta) == 3,
          "q2 = 0.01: " + summary_line(low) + " (target ITA 7, DTA 3)");
}

void criterion_4(Report& r) {
  struct Row {
    const char* study;
    double sigma_effect, sigma_eps, q2_printed, d_printed;
  };
  const Row table[] = {{"Rouder & Haaf", 9.88, 104, 0.009, 0.21},
                       {"replication", 6.70, 78, 0.007, 0.20},
                       {"Miller & Ulrich", 10.78, 92, 0.014, 0.24},
                       {"Jensen", 10.84, 91, 0.014, 0.25},
                       {"Ribeiro et al.", 11.55, 79, 0.021, 0.28},
                       {"assumed", 11.63, 78, 0.0225, 0.29}};
  // SD of individual congruency effects in the reanalysed RT data, M = 256.
  const double sd_observed = 13.5, m = 256;
  for (const auto& row : table) {
    const double q2 = q2_from_variances(row.sigma_effect, row.sigma_eps);
    r.near(q2, row.q2_printed, 0.0005, std::string(row.study) + " q2");
    r.near(estimate_indirect_from_t(6.16, 12, 256, q2).d_est, row.d_printed, 0.005,
           std::string(row.study) + " reanalysed d_est");
  }
  for (int i : {2, 3, 4}) {
    r.near(sigma_effect_from_observed(sd_observed, m, table[i].sigma_eps), table[i].sigma_effect,
           0.02, std::string(table[i].study) + " sigma_effect");
  }
  const double eps = sigma_eps_from_observed(sd_observed, m, 0.0225);
  r.near(eps, 78, 0.5, "assumed sigma_eps (printed to integer)");
  r.near(sigma_effect_from_observed(sd_observed, m, eps), 11.63, 0.02, "assumed sigma_effect");
}

void criterion_5(Report& r) {
  const double table[][3] = {{0.50, 0.000, 0.000}, {0.52, 0.100, 0.100}, {0.54, 0.200, 0.201},
                             {0.56, 0.300, 0.302}, {0.58, 0.400, 0.404}, {0.60, 0.500, 0.507},
                             {0.62, 0.600, 0.611}, {0.64, 0.700, 0.717}, {0.66, 0.800, 0.825},
                             {0.68, 0.900, 0.935}, {0.70, 1.000, 1.049}};
  for (const auto& row : table) {
    const Probability pc(row[0]);
    r.near(dprime_from_accuracy(pc).value, row[2], 0.001, "pc " + fmt(row[0], 2) + " d'");
    r.near(h_approx(pc).value, row[1], 0.001, "pc " + fmt(row[0], 2) + " h");
  }
}

void criterion_6(Report& r) {
  for (int id = 1; id <= 6; ++id) {
    const auto config = named_scenario(id);
    const auto start = std::chrono::steady_clock::now();
    const auto outcome = run_simulation(config);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& p : published_rates(id)) {
      r.near(metric(outcome, p.metric), p.value, p.tolerance,
             "Sim " + std::to_string(id) + " " + p.metric);
    }
    r.note("Sim " + std::to_string(id) + ": " + std::to_string(outcome.reps) + " reps, seed " +
           std::to_string(config.seed) + ", " + std::string(to_string(config.pairing)) + ", ITA/DTA " +
           fmt(outcome.rate_reanalysis_ita) + "/" + fmt(outcome.rate_reanalysis_dta) +
           " reanalysis, " + fmt(outcome.rate_appropriate_ita) + "/" +
           fmt(outcome.rate_appropriate_dta) + " appropriate, " + fmt(secs, 1) + " s");
  }
}

void criterion_7(Report& r) {
  const int reps = g_full_grid ? 10000 : 1000;
  const double scale = g_full_grid ? 1.0 : 3.0;
  const auto grid = run_calibration_grid({5, 10, 20}, {50, 100, 200}, {0.0, 0.1, 0.2, 0.5},
                                         {0.1, 0.15, 0.3}, reps, 42);
  double bias = 0, cal_large = 0, cal_small_indirect = 0, cal_small_direct = 0;
  const GridCell* worst_bias = nullptr;
  for (const auto& c : grid.cells) {
    const double b = std::max(c.abs_bias_direct(), c.abs_bias_indirect());
    if (b > bias) {
      bias = b;
      worst_bias = &c;
    }
    if (c.n >= 10) {
      cal_large = std::max({cal_large, c.abs_se_calibration_direct(), c.abs_se_calibration_indirect()});
    } else {
      cal_small_indirect = std::max(cal_small_indirect, c.abs_se_calibration_indirect());
      cal_small_direct = std::max(cal_small_direct, c.abs_se_calibration_direct());
    }
  }
  r.note(std::to_string(grid.cells.size()) + " cells x " + std::to_string(reps) +
         " reps, tolerances x" + fmt(scale, 0));
  if (worst_bias) {
    r.note("largest bias at N=" + std::to_string(worst_bias->n) + " M=" +
           std::to_string(worst_bias->m) + " d'=" + fmt(worst_bias->d_true, 2) +
           " q=" + fmt(worst_bias->q, 2));
  }
  r.check(bias <= 0.01 * scale, "max |bias| " + fmt(bias) + " <= " + fmt(0.01 * scale, 3));
  r.check(cal_large <= 0.01 * scale,
          "max |SE calibration|, N >= 10: " + fmt(cal_large) + " <= " + fmt(0.01 * scale, 3));
  r.check(cal_small_indirect <= 0.05 * scale, "max |SE calibration|, N = 5 indirect: " +
                                                   fmt(cal_small_indirect) + " <= " +
                                                   fmt(0.05 * scale, 3));
  r.note("max |SE calibration|, N = 5 direct: " + fmt(cal_small_direct));
}

void criterion_8(Report& r) {
  const int per_condition = 500000;
  for (Family family : {Family::normal, Family::lognormal}) {
    for (double d : {0.1, 0.25, 1.0}) {
      // Log-normal: log-scale SD 0.25 around log(500 ms).
      const double sigma = family == Family::normal ? 1.0 : 0.25;
      const double centre = family == Family::normal ? 0.0 : std::log(500.0);
      const double mu1 = centre - 0.5 * d * sigma, mu2 = centre + 0.5 * d * sigma;
      SeededRng rng(mix_seed(8, static_cast<std::uint64_t>(d * 1000)), family == Family::normal ? 0 : 1);
      std::vector<IndirectTrial> trials;
      trials.reserve(2 * per_condition);
      for (int i = 0; i < per_condition; ++i) {
        const double a = sample_normal(rng, mu1, sigma), b = sample_normal(rng, mu2, sigma);
        trials.push_back({Condition::congruent, family == Family::normal ? a : std::exp(a)});
        trials.push_back({Condition::incongruent, family == Family::normal ? b : std::exp(b)});
      }
      const auto split = median_split_dprime(trials);

      // Accuracy of every grid threshold from one sorted pass.
      std::vector<std::pair<double, bool>> sorted;
      sorted.reserve(trials.size());
      for (const auto& t : trials) sorted.emplace_back(t.measure, t.condition == Condition::congruent);
      std::sort(sorted.begin(), sorted.end());
      const double total = static_cast<double>(sorted.size());
      double best = 0.0;
      std::size_t idx = 0, congruent_below = 0, incongruent_below = 0;
      const int steps = 2001;
      for (int k = 0; k < steps; ++k) {
        const double z = -3.0 + 6.0 * k / (steps - 1);
        const double log_thr = 0.5 * (mu1 + mu2) + z * sigma;
        const double thr = family == Family::normal ? log_thr : std::exp(log_thr);
        while (idx < sorted.size() && sorted[idx].first <= thr) {
          (sorted[idx].second ? congruent_below : incongruent_below) += 1;
          ++idx;
        }
        const double acc = (congruent_below + (per_condition - incongruent_below)) / total;
        best = std::max(best, acc);
      }
      const std::string label = std::string(to_string(family)) + " d'=" + fmt(d, 2);
      r.check(best - split.accuracy.value() <= 0.003,
              label + ": best grid accuracy " + fmt(best, 5) + " vs median split " +
                  fmt(split.accuracy.value(), 5) + " (margin 0.003)");
      const double t_star = optimal_threshold(family, mu1, mu2);
      const double offset = family == Family::normal ? split.median - t_star
                                                     : std::log(split.median) - std::log(t_star);
      r.check(std::abs(offset) <= 0.005 * sigma,
              label + ": |median - t*| = " + fmt(std::abs(offset) / sigma, 5) +
                  " sigma (limit 0.005)");
    }
  }
}

void criterion_9(Report& r) {
  struct Null {
    const char* name;
    SimConfig config;
  };
  std::vector<Null> configs;
  configs.push_back({"Sim 1 design (between groups, d' 0.25/0.25)", named_scenario(1)});
  auto replication = named_scenario(4);
  replication.d_true_direct = replication.d_true_indirect = 0.25;
  configs.push_back({"Sim 4 design (within, d' 0.25/0.25)", replication});
  auto balanced = named_scenario(3);
  balanced.d_true_direct = balanced.d_true_indirect = 0.0;
  configs.push_back({"Sim 3 design (within, d' 0/0)", balanced});
  for (const auto& null : configs) {
    const auto o = run_simulation(null.config, {false, 0});
    r.check(o.rate_reanalysis_difference >= 0.04 && o.rate_reanalysis_difference <= 0.06,
            std::string(null.name) + ": reanalysis difference rate " +
                fmt(o.rate_reanalysis_difference) + " in [0.04, 0.06] (ITA " +
                fmt(o.rate_reanalysis_ita) + ", DTA " + fmt(o.rate_reanalysis_dta) + ")");
  }
}

const std::map<int, std::pair<const char*, std::function<void(Report&)>>> kCriteria = {
    {1, {"kappa exactness", criterion_1}},
    {2, {"Dehaene 1998 worked example", criterion_2}},
    {3, {"full reanalysis table fidelity", criterion_3}},
    {4, {"q^2 table", criterion_4}},
    {5, {"h-approximation table", criterion_5}},
    {6, {"published simulation rates", criterion_6}},
    {7, {"bias and SE calibration grid", criterion_7}},
    {8, {"median classifier optimality", criterion_8}},
    {9, {"null calibration", criterion_9}},
};

bool run_criterion(int id) {
  const auto& [name, fn] = kCriteria.at(id);
  Report report;
  const auto start = std::chrono::steady_clock::now();
  try {
    fn(report);
  } catch (const std::exception& e) {
    report.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("criterion %d: %s  %s (%.1f s)\n", id, report.passed() ? "PASS" : "FAIL", name, secs);
  for (const auto& line : report.lines()) std::printf("%s\n", line.c_str());
  std::fflush(stdout);
  return report.passed();
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      const int id = std::atoi(argv[++i]);
      if (!kCriteria.count(id)) {
        std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
        return 2;
      }
      selected.push_back(id);
    } else if (std::strcmp(argv[i], "--full-grid") == 0) {
      g_full_grid = true;
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N] [--full-grid]\n", argv[0]);
      return 2;
    }
  }
  if (selected.empty()) {
    for (const auto& [id, _] : kCriteria) selected.push_back(id);
  }
  bool all = true;
  for (int id : selected) all = run_criterion(id) && all;
  return all ? 0 : 1;
}
