#include "priming/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "priming/errors.hpp"
#include "priming/rng.hpp"

namespace priming {

namespace {

// Location of the log-normal indirect measure; t statistics are invariant to it.
constexpr double kLogLocation = 6.2;

struct OneSampleT {
  double t = 0.0;
  double p = 1.0;
};

OneSampleT one_sample_t(const std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    if (mean == 0.0) return {0.0, 1.0};
    return {std::copysign(HUGE_VAL, mean), 0.0};
  }
  const double t = mean / (sd / std::sqrt(n));
  const double p = 2.0 * student_t_cdf(-std::abs(t), n - 1.0).value();
  return {t, std::min(p, 1.0)};
}

void fill_direct(SeededRng& rng, int m, double d_i, std::vector<DirectTrial>& out) {
  out.reserve(2 * static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const bool above = sample_normal(rng, 0.5 * d_i, 1.0) > 0.0;
    out.push_back({Stimulus::a, above ? Stimulus::a : Stimulus::b});
  }
  for (int k = 0; k < m; ++k) {
    const bool above = sample_normal(rng, -0.5 * d_i, 1.0) > 0.0;
    out.push_back({Stimulus::b, above ? Stimulus::a : Stimulus::b});
  }
}

void fill_indirect(SeededRng& rng, const SimConfig& config, double d_i,
                   std::vector<IndirectTrial>& out) {
  const int m = config.m_indirect;
  out.reserve(2 * static_cast<std::size_t>(m));
  auto draw = [&](double mean) {
    if (config.distribution == Family::normal) return sample_normal(rng, mean, 1.0);
    const double s = config.lognormal_sigma;
    return sample_lognormal(rng, kLogLocation + s * mean, s);
  };
  for (int k = 0; k < m; ++k) out.push_back({Condition::congruent, draw(-0.5 * d_i)});
  for (int k = 0; k < m; ++k) out.push_back({Condition::incongruent, draw(0.5 * d_i)});
}

struct RepResult {
  bool direct_significant = false;
  bool indirect_significant = false;
  bool standard_reasoning = false;
  Verdict reanalysis = Verdict::inconclusive;
  Verdict appropriate = Verdict::inconclusive;
  double d_direct = 0.0;
  double se_direct = 0.0;
  double d_indirect = 0.0;
  double se_indirect = 0.0;
};

std::vector<double> indirect_sensitivities(const TrialDataset& dataset) {
  std::vector<double> out;
  for (const auto& p : dataset.participants) {
    if (!p.indirect.empty()) out.push_back(median_split_dprime(p.indirect).dprime.value);
  }
  return out;
}

RepResult run_rep(const SimConfig& config, std::uint64_t rep, bool appropriate) {
  const TrialDataset dataset = generate_dataset(config, rep);
  const TraditionalResult trad = run_traditional(dataset, config.alpha);

  RepResult r;
  r.direct_significant = trad.p_direct < config.alpha;
  r.indirect_significant = trad.p_indirect < config.alpha;
  r.standard_reasoning = trad.standard_reasoning_claims_ita;

  const double q2 = config.q_analysis * config.q_analysis;
  const double mean_direct =
      std::accumulate(trad.direct_dprimes.begin(), trad.direct_dprimes.end(), 0.0) /
      static_cast<double>(trad.direct_dprimes.size());
  const auto direct =
      estimate_direct_from_dprime(DPrime(mean_direct), config.n_direct, config.m_direct, q2);
  const auto indirect =
      estimate_indirect_from_t(trad.t_indirect, config.n_indirect, config.m_indirect, q2);
  r.reanalysis = difference(direct, indirect, config.alpha).verdict;
  r.d_direct = direct.d_est;
  r.se_direct = direct.se;
  r.d_indirect = indirect.d_est;
  r.se_indirect = indirect.se;

  if (appropriate) {
    const auto indirect_d = indirect_sensitivities(dataset);
    r.appropriate =
        compare_sensitivities(trad.direct_dprimes, indirect_d, config.pairing, config.alpha)
            .difference.verdict;
  }
  return r;
}

std::vector<RepResult> run_reps(const SimConfig& config, const SimOptions& options) {
  const auto reps = static_cast<std::size_t>(config.reps);
  std::vector<RepResult> results(reps);
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::min<std::size_t>(reps, 256)));

  std::mutex error_mutex;
  std::size_t failed_rep = reps;
  std::string failure;

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        results[i] = run_rep(config, i, options.run_appropriate);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (i < failed_rep) {
          failed_rep = i;
          failure = e.what();
        }
        return;
      }
    }
  };

  if (threads == 1) {
    work(0, reps);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (reps + threads - 1) / threads;
    for (std::size_t begin = 0; begin < reps; begin += chunk) {
      pool.emplace_back(work, begin, std::min(reps, begin + chunk));
    }
    for (auto& t : pool) t.join();
  }
  if (failed_rep < reps) {
    fail(ErrorKind::simulation, "repetition " + std::to_string(failed_rep) + " (seed " +
                                    std::to_string(config.seed) + ") failed: " + failure);
  }
  return results;
}

double rate(const std::vector<RepResult>& results, auto pred) {
  const auto hits = std::count_if(results.begin(), results.end(), pred);
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  double rms_se = 0.0;
};

Moments moments(const std::vector<RepResult>& results, double RepResult::*est,
                double RepResult::*se) {
  const auto n = static_cast<double>(results.size());
  double sum = 0.0, se2 = 0.0;
  for (const auto& r : results) {
    sum += r.*est;
    se2 += (r.*se) * (r.*se);
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& r : results) ss += (r.*est - mean) * (r.*est - mean);
  const double sd = results.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, sd, std::sqrt(se2 / n)};
}

}  // namespace

void validate(const SimConfig& c) {
  auto bad = [](const std::string& what) { fail(ErrorKind::usage, "invalid simulation config: " + what); };
  if (c.reps < 1) bad("reps must be >= 1");
  if (c.n_direct < 2 || c.n_indirect < 2) bad("need at least 2 participants per task");
  if (c.n_indirect < 4) bad("indirect reanalysis needs at least 4 participants");
  if (c.m_direct < 1 || c.m_indirect < 1) bad("trials per condition must be >= 1");
  if (!(c.q_gen >= 0.0) || !(c.q_analysis >= 0.0)) bad("q must be >= 0");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) bad("alpha must lie in (0, 1)");
  if (!(c.lognormal_sigma > 0.0)) bad("lognormal_sigma must be > 0");
  if (!std::isfinite(c.d_true_direct) || !std::isfinite(c.d_true_indirect)) {
    bad("true sensitivities must be finite");
  }
  if (c.pairing == Pairing::within_subject && c.n_direct != c.n_indirect) {
    bad("within-subject designs need n_direct == n_indirect");
  }
}

TrialDataset generate_dataset(const SimConfig& config, std::uint64_t rep_index) {
  validate(config);
  SeededRng rng(config.seed, rep_index);
  TrialDataset data;
  data.pairing = config.pairing;

  auto add_direct = [&](ParticipantData& p) {
    const double d_i = sample_normal(rng, config.d_true_direct, config.q_gen);
    fill_direct(rng, config.m_direct, d_i, p.direct);
  };
  auto add_indirect = [&](ParticipantData& p) {
    const double d_i = sample_normal(rng, config.d_true_indirect, config.q_gen);
    fill_indirect(rng, config, d_i, p.indirect);
  };

  if (config.pairing == Pairing::within_subject) {
    data.participants.resize(static_cast<std::size_t>(config.n_direct));
    for (std::size_t i = 0; i < data.participants.size(); ++i) {
      auto& p = data.participants[i];
      p.id = "P" + std::to_string(i + 1);
      add_direct(p);
      add_indirect(p);
    }
  } else {
    for (int i = 0; i < config.n_direct; ++i) {
      auto& p = data.participants.emplace_back();
      p.id = "D" + std::to_string(i + 1);
      add_direct(p);
    }
    for (int i = 0; i < config.n_indirect; ++i) {
      auto& p = data.participants.emplace_back();
      p.id = "I" + std::to_string(i + 1);
      add_indirect(p);
    }
  }
  return data;
}

TraditionalResult run_traditional(const TrialDataset& dataset, double alpha) {
  TraditionalResult r;
  for (const auto& p : dataset.participants) {
    if (!p.direct.empty()) r.direct_dprimes.push_back(direct_dprime(p.direct).value);
    if (p.indirect.empty()) continue;
    double sum_c = 0.0, sum_i = 0.0;
    int n_c = 0, n_i = 0;
    for (const auto& t : p.indirect) {
      if (t.condition == Condition::congruent) {
        sum_c += t.measure;
        ++n_c;
      } else {
        sum_i += t.measure;
        ++n_i;
      }
    }
    if (n_c == 0 || n_i == 0) {
      fail(ErrorKind::degenerate_input, "participant '" + p.id + "' lacks an indirect condition");
    }
    r.indirect_effects.push_back(sum_i / n_i - sum_c / n_c);
  }
  if (r.direct_dprimes.size() < 2 || r.indirect_effects.size() < 2) {
    fail(ErrorKind::insufficient_data, "traditional analysis needs at least 2 participants per task");
  }
  const auto direct = one_sample_t(r.direct_dprimes);
  const auto indirect = one_sample_t(r.indirect_effects);
  r.t_direct = direct.t;
  r.p_direct = direct.p;
  r.t_indirect = indirect.t;
  r.p_indirect = indirect.p;
  r.standard_reasoning_claims_ita = r.p_direct >= alpha && r.p_indirect < alpha;
  return r;
}

const std::vector<std::string_view>& outcome_metric_names() {
  static const std::vector<std::string_view> names = {
      "rate_direct_significant",  "rate_indirect_significant",   "rate_standard_reasoning_ita",
      "rate_reanalysis_ita",      "rate_reanalysis_dta",         "rate_reanalysis_difference",
      "rate_appropriate_ita",     "rate_appropriate_dta",        "rate_appropriate_difference",
      "mean_estimate_direct",     "mean_estimate_indirect",      "mean_bias_direct",
      "mean_bias_indirect",       "sd_estimate_direct",          "sd_estimate_indirect",
      "rms_se_direct",            "rms_se_indirect",             "se_calibration_direct",
      "se_calibration_indirect"};
  return names;
}

double metric(const SimOutcome& o, std::string_view name) {
  const double values[] = {
      o.rate_direct_significant, o.rate_indirect_significant, o.rate_standard_reasoning_ita,
      o.rate_reanalysis_ita,     o.rate_reanalysis_dta,       o.rate_reanalysis_difference,
      o.rate_appropriate_ita,    o.rate_appropriate_dta,      o.rate_appropriate_difference,
      o.mean_estimate_direct,    o.mean_estimate_indirect,    o.mean_bias_direct,
      o.mean_bias_indirect,      o.sd_estimate_direct,        o.sd_estimate_indirect,
      o.rms_se_direct,           o.rms_se_indirect,           o.se_calibration_direct,
      o.se_calibration_indirect};
  const auto& names = outcome_metric_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) fail(ErrorKind::usage, "unknown metric '" + std::string(name) + "'");
  return values[it - names.begin()];
}

SimOutcome run_simulation(const SimConfig& config, const SimOptions& options) {
  validate(config);
  const auto results = run_reps(config, options);

  SimOutcome o;
  o.reps = config.reps;
  o.rate_direct_significant = rate(results, [](const RepResult& r) { return r.direct_significant; });
  o.rate_indirect_significant =
      rate(results, [](const RepResult& r) { return r.indirect_significant; });
  o.rate_standard_reasoning_ita =
      rate(results, [](const RepResult& r) { return r.standard_reasoning; });
  o.rate_reanalysis_ita =
      rate(results, [](const RepResult& r) { return r.reanalysis == Verdict::ita; });
  o.rate_reanalysis_dta =
      rate(results, [](const RepResult& r) { return r.reanalysis == Verdict::dta; });
  o.rate_reanalysis_difference = o.rate_reanalysis_ita + o.rate_reanalysis_dta;
  o.appropriate_evaluated = options.run_appropriate;
  if (options.run_appropriate) {
    o.rate_appropriate_ita =
        rate(results, [](const RepResult& r) { return r.appropriate == Verdict::ita; });
    o.rate_appropriate_dta =
        rate(results, [](const RepResult& r) { return r.appropriate == Verdict::dta; });
    o.rate_appropriate_difference = o.rate_appropriate_ita + o.rate_appropriate_dta;
  }

  const auto md = moments(results, &RepResult::d_direct, &RepResult::se_direct);
  const auto mi = moments(results, &RepResult::d_indirect, &RepResult::se_indirect);
  o.mean_estimate_direct = md.mean;
  o.mean_estimate_indirect = mi.mean;
  o.mean_bias_direct = md.mean - config.d_true_direct;
  o.mean_bias_indirect = mi.mean - config.d_true_indirect;
  o.sd_estimate_direct = md.sd;
  o.sd_estimate_indirect = mi.sd;
  o.rms_se_direct = md.rms_se;
  o.rms_se_indirect = mi.rms_se;
  o.se_calibration_direct = md.rms_se - md.sd;
  o.se_calibration_indirect = mi.rms_se - mi.sd;
  return o;
}

SimConfig named_scenario(int id) {
  SimConfig c;
  c.q_gen = 0.15;
  c.q_analysis = 0.15;
  c.reps = 10000;
  c.alpha = 0.05;
  c.seed = 42;
  switch (id) {
    case 1:
    case 2:
      c.n_direct = 7;
      c.n_indirect = 12;
      c.m_direct = 56;
      c.m_indirect = 256;
      c.d_true_direct = id == 1 ? 0.25 : 0.0;
      c.d_true_indirect = 0.25;
      c.pairing = Pairing::between_groups;
      return c;
    case 3:
      c.n_direct = c.n_indirect = 12;
      c.m_direct = c.m_indirect = 256;
      c.d_true_direct = 0.0;
      c.d_true_indirect = 0.25;
      c.pairing = Pairing::within_subject;
      return c;
    case 4:
    case 5:
    case 6:
      c.n_direct = c.n_indirect = 24;
      c.m_direct = c.m_indirect = 128;
      c.d_true_direct = 0.0;
      c.d_true_indirect = 0.25;
      c.pairing = Pairing::within_subject;
      if (id == 5) c.q_gen = 0.1;
      if (id == 6) c.q_gen = 0.3;
      return c;
    default:
      fail(ErrorKind::usage, "unknown scenario " + std::to_string(id) + " (expected 1..6)");
  }
}

std::vector<PublishedRate> published_rates(int scenario_id) {
  switch (scenario_id) {
    case 1:
      return {{"rate_direct_significant", 0.488, 0.015},
              {"rate_indirect_significant", 0.995, 0.01},
              {"rate_standard_reasoning_ita", 0.486, 0.02},
              {"rate_reanalysis_difference", 0.047, 0.01}};
    case 2:
      return {{"rate_reanalysis_ita", 0.462, 0.02}, {"rate_appropriate_ita", 0.459, 0.02}};
    case 3:
      return {{"rate_reanalysis_ita", 0.783, 0.02}, {"rate_appropriate_ita", 0.842, 0.02}};
    case 4:
      return {{"rate_reanalysis_ita", 0.965, 0.015}, {"rate_appropriate_ita", 0.970, 0.015}};
    case 5:
      return {{"rate_reanalysis_ita", 0.996, 0.005}, {"rate_appropriate_ita", 0.992, 0.01}};
    case 6:
      return {{"rate_reanalysis_ita", 0.622, 0.02}, {"rate_appropriate_ita", 0.692, 0.02}};
    default:
      fail(ErrorKind::usage, "unknown scenario " + std::to_string(scenario_id));
  }
}

double estimate_power(const SimConfig& config, PowerAnalysis analysis, const SimOptions& options) {
  SimOptions opts = options;
  opts.run_appropriate = analysis == PowerAnalysis::appropriate;
  const auto o = run_simulation(config, opts);
  return analysis == PowerAnalysis::appropriate ? o.rate_appropriate_ita : o.rate_reanalysis_ita;
}

double GridCell::abs_bias_direct() const { return std::abs(outcome.mean_bias_direct); }
double GridCell::abs_bias_indirect() const { return std::abs(outcome.mean_bias_indirect); }
double GridCell::abs_se_calibration_direct() const {
  return std::abs(outcome.se_calibration_direct);
}
double GridCell::abs_se_calibration_indirect() const {
  return std::abs(outcome.se_calibration_indirect);
}

GridReport run_calibration_grid(const std::vector<int>& n_set, const std::vector<int>& m_set,
                                const std::vector<double>& d_set,
                                const std::vector<double>& q_set, int reps, std::uint64_t seed,
                                const SimOptions& options) {
  if (n_set.empty() || m_set.empty() || d_set.empty() || q_set.empty()) {
    fail(ErrorKind::usage, "calibration grid needs nonempty parameter sets");
  }
  GridReport report;
  report.reps = reps;
  report.seed = seed;
  SimOptions opts = options;
  opts.run_appropriate = false;
  std::uint64_t index = 0;
  for (int n : n_set) {
    for (int m : m_set) {
      for (double d : d_set) {
        for (double q : q_set) {
          SimConfig c;
          c.n_direct = c.n_indirect = n;
          c.m_direct = c.m_indirect = m;
          c.d_true_direct = c.d_true_indirect = d;
          c.q_gen = c.q_analysis = q;
          c.pairing = Pairing::within_subject;
          c.reps = reps;
          c.seed = mix_seed(seed, index++);
          report.cells.push_back({n, m, d, q, run_simulation(c, opts)});
        }
      }
    }
  }
  return report;
}

}  // namespace priming
