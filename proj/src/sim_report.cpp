#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "priming/errors.hpp"
#include "priming/simulator.hpp"

namespace priming {

namespace {

using nlohmann::ordered_json;

std::string number(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

ordered_json config_json(const SimConfig& c) {
  return ordered_json{{"n_direct", c.n_direct},
                      {"n_indirect", c.n_indirect},
                      {"m_direct", c.m_direct},
                      {"m_indirect", c.m_indirect},
                      {"d_true_direct", c.d_true_direct},
                      {"d_true_indirect", c.d_true_indirect},
                      {"q_gen", c.q_gen},
                      {"q_analysis", c.q_analysis},
                      {"distribution", std::string(to_string(c.distribution))},
                      {"lognormal_sigma", c.lognormal_sigma},
                      {"pairing", std::string(to_string(c.pairing))},
                      {"reps", c.reps},
                      {"alpha", c.alpha},
                      {"seed", c.seed}};
}

ordered_json outcome_object(const SimOutcome& o) {
  ordered_json j;
  j["reps"] = o.reps;
  j["appropriate_evaluated"] = o.appropriate_evaluated;
  for (auto name : outcome_metric_names()) j[std::string(name)] = metric(o, name);
  return j;
}

}  // namespace

std::string outcome_csv(std::string_view scenario_id, const SimConfig& config,
                        const SimOutcome& outcome, bool header) {
  std::ostringstream out;
  if (header) out << "scenario_id,metric,value,reps,seed\n";
  for (auto name : outcome_metric_names()) {
    if (!outcome.appropriate_evaluated && name.find("appropriate") != std::string_view::npos) {
      continue;
    }
    out << scenario_id << ',' << name << ',' << number(metric(outcome, name)) << ','
        << outcome.reps << ',' << config.seed << '\n';
  }
  return out.str();
}

std::string outcome_json(std::string_view scenario_id, const SimConfig& config,
                         const SimOutcome& outcome) {
  ordered_json j{{"scenario_id", std::string(scenario_id)},
                 {"config", config_json(config)},
                 {"outcome", outcome_object(outcome)}};
  return j.dump(2) + "\n";
}

std::string grid_csv(const GridReport& report) {
  std::ostringstream out;
  out << "n,m,d_true,q,mean_bias_direct,mean_bias_indirect,se_calibration_direct,"
         "se_calibration_indirect,reps,seed\n";
  for (const auto& c : report.cells) {
    out << c.n << ',' << c.m << ',' << number(c.d_true) << ',' << number(c.q) << ','
        << number(c.outcome.mean_bias_direct) << ',' << number(c.outcome.mean_bias_indirect) << ','
        << number(c.outcome.se_calibration_direct) << ','
        << number(c.outcome.se_calibration_indirect) << ',' << report.reps << ','
        << report.seed << '\n';
  }
  return out.str();
}

std::string grid_json(const GridReport& report) {
  ordered_json cells = ordered_json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"n", c.n},
                     {"m", c.m},
                     {"d_true", c.d_true},
                     {"q", c.q},
                     {"mean_bias_direct", c.outcome.mean_bias_direct},
                     {"mean_bias_indirect", c.outcome.mean_bias_indirect},
                     {"se_calibration_direct", c.outcome.se_calibration_direct},
                     {"se_calibration_indirect", c.outcome.se_calibration_indirect}});
  }
  ordered_json j{{"reps", report.reps}, {"seed", report.seed}, {"cells", cells}};
  return j.dump(2) + "\n";
}

std::string config_to_json(const SimConfig& config) { return config_json(config).dump(2) + "\n"; }

SimConfig config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("config: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::parse, "config: top level must be an object");
  SimConfig c;
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception&) {
      fail(ErrorKind::parse, std::string("config: field '") + key + "' has the wrong type");
    }
  };
  get("n_direct", c.n_direct);
  get("n_indirect", c.n_indirect);
  get("m_direct", c.m_direct);
  get("m_indirect", c.m_indirect);
  get("d_true_direct", c.d_true_direct);
  get("d_true_indirect", c.d_true_indirect);
  get("q_gen", c.q_gen);
  get("q_analysis", c.q_analysis);
  get("lognormal_sigma", c.lognormal_sigma);
  get("reps", c.reps);
  get("alpha", c.alpha);
  get("seed", c.seed);
  std::string text_value;
  if (j.contains("distribution")) {
    get("distribution", text_value);
    if (text_value == "normal") c.distribution = Family::normal;
    else if (text_value == "lognormal") c.distribution = Family::lognormal;
    else fail(ErrorKind::parse, "config: distribution must be 'normal' or 'lognormal'");
  }
  if (j.contains("pairing")) {
    get("pairing", text_value);
    if (text_value == "within_subject") c.pairing = Pairing::within_subject;
    else if (text_value == "between_groups") c.pairing = Pairing::between_groups;
    else fail(ErrorKind::parse, "config: pairing must be 'within_subject' or 'between_groups'");
  }
  return c;
}

}  // namespace priming
