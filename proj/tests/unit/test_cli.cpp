#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using Catch::Approx;

namespace {

struct RunResult {
  int status = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(PRIMING_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  while (const std::size_t n = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

const std::string kFixture = std::string(PRIMING_DATA_DIR) + "/studies.json";

}  // namespace

TEST_CASE("cli: estimate", "[cli]") {
  auto r = run("--json estimate indirect-t --stat 6.16 --n 12 --trials 512 --q2 0.0225");
  REQUIRE(r.status == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["d_est"].get<double>() == Approx(0.29).margin(0.005));
  CHECK(j["se"].get<double>() == Approx(0.09).margin(0.005));

  r = run("estimate direct-accuracy --stat 0.5 --n 10 --trials 100 --json");
  REQUIRE(r.status == 0);
  CHECK(nlohmann::json::parse(r.out)["d_est"].get<double>() == Approx(0.0).margin(1e-12));

  r = run("estimate indirect-f --stat 36 --n 10 --trials 480 --json");
  j = nlohmann::json::parse(r.out);
  CHECK(j["d_est"].get<double>() == Approx(0.30).margin(0.005));
  CHECK(j["se"].get<double>() == Approx(0.10).margin(0.005));

  CHECK(run("estimate indirect-t --stat 6.16 --n 12").status == 2);
  CHECK(run("estimate indirect-t --stat 6.16 --n 3 --trials 512").status == 1);
  CHECK(run("estimate direct-dprime --stat 2.7 --n 10 --trials 100").status == 1);
  CHECK(run("frobnicate").status == 2);
}

TEST_CASE("cli: kappa and diff", "[cli]") {
  auto r = run("kappa --n 12 --trials 512 --q2 0.0225");
  REQUIRE(r.status == 0);
  CHECK(std::stod(r.out) == Approx(0.047).margin(0.001));

  r = run("--json diff --direct-stat 0.2 --direct-n 7 --direct-trials 112 --indirect-stat 6.16 "
          "--indirect-n 12 --indirect-trials 512");
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["difference"]["verdict"] == "inconclusive");
  CHECK(j["difference"]["ci_low"].get<double>() == Approx(-0.18).margin(0.01));
}

TEST_CASE("cli: reanalyze", "[cli]") {
  auto r = run("reanalyze --q2 0.0225 " + kFixture);
  REQUIRE(r.status == 0);
  CHECK(r.out.find("ITA: 8  inconclusive: 35  DTA: 1") != std::string::npos);

  r = run("reanalyze --csv " + kFixture);
  REQUIRE(r.status == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 45);

  r = run("--json reanalyze " + kFixture);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["summary"]["ITA"] == 8);

  CHECK(run("reanalyze /nonexistent/studies.json").status == 2);
  CHECK(run("reanalyze --format xml " + kFixture).status == 2);
}

TEST_CASE("cli: simulate is deterministic and parses back", "[cli]") {
  const std::string args = "--json simulate --scenario 1 --reps 200 --seed 9";
  const auto a = run(args);
  const auto b = run(args);
  REQUIRE(a.status == 0);
  CHECK(a.out == b.out);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["config"]["seed"] == 9);
  CHECK(j["outcome"]["reps"] == 200);

  const auto text = run("simulate --scenario 2 --reps 100");
  REQUIRE(text.status == 0);
  CHECK(text.out.find("published rates") != std::string::npos);

  CHECK(run("simulate --scenario 9 --reps 10").status == 2);
  CHECK(run("simulate").status == 2);
}

TEST_CASE("cli: --out writes the file", "[cli]") {
  const auto path = std::filesystem::temp_directory_path() / "priming_cli_out.csv";
  std::filesystem::remove(path);
  const auto r = run("--csv --out " + path.string() + " simulate --scenario 4 --reps 50");
  REQUIRE(r.status == 0);
  CHECK(r.out.empty());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "scenario_id,metric,value,reps,seed");
  std::filesystem::remove(path);
}

TEST_CASE("cli: classify and power", "[cli]") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto hist = dir / "priming_hist.json";
  std::ofstream(hist) << R"({"bin_edges": [0, 1, 2], "congruent_counts": [3, 1],
                             "incongruent_counts": [1, 3]})";
  auto r = run("--json classify --histogram " + hist.string());
  REQUIRE(r.status == 0);
  CHECK(nlohmann::json::parse(r.out)["accuracy"].get<double>() == Approx(0.75));

  const auto trials = dir / "priming_trials.csv";
  {
    std::ofstream out(trials);
    out << "participant_id,task,condition,value\n";
    for (int p = 0; p < 3; ++p) {
      for (int k = 0; k < 4; ++k) {
        out << "p" << p << ",direct,A," << (k < 3 ? "A" : "B") << "\n";
        out << "p" << p << ",direct,B," << (k < 1 ? "A" : "B") << "\n";
        out << "p" << p << ",indirect,congruent," << 400 + k + p << "\n";
        out << "p" << p << ",indirect,incongruent," << 410 + k * (p + 1) << "\n";
      }
    }
  }
  r = run("--json classify --trials " + trials.string());
  REQUIRE(r.status == 0);
  CHECK(nlohmann::json::parse(r.out)["pairing"] == "within_subject");
  CHECK(run("classify").status == 2);
  CHECK(run("classify --trials " + (dir / "missing.csv").string()).status == 2);
  std::filesystem::remove(hist);
  std::filesystem::remove(trials);

  r = run("--json power --scenario 4 --reps 100");
  REQUIRE(r.status == 0);
  CHECK(nlohmann::json::parse(r.out)["power"].get<double>() > 0.8);
}

TEST_CASE("cli: grid", "[cli]") {
  const auto r = run("--csv grid --n-set 5 --m-set 50 --d-set 0.1 --q-set 0.15 --reps 1");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("5,50,0.1,0.15,") != std::string::npos);
  CHECK(run("grid --n-set x").status == 2);
}
