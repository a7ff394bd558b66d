// Acceptance runner: one line per criterion, exit code 0 iff all pass.
//
//   oulab_acceptance [--cli PATH] [--criteria 1,2,...] [--seed N] [--report FILE]
//
// Criterion 10 runs the command line tool twice (all-checks, same seed) and
// compares the deterministic parts of the two reports byte for byte, and
// against the in-process report when every criterion was run here.

#include "oulab/verification/acceptance.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace oulab::verification;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

oulab::ojson deterministic_part(const fs::path& p) {
  auto j = oulab::ojson::parse(slurp(p));
  j.erase("header");
  return j;
}

CriterionResult criterion_10(const std::string& cli, std::uint64_t seed, const oulab::ojson* in_process) {
  CriterionResult r{10, "reproducibility", false, 0, 900, oulab::ojson::object()};
  if (cli.empty()) {
    r.details["error"] = "no command line tool given (--cli)";
    return r;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / ("oulab_c10_" + std::to_string(seed));
  fs::create_directories(dir);
  int codes[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path out = dir / ("run" + std::to_string(k) + ".json");
    const std::string cmd = "\"" + cli + "\" all-checks --seed " + std::to_string(seed) + " --output \"" +
                            out.string() + "\" > \"" + (dir / "log.txt").string() + "\" 2>&1";
    codes[k] = std::system(cmd.c_str());
  }
  bool ok = false;
  try {
    const auto a = deterministic_part(dir / "run0.json"), b = deterministic_part(dir / "run1.json");
    const bool same = a.dump() == b.dump();
    r.details["runs_identical"] = same;
    r.details["exit_codes"] = {codes[0], codes[1]};
    ok = same && codes[0] == codes[1];
    if (in_process) {
      const bool match = a.dump() == in_process->dump();
      r.details["matches_in_process"] = match;
      ok = ok && match;
    }
  } catch (const std::exception& e) {
    r.details["error"] = e.what();
  }
  r.pass = ok;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oulab acceptance runner"};
  std::string cli, report;
  std::vector<int> ids{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint64_t seed = kDefaultSeed;
  app.add_option("--cli", cli, "path to the oulab tool (criterion 10)");
  app.add_option("--criteria", ids, "criteria to run")->delimiter(',');
  app.add_option("--seed", seed, "base seed");
  app.add_option("--report", report, "write the JSON report here");
  CLI11_PARSE(app, argc, argv);

  std::vector<int> inproc;
  bool want10 = false;
  for (int id : ids) {
    if (id == 10) want10 = true;
    else inproc.push_back(id);
  }

  std::vector<CriterionResult> results;
  for (int id : inproc) {
    results.push_back(run_criterion(id, seed));
    std::cout << summary_line(results.back()) << std::endl;
  }
  const oulab::ojson det = criteria_report(results, seed);
  if (want10) {
    const bool full = inproc.size() == 9;
    results.push_back(criterion_10(cli, seed, full ? &det : nullptr));
    std::cout << summary_line(results.back()) << std::endl;
  }

  bool all = true;
  for (const auto& r : results) all = all && r.pass && r.within_budget();
  if (!report.empty()) {
    oulab::ojson j = criteria_report(results, seed);
    j["header"] = run_header(results);
    std::ofstream(report) << j.dump(2) << "\n";
  }
  std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << std::endl;
  return all ? 0 : 1;
}
