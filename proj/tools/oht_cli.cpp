// oht: command-line front end.
//
//   oht detect      --panel FILE --lambda X [--alphabet a,b,...] [--scores]
//   oht theory      --scenario FILE --set 1,3 [--epsilon E] [--n 100,300]
//                   [--lambda-grid lo:hi:steps --out curve.csv]
//   oht exponent    --scenario FILE --set 1 --lambda-grid lo:hi:steps [--out F]
//   oht simulate    --spec FILE [--trials N] [--seed S] [--lambda X|auto:E]
//                   [--out report.csv]
//   oht paper-suite [--out-dir DIR] [--quick] [--seed S]
//
// Exit status: 0 success, 1 failed check, 2 usage or validation error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oht/acceptance.hpp"
#include "oht/detector.hpp"
#include "oht/io.hpp"
#include "oht/large_deviations.hpp"
#include "oht/montecarlo.hpp"
#include "oht/theory.hpp"

namespace {

constexpr int kCheckFailure = 1;
constexpr int kUsageError = 2;

// Writes to `path`, or stdout when it is empty or "-".
void with_output(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw oht::Error(oht::ErrorKind::InvalidArgument, "--out: cannot write '" + path + "'");
  body(out);
}

std::optional<oht::Alphabet> parse_alphabet(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text.find_first_not_of("0123456789") == std::string::npos) return oht::Alphabet(std::stoul(text));
  std::vector<std::string> labels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) labels.push_back(item);
  return oht::Alphabet(labels);
}

oht::Scenario load_scenario(const std::string& path) {
  return oht::io::scenario_from_json(oht::io::parse_json(oht::io::read_file(path), path));
}

std::vector<std::size_t> parse_lengths(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos || std::stoull(item) == 0)
      throw oht::Error(oht::ErrorKind::ParseError, "--n: expected positive integers, got '" + item + "'");
    out.push_back(std::stoull(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outlier hypothesis testing: detection, theory, exponents and simulation"};
  app.require_subcommand(1);

  struct {
    std::string panel, alphabet;
    double lambda = 0.0;
    bool scores = false;
  } detect;
  auto* detect_cmd = app.add_subcommand("detect", "Run the threshold test on a panel of sequences");
  detect_cmd->add_option("--panel", detect.panel, "Panel file (text lines or JSON array)")->required();
  detect_cmd->add_option("--lambda", detect.lambda, "Threshold, > 0")->required();
  detect_cmd->add_option("--alphabet", detect.alphabet, "Alphabet size or comma-separated labels");
  detect_cmd->add_flag("--scores", detect.scores, "Include every hypothesis score");

  struct {
    std::string scenario, set, n, grid, out;
    double epsilon = 0.0;
  } theory;
  auto* theory_cmd = app.add_subcommand("theory", "GD values, covariance, thresholds and false-reject bounds");
  theory_cmd->add_option("--scenario", theory.scenario, "Scenario JSON")->required();
  theory_cmd->add_option("--set", theory.set, "True outlier set, e.g. 1,3")->required();
  theory_cmd->add_option("--epsilon", theory.epsilon, "Target false-reject level for L* and lambda*");
  theory_cmd->add_option("--n", theory.n, "Comma-separated sequence lengths");
  theory_cmd->add_option("--lambda-grid", theory.grid, "lo:hi:steps for the bound curve");
  theory_cmd->add_option("--out", theory.out, "Bound curve CSV (lambda,n,bound)");

  struct {
    std::string scenario, set, grid, out;
  } exponent;
  auto* exponent_cmd = app.add_subcommand("exponent", "False-reject exponent over a threshold grid");
  exponent_cmd->add_option("--scenario", exponent.scenario, "Scenario JSON")->required();
  exponent_cmd->add_option("--set", exponent.set, "True outlier set")->required();
  exponent_cmd->add_option("--lambda-grid", exponent.grid, "lo:hi:steps")->required();
  exponent_cmd->add_option("--out", exponent.out, "CSV output (default stdout)");

  struct {
    std::string spec, lambda, out;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
  } simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo error estimates against the bounds");
  simulate_cmd->add_option("--spec", simulate.spec, "Experiment spec JSON")->required();
  simulate_cmd->add_option("--trials", simulate.trials, "Override trials per cell");
  simulate_cmd->add_option("--seed", simulate.seed, "Override the seed");
  simulate_cmd->add_option("--lambda", simulate.lambda, "Override lambda: a number or auto:<epsilon>");
  simulate_cmd->add_option("--out", simulate.out, "Report CSV (default stdout)");

  oht::acceptance::SuiteOptions suite;
  std::string out_dir = "paper-suite";
  auto* suite_cmd = app.add_subcommand("paper-suite", "Run every acceptance check");
  suite_cmd->add_option("--out-dir", out_dir, "Directory for CSV files and summary.txt");
  suite_cmd->add_flag("--quick", suite.quick, "Reduced budgets (smoke run)");
  suite_cmd->add_option("--seed", suite.seed, "Base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*detect_cmd) {
      const auto panel = oht::io::parse_panel(oht::io::read_file(detect.panel), parse_alphabet(detect.alphabet));
      std::vector<oht::EmpiricalDistribution> emp;
      for (const auto& s : panel.sequences) emp.push_back(oht::empirical(s, panel.alphabet));
      const auto space = oht::enumerate(emp.size());
      const auto table = oht::score_all(emp, space);
      auto j = oht::io::verdict_json(oht::decide(table, detect.lambda));
      if (detect.scores) {
        j["scores"] = oht::io::ordered_json::array();
        for (std::size_t k = 0; k < space.size(); ++k)
          j["scores"].push_back({{"set", oht::io::to_json(space[k])}, {"score", table.score(k)}});
      }
      std::cout << j.dump() << "\n";
      return 0;
    }

    if (*theory_cmd) {
      const auto sc = load_scenario(theory.scenario);
      const auto B = oht::io::parse_outlier_set(theory.set, sc.M());
      const auto p = oht::profile(B, sc);
      auto j = oht::io::profile_json(p);
      std::vector<std::size_t> lengths;
      if (!theory.n.empty()) lengths = parse_lengths(theory.n);
      if (theory.epsilon != 0.0) {
        if (!(theory.epsilon > 0.0 && theory.epsilon < 1.0))
          throw oht::Error(oht::ErrorKind::InvalidArgument, "--epsilon must lie in (0, 1)");
        const auto L = oht::l_star(theory.epsilon, p);
        j["epsilon"] = theory.epsilon;
        j["l_star"] = L.value;
        j["l_star_degenerate"] = L.degenerate;
        j["lambda_star"] = oht::io::ordered_json::array();
        for (std::size_t n : lengths) {
          const double lambda = p.gd_min + L.value / std::sqrt(static_cast<double>(n));
          j["lambda_star"].push_back({{"n", n}, {"lambda", lambda}});
        }
      }
      for (const auto& w : sc.warnings()) j["warnings"].push_back(w);
      std::cout << j.dump(2) << "\n";
      if (!theory.grid.empty()) {
        if (lengths.empty()) throw oht::Error(oht::ErrorKind::InvalidArgument, "--lambda-grid needs --n");
        const auto grid = oht::io::parse_lambda_grid(theory.grid);
        with_output(theory.out.empty() ? "theory_curve.csv" : theory.out, [&](std::ostream& out) {
          out << "lambda,n,bound\n";
          for (std::size_t n : lengths)
            for (double lambda : grid)
              out << oht::io::format_double(lambda) << "," << n << ","
                  << oht::io::format_double(oht::false_reject_bound(p, lambda, static_cast<double>(n))) << "\n";
        });
      }
      return 0;
    }

    if (*exponent_cmd) {
      const auto sc = load_scenario(exponent.scenario);
      const auto B = oht::io::parse_outlier_set(exponent.set, sc.M());
      const auto grid = oht::io::parse_lambda_grid(exponent.grid);
      with_output(exponent.out, [&](std::ostream& out) {
        out << "lambda,ld_value,achieving_pair,feasible\n";
        for (double lambda : grid) {
          const auto s = oht::ld_exponent(B, sc, lambda);
          out << oht::io::format_double(lambda) << "," << oht::io::format_double(s.value) << ","
              << (s.pair ? s.pair->first.to_string(';') + "|" + s.pair->second.to_string(';') : "") << ","
              << (s.feasible ? "true" : "false") << "\n";
        }
      });
      return 0;
    }

    if (*simulate_cmd) {
      auto j = oht::io::parse_json(oht::io::read_file(simulate.spec), simulate.spec);
      if (simulate.trials) j["trials"] = *simulate.trials;
      if (simulate.seed) j["seed"] = *simulate.seed;
      if (!simulate.lambda.empty()) j["lambda"] = simulate.lambda;
      const auto spec = oht::io::experiment_from_json(j);
      const auto report = oht::estimate(spec);
      with_output(simulate.out, [&](std::ostream& out) { oht::io::write_report_csv(report, out); });
      return 0;
    }

    if (*suite_cmd) {
      suite.out_dir = out_dir;
      const auto results = oht::acceptance::run_suite(suite, [](const oht::acceptance::CheckResult& r) {
        std::cout << oht::acceptance::format_line(r) << std::endl;
      });
      bool all = true;
      for (const auto& r : results) all = all && r.passed;
      std::cout << (suite.quick ? "mode: smoke\n" : "mode: full\n");
      return all ? 0 : kCheckFailure;
    }
  } catch (const oht::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailure;
  }
  return 0;
}
