#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "hartree/ensemble.hpp"
#include "hartree/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hartree;

namespace {

// Subcommands other than `run` pin the experiment kind; a config naming a
// different kind is rejected.
ExperimentConfig load_config(const fs::path& path, const std::string& forced_kind) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw FormatError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  if (forced_kind.empty()) {
    const std::string kind = j.value("kind", std::string("single"));
    if (kind != "single" && kind != "ensemble") {
      throw ParameterError("config field 'kind': `run` expects single or ensemble, got '" + kind +
                           "'; use the matching subcommand");
    }
  } else {
    if (j.contains("kind") && j["kind"] != forced_kind) {
      throw ParameterError("config field 'kind': expected '" + forced_kind + "', got '" +
                           j["kind"].dump() + "'");
    }
    j["kind"] = forced_kind;
  }
  return ExperimentConfig::from_json(j);
}

int execute(const fs::path& config, const fs::path& out, const std::string& kind) {
  const ExperimentConfig cfg = load_config(config, kind);
  const RunSet rs = run_experiment(cfg, out);
  std::cout << dump_json(rs.summary.at("aggregate"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized Hartree experiments on a periodic box"};
  app.require_subcommand(1);
  int rc = 0;

  fs::path config, out = "run";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out, "output directory")->capture_default_str();
  };

  struct Entry {
    const char* name;
    const char* help;
    const char* kind;
  };
  const Entry entries[] = {
      {"run", "single trajectory or ensemble", ""},
      {"sweep-nzero", "almost-conservation drift across the N0 ladder", "nzero-sweep"},
      {"tails", "tail statistics of the free randomized evolution", "tail-study"},
      {"check-inequalities", "empirical inequality ratios over field ensembles", "inequality-suite"},
      {"morawetz-audit", "term-by-term Morawetz identity audit", "morawetz-audit"},
  };
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    const std::string kind = e.kind;
    sub->callback([&, kind] { rc = execute(config, out, kind); });
  }

  fs::path run_dir;
  CLI::App* report = app.add_subcommand("report", "aggregate records of a finished run");
  report->add_option("run_dir", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  report->callback([&] {
    std::cout << dump_json(build_report(run_dir));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 3;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up at t=" << e.time() << ": " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
