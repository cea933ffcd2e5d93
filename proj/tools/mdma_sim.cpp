// mdma_sim: command-line front end for the MDMA experiments.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mdma/acquisition.hpp"
#include "mdma/beacon.hpp"
#include "mdma/call_setup.hpp"
#include "mdma/experiments.hpp"
#include "mdma/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCheck = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
  bool check = false;
  std::string trace;
  std::string iq;
};

mdma::sim::Scenario load(const Options& o) {
  mdma::sim::Scenario sc = o.config.empty() ? mdma::sim::Scenario{} : mdma::sim::Scenario::from_file(o.config);
  if (o.seed) sc.seed = *o.seed;
  if (o.trials) sc.trials = *o.trials;
  sc.validate();
  return sc;
}

int run(const std::string& name, const Options& o) {
  const auto sc = load(o);
  const auto result = mdma::sim::run_experiment(name, sc);
  if (o.out.empty()) {
    result.write_csv(std::cout);
  } else {
    result.write_csv_file(o.out);
  }
  if (name == "callsetup" && !o.trace.empty()) {
    std::ofstream os(o.trace, std::ios::binary);
    if (!os) throw mdma::ConfigError("cannot open " + o.trace);
    const double threshold = mdma::sim::call_setup_rach_threshold(sc, sc.seed);
    mdma::sim::run_call_setup(sc, mdma::derive_seed(sc.seed, "callsetup", 0), threshold).trace.write(os);
  }
  if (name == "beacon" && !o.iq.empty()) {
    const auto& kb = sc.beacon;
    const auto frame = mdma::control::encode_frame(kb.bch, kb.pch, kb.layout);
    const auto stream = mdma::control::build_beacon_stream(kb.cell_id.value_or(1),
                                                           mdma::control::control_symbols(frame, kb.frames), kb.beacon);
    mdma::control::write_iq(o.iq, stream);
  }
  for (const auto& c : result.checks) {
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
  if (o.check && !result.all_checks_passed()) return kExitCheck;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MDMA link- and protocol-level simulator"};
  app.require_subcommand(1);
  Options opt;
  const char* names[][2] = {{"sir", "two-user / K-user RAKE output SIR"},
                            {"hardening", "SIR spread versus antenna count"},
                            {"ber", "single-user BER versus post-combining SNR"},
                            {"speff", "sum log2(1 + SIR) indicator"},
                            {"beacon", "beacon acquisition Monte Carlo"},
                            {"callsetup", "power-on to release protocol run"}};
  for (const auto& [name, help] : names) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "scenario JSON file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "master seed override");
    sub->add_option("--trials", opt.trials, "trial count override")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out, "CSV output path (stdout when omitted)");
    sub->add_flag("--check", opt.check, "exit 3 when an acceptance threshold is violated");
    if (std::string(name) == "callsetup") sub->add_option("--trace", opt.trace, "protocol trace of trial 0");
    if (std::string(name) == "beacon") sub->add_option("--iq", opt.iq, "write the clean beacon as float32 I/Q");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  try {
    return run(app.get_subcommands().front()->get_name(), opt);
  } catch (const mdma::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
