// Command line front end: one subcommand per experiment, all outputs under
// out/<runid>/ as pure functions of config + seed.
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "qbcsim/errors.hpp"
#include "qbcsim/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitUncalibrated = 3;
constexpr int kExitInternal = 4;

struct CommonArgs {
  std::string config_file;
  std::uint64_t seed = 1;
  std::uint64_t sessions = 1000;
  std::uint64_t trials = 0;  // 0 = keep config value
  std::string out_dir = "out";
  std::string calib_dir = "calibration";
  bool dump_sessions = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_sessions) {
  cmd->add_option("-c,--config", args.config_file,
                  "Config file (key = value lines); defaults used when omitted");
  cmd->add_option("-s,--seed", args.seed, "Base random seed");
  if (with_sessions)
    cmd->add_option("-n,--sessions", args.sessions, "Number of protocol sessions");
  cmd->add_option("-N,--trials", args.trials,
                  "Override trials-per-session from the config");
  cmd->add_option("-o,--out", args.out_dir, "Output directory root");
  cmd->add_option("--calib-dir", args.calib_dir,
                  "Directory for cached honest-quantile tables");
  cmd->add_flag("--dump-transcripts", args.dump_sessions,
                "Also write per-session transcript/unveil/sealed JSON files");
}

qbc::ExperimentRequest build_request(const std::string& subcommand,
                                     const CommonArgs& args) {
  qbc::ExperimentRequest request;
  request.subcommand = subcommand;
  request.cfg = args.config_file.empty()
                    ? qbc::ProtocolConfig{}
                    : qbc::load_config_file(args.config_file);
  if (args.trials != 0) request.cfg.trials = args.trials;
  request.cfg.finalize();
  request.seed = args.seed;
  request.sessions = args.sessions;
  request.out_dir = args.out_dir;
  request.calib_dir = args.calib_dir;
  request.dump_sessions = args.dump_sessions;
  return request;
}

int run(const qbc::ExperimentRequest& request) {
  const qbc::ExperimentResult result = qbc::run_experiment(request);
  std::printf("%s\n", result.metrics.dump(2).c_str());
  std::printf("artifacts: %s\n", result.run_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Double-slit bit-commitment simulator: honest sessions, cheating "
      "strategies, concealing probes, verifier calibration, and pattern export"};
  app.require_subcommand(1);

  CommonArgs honest_args, bitflip_args, delayed_args, concealing_args,
      calibrate_args, pattern_args;
  int honest_bit = 1;
  int committed_bit = 1;
  int delayed_bit = 1;
  std::string strategy = "maxlikelihood";
  bool paired = false;
  std::uint64_t calib_sessions = 10000;

  CLI::App* honest = app.add_subcommand(
      "honest", "Honest commit/unveil sessions through the verifier");
  add_common(honest, honest_args, true);
  honest->add_option("-b,--bit", honest_bit, "Committed bit")
      ->check(CLI::Range(0, 1));

  CLI::App* bitflip = app.add_subcommand(
      "cheat-bitflip", "Commit honestly, then unveil the opposite bit");
  add_common(bitflip, bitflip_args, true);
  bitflip->add_option("-b,--bit", committed_bit, "Committed bit (unveils 1-b)")
      ->check(CLI::Range(0, 1));
  bitflip->add_option("--strategy", strategy,
                      "Slit-guessing rule for 1->0: coinflip or maxlikelihood");

  CLI::App* delayed = app.add_subcommand(
      "cheat-delayed", "Announce everything at t1, measure only at measure_time");
  add_common(delayed, delayed_args, true);
  delayed->add_option("-b,--bit", delayed_bit, "Bit to unveil")
      ->check(CLI::Range(0, 1));

  CLI::App* concealing = app.add_subcommand(
      "concealing", "Total-variation probe of Bob's pre-unveil view, b=0 vs b=1");
  add_common(concealing, concealing_args, true);
  concealing->add_flag("--paired", paired,
                       "Reuse identical session randomness for both bits");

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "Monte Carlo calibration of the verifier's pattern thresholds");
  add_common(calibrate, calibrate_args, false);
  calibrate->add_option("-n,--sessions", calib_sessions,
                        "Honest sessions used for calibration");

  CLI::App* pattern = app.add_subcommand(
      "pattern-export", "Write screen patterns and analytic references as CSV");
  add_common(pattern, pattern_args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (honest->parsed()) {
      qbc::ExperimentRequest request = build_request("honest", honest_args);
      request.bit = honest_bit;
      return run(request);
    }
    if (bitflip->parsed()) {
      qbc::ExperimentRequest request = build_request("cheat-bitflip", bitflip_args);
      request.bit = committed_bit;
      request.cfg.guess_rule = qbc::parse_guess_rule(strategy);
      return run(request);
    }
    if (delayed->parsed()) {
      qbc::ExperimentRequest request = build_request("cheat-delayed", delayed_args);
      request.bit = delayed_bit;
      return run(request);
    }
    if (concealing->parsed()) {
      qbc::ExperimentRequest request = build_request("concealing", concealing_args);
      request.paired_seeds = paired;
      return run(request);
    }
    if (calibrate->parsed()) {
      qbc::ExperimentRequest request = build_request("calibrate", calibrate_args);
      request.calib_sessions = calib_sessions;
      return run(request);
    }
    if (pattern->parsed()) {
      return run(build_request("pattern-export", pattern_args));
    }
  } catch (const qbc::UncalibratedQuantiles& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUncalibrated;
  } catch (const qbc::InvalidParams& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitConfig;
}
