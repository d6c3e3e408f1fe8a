#include "qbcsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "qbcsim/errors.hpp"
#include "qbcsim/stats.hpp"

namespace qbc {
namespace {

namespace fs = std::filesystem;

std::string hex16(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Recursive key/type signature of a JSON document; two documents with equal
// signatures carry the same schema regardless of values.
std::string schema_signature(const ordered_json& j) {
  if (j.is_object()) {
    std::vector<std::string> keys;
    for (const auto& item : j.items()) keys.push_back(item.key());
    std::sort(keys.begin(), keys.end());
    std::string sig = "{";
    for (const auto& k : keys) sig += k + ":" + schema_signature(j.at(k)) + ";";
    return sig + "}";
  }
  if (j.is_array()) {
    // Arrays are homogeneous here; an empty array keeps a wildcard slot.
    return j.empty() ? "[*]" : "[" + schema_signature(j.front()) + "]";
  }
  if (j.is_string()) return "s";
  if (j.is_boolean()) return "b";
  if (j.is_null()) return "0";
  return "n";
}

double tv_distance(const std::map<std::uint64_t, double>& p,
                   const std::map<std::uint64_t, double>& q) {
  double acc = 0.0;
  auto it_p = p.begin();
  auto it_q = q.begin();
  while (it_p != p.end() || it_q != q.end()) {
    if (it_q == q.end() || (it_p != p.end() && it_p->first < it_q->first)) {
      acc += it_p->second;
      ++it_p;
    } else if (it_p == p.end() || it_q->first < it_p->first) {
      acc += it_q->second;
      ++it_q;
    } else {
      acc += std::abs(it_p->second - it_q->second);
      ++it_p;
      ++it_q;
    }
  }
  return 0.5 * acc;
}

std::map<std::uint64_t, double> histogram(const std::vector<std::uint64_t>& counts) {
  std::map<std::uint64_t, double> h;
  const double w = 1.0 / static_cast<double>(counts.size());
  for (auto c : counts) h[c] += w;
  return h;
}

SessionArtifacts finish_session(int committed_bit, CommitTranscript transcript,
                                UnveilMessage unveil, SealedRecord sealed,
                                const ProtocolConfig& cfg, const PatternSet& patterns,
                                const std::optional<QuantileTable>& quantiles,
                                std::uint64_t seed) {
  SessionArtifacts artifacts;
  artifacts.session_seed = seed;
  artifacts.committed_bit = committed_bit;
  artifacts.unveiled_bit = unveil.bit;
  artifacts.verdict = verify(transcript, unveil, sealed, cfg, patterns, quantiles);
  artifacts.transcript = std::move(transcript);
  artifacts.unveil = std::move(unveil);
  artifacts.sealed = std::move(sealed);
  return artifacts;
}

}  // namespace

void BatchCounters::absorb(const SessionArtifacts& artifacts, std::uint64_t n_trials) {
  ++sessions;
  if (artifacts.verdict.accept) ++accepts;
  for (const TestOutcome& t : artifacts.verdict.tests)
    if (!t.pass) ++test_failures[t.name];
  detected_fraction_sum += static_cast<double>(artifacts.transcript.detected_count()) /
                           static_cast<double>(n_trials);
}

double BatchCounters::accept_rate() const {
  return sessions == 0 ? 0.0
                       : static_cast<double>(accepts) / static_cast<double>(sessions);
}

double BatchCounters::detected_fraction_mean() const {
  return sessions == 0 ? 0.0 : detected_fraction_sum / static_cast<double>(sessions);
}

SessionArtifacts run_honest_session(int bit, const ProtocolConfig& cfg,
                                    const PatternSet& patterns,
                                    const std::optional<QuantileTable>& quantiles,
                                    const RandomStream& session_root) {
  const std::uint64_t session_id = session_root.key();
  PreparedTrials prepared = bob_prepare_trials(cfg, session_id, session_root);
  const auto world = simulate_world(cfg, patterns, prepared.setups, session_root);
  CommitResult commit = alice_commit_honest(bit, prepared.setups, world, cfg, patterns,
                                            session_id, session_root);
  UnveilMessage unveil = alice_unveil_honest(commit.state);
  return finish_session(bit, std::move(commit.transcript), std::move(unveil),
                        std::move(prepared.sealed), cfg, patterns, quantiles, session_id);
}

SessionArtifacts run_bitflip_session(int committed_bit, const ProtocolConfig& cfg,
                                     const PatternSet& patterns,
                                     const std::optional<QuantileTable>& quantiles,
                                     const RandomStream& session_root) {
  const std::uint64_t session_id = session_root.key();
  PreparedTrials prepared = bob_prepare_trials(cfg, session_id, session_root);
  const auto world = simulate_world(cfg, patterns, prepared.setups, session_root);
  BitFlipResult cheat = cheat_bitflip(committed_bit, prepared.setups, world, cfg,
                                      patterns, session_id, session_root);
  return finish_session(committed_bit, std::move(cheat.transcript),
                        std::move(cheat.unveil), std::move(prepared.sealed), cfg,
                        patterns, quantiles, session_id);
}

DelayedSessionArtifacts run_delayed_session(int unveil_bit, const ProtocolConfig& cfg,
                                            const PatternSet& patterns,
                                            const DelayedContext& context,
                                            const std::optional<QuantileTable>& quantiles,
                                            const RandomStream& session_root) {
  const std::uint64_t session_id = session_root.key();
  PreparedTrials prepared = bob_prepare_trials(cfg, session_id, session_root);
  const auto world = simulate_world(cfg, patterns, prepared.setups, session_root);
  DelayedResult cheat = cheat_delayed(unveil_bit, prepared.setups, world, cfg, context,
                                      session_id, session_root);
  DelayedSessionArtifacts artifacts;
  artifacts.missing_fraction = cheat.missing_fraction;
  artifacts.width_ratio = cheat.width_ratio;
  artifacts.base = finish_session(unveil_bit, std::move(cheat.transcript),
                                  std::move(cheat.unveil), std::move(prepared.sealed),
                                  cfg, patterns, quantiles, session_id);
  return artifacts;
}

BatchCounters run_honest_batch(int bit, const ProtocolConfig& cfg,
                               const PatternSet& patterns,
                               const std::optional<QuantileTable>& quantiles,
                               std::uint64_t base_seed, std::uint64_t sessions,
                               const SessionObserver& observer) {
  BatchCounters counters;
  const RandomStream root(base_seed);
  for (std::uint64_t k = 0; k < sessions; ++k) {
    const SessionArtifacts artifacts =
        run_honest_session(bit, cfg, patterns, quantiles, root.substream(k));
    counters.absorb(artifacts, cfg.trials);
    if (observer) observer(artifacts);
  }
  return counters;
}

BatchCounters run_bitflip_batch(int committed_bit, const ProtocolConfig& cfg,
                                const PatternSet& patterns,
                                const std::optional<QuantileTable>& quantiles,
                                std::uint64_t base_seed, std::uint64_t sessions,
                                const SessionObserver& observer) {
  BatchCounters counters;
  const RandomStream root(base_seed);
  for (std::uint64_t k = 0; k < sessions; ++k) {
    const SessionArtifacts artifacts =
        run_bitflip_session(committed_bit, cfg, patterns, quantiles, root.substream(k));
    counters.absorb(artifacts, cfg.trials);
    if (observer) observer(artifacts);
  }
  return counters;
}

DelayedBatchReport run_delayed_batch(int unveil_bit, const ProtocolConfig& cfg,
                                     const PatternSet& patterns,
                                     const std::optional<QuantileTable>& quantiles,
                                     std::uint64_t base_seed, std::uint64_t sessions,
                                     const SessionObserver& observer) {
  DelayedBatchReport report;
  const RandomStream root(base_seed);
  const DelayedContext context = make_delayed_context(cfg, patterns);
  double missing_sum = 0.0;
  for (std::uint64_t k = 0; k < sessions; ++k) {
    const DelayedSessionArtifacts artifacts = run_delayed_session(
        unveil_bit, cfg, patterns, context, quantiles, root.substream(k));
    report.counters.absorb(artifacts.base, cfg.trials);
    missing_sum += artifacts.missing_fraction;
    report.width_ratio = artifacts.width_ratio;
    if (observer) observer(artifacts.base);
  }
  report.missing_fraction_mean =
      sessions == 0 ? 0.0 : missing_sum / static_cast<double>(sessions);
  return report;
}

ScreenPattern collapsed_screen(const PatternSet& patterns, const ProtocolConfig& cfg,
                               Slit slit) {
  ComplexField field = patterns.field_both;
  const bool keep_left = slit == Slit::Left;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const bool is_left = field.grid.x(i) < 0.0;
    if (is_left != keep_left) field.values[i] = complexd{0.0, 0.0};
  }
  field.normalize();
  ScreenPattern pattern = intensity(evolve_free(field, cfg.mass, cfg.t1 - cfg.t0));
  pattern.normalize();
  return pattern;
}

ConcealingReport concealing_probe(const ProtocolConfig& cfg, const PatternSet& patterns,
                                  std::uint64_t base_seed, std::uint64_t sessions,
                                  bool paired_seeds) {
  if (sessions < 100) throw InvalidParams("concealing_probe: need at least 100 sessions");
  ConcealingReport report;
  report.sessions = sessions;
  report.paired_seeds = paired_seeds;

  const RandomStream root(base_seed);
  const RandomStream arm0 = root.substream(10);
  const RandomStream arm1 = paired_seeds ? arm0 : root.substream(11);
  RandomStream perm = root.substream(12);
  RandomStream boot = root.substream(13);

  std::vector<std::uint64_t> counts[2];
  std::vector<double> marginal[2];
  marginal[0].assign(cfg.trials, 0.0);
  marginal[1].assign(cfg.trials, 0.0);
  std::string schema_sig[2];

  for (int b = 0; b < 2; ++b) {
    const RandomStream& arm = b == 0 ? arm0 : arm1;
    counts[b].reserve(sessions);
    for (std::uint64_t k = 0; k < sessions; ++k) {
      const RandomStream session_root = arm.substream(k);
      const std::uint64_t session_id = session_root.key();
      PreparedTrials prepared = bob_prepare_trials(cfg, session_id, session_root);
      const auto world = simulate_world(cfg, patterns, prepared.setups, session_root);
      const CommitResult commit = alice_commit_honest(b, prepared.setups, world, cfg,
                                                      patterns, session_id, session_root);
      counts[b].push_back(commit.transcript.detected_count());
      for (std::uint64_t t = 0; t < cfg.trials; ++t)
        marginal[b][t] += commit.transcript.detected[t];
      if (k == 0) schema_sig[b] = schema_signature(transcript_to_json(commit.transcript));
    }
  }

  report.schema_identical = schema_sig[0] == schema_sig[1];
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    const double gap =
        std::abs(marginal[0][t] - marginal[1][t]) / static_cast<double>(sessions);
    report.max_marginal_gap = std::max(report.max_marginal_gap, gap);
  }

  report.tv_raw = tv_distance(histogram(counts[0]), histogram(counts[1]));

  // Permutation null: pool both arms, split at random, measure the TV two
  // same-distribution samples of this size produce from sampling noise
  // alone. The mean over permutations estimates the raw estimator's bias,
  // and the fraction of permutation values at or above the raw value is an
  // exact p-value for "both arms share one distribution".
  std::vector<std::uint64_t> pool = counts[0];
  pool.insert(pool.end(), counts[1].begin(), counts[1].end());
  const int n_perm = 200;
  double bias_acc = 0.0;
  int at_or_above = 0;
  for (int r = 0; r < n_perm; ++r) {
    for (std::size_t i = pool.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(perm.below(i));
      std::swap(pool[i - 1], pool[j]);
    }
    std::vector<std::uint64_t> half_a(pool.begin(),
                                      pool.begin() + static_cast<std::ptrdiff_t>(sessions));
    std::vector<std::uint64_t> half_b(pool.begin() + static_cast<std::ptrdiff_t>(sessions),
                                      pool.end());
    const double tv = tv_distance(histogram(half_a), histogram(half_b));
    bias_acc += tv;
    if (tv >= report.tv_raw) ++at_or_above;
  }
  report.tv_bias = bias_acc / n_perm;
  report.tv_debiased = std::max(0.0, report.tv_raw - report.tv_bias);
  report.perm_p_value = (1.0 + at_or_above) / (n_perm + 1.0);

  // Bootstrap the debiased estimate by resampling sessions within each arm.
  // Resampling an n-session arm doubles its sampling variance around the
  // truth, which inflates a null TV by sqrt(2); each replicate is debiased
  // by that matched null so the interval covers zero when the arms agree.
  const int n_boot = 200;
  std::vector<double> boot_vals;
  boot_vals.reserve(n_boot);
  std::vector<std::uint64_t> re0(sessions), re1(sessions);
  for (int r = 0; r < n_boot; ++r) {
    for (std::uint64_t k = 0; k < sessions; ++k) {
      re0[k] = counts[0][boot.below(sessions)];
      re1[k] = counts[1][boot.below(sessions)];
    }
    boot_vals.push_back(tv_distance(histogram(re0), histogram(re1)) -
                        std::numbers::sqrt2 * report.tv_bias);
  }
  report.ci_lo = std::max(0.0, empirical_quantile(boot_vals, 0.025));
  report.ci_hi = std::max(0.0, empirical_quantile(boot_vals, 0.975));
  return report;
}

std::string quantile_cache_path(const std::string& calib_dir, std::uint64_t config_hash) {
  return calib_dir + "/quantiles_" + hex16(config_hash) + ".json";
}

std::optional<QuantileTable> load_quantiles(const std::string& calib_dir,
                                            const ProtocolConfig& cfg) {
  const std::string path = quantile_cache_path(calib_dir, cfg.hash());
  if (!fs::exists(path)) return std::nullopt;
  const QuantileTable table =
      quantiles_from_json(ordered_json::parse(read_text_file(path)));
  if (table.config_hash != cfg.hash()) return std::nullopt;
  return table;
}

void save_quantiles(const std::string& calib_dir, const QuantileTable& table) {
  fs::create_directories(calib_dir);
  write_text_file(quantile_cache_path(calib_dir, table.config_hash),
                  quantiles_to_json(table).dump(2) + "\n");
}

ExperimentResult run_experiment(const ExperimentRequest& request) {
  const ProtocolConfig& cfg = request.cfg;
  const PatternSet patterns = compute_patterns(cfg);

  const std::string runid = hex16(fnv1a64(
      request.subcommand + "|" + cfg.canonical_string() + "|seed=" +
      std::to_string(request.seed) + "|sessions=" + std::to_string(request.sessions) +
      "|bit=" + std::to_string(request.bit) +
      "|paired=" + std::to_string(request.paired_seeds ? 1 : 0) +
      "|calib_sessions=" + std::to_string(request.calib_sessions)));
  const std::string run_dir = request.out_dir + "/" + runid;
  fs::create_directories(run_dir);

  ordered_json metrics;
  metrics["schema"] = "qbc-metrics/1";
  metrics["subcommand"] = request.subcommand;
  metrics["runid"] = runid;
  metrics["seed"] = request.seed;
  metrics["config"] = config_to_json(cfg);

  std::ofstream verdicts;
  const auto open_verdicts = [&] {
    verdicts.open(run_dir + "/verdicts.jsonl", std::ios::binary | std::ios::trunc);
    if (!verdicts) throw std::runtime_error("cannot write verdicts.jsonl");
  };
  const SessionObserver observer = [&](const SessionArtifacts& artifacts) {
    ordered_json line;
    line["session_seed"] = artifacts.session_seed;
    line["committed_bit"] = artifacts.committed_bit;
    line["unveiled_bit"] = artifacts.unveiled_bit;
    line["detected"] = artifacts.transcript.detected_count();
    line["verdict"] = verdict_to_json(artifacts.verdict);
    verdicts << line.dump() << "\n";
    if (request.dump_sessions) {
      const std::string prefix =
          run_dir + "/session_" + hex16(artifacts.session_seed);
      write_text_file(prefix + "_transcript.json",
                      transcript_to_json(artifacts.transcript).dump(2) + "\n");
      write_text_file(prefix + "_unveil.json",
                      unveil_to_json(artifacts.unveil).dump(2) + "\n");
      write_text_file(prefix + "_sealed.json",
                      sealed_to_json(artifacts.sealed).dump(2) + "\n");
    }
  };

  ordered_json results;

  if (request.subcommand == "honest") {
    metrics["sessions"] = request.sessions;
    metrics["bit"] = request.bit;
    open_verdicts();
    std::optional<QuantileTable> quantiles;
    if (request.bit == 1) quantiles = load_quantiles(request.calib_dir, cfg);
    const BatchCounters counters = run_honest_batch(
        request.bit, cfg, patterns, quantiles, request.seed, request.sessions, observer);
    results["accept_rate"] = counters.accept_rate();
    results["accepts"] = counters.accepts;
    results["detected_fraction_mean"] = counters.detected_fraction_mean();
    ordered_json fails;
    for (const auto& [name, n] : counters.test_failures) fails[name] = n;
    results["test_failures"] = fails;
  } else if (request.subcommand == "cheat-bitflip") {
    metrics["sessions"] = request.sessions;
    metrics["committed_bit"] = request.bit;
    metrics["unveiled_bit"] = 1 - request.bit;
    metrics["guess_rule"] = guess_rule_name(cfg.guess_rule);
    open_verdicts();
    std::optional<QuantileTable> quantiles;
    if (request.bit == 0) quantiles = load_quantiles(request.calib_dir, cfg);
    const BatchCounters counters =
        run_bitflip_batch(request.bit, cfg, patterns, quantiles, request.seed,
                          request.sessions, observer);
    results["cheat_success_rate"] = counters.accept_rate();
    results["rejection_rate"] = 1.0 - counters.accept_rate();
    results["detected_fraction_mean"] = counters.detected_fraction_mean();
    ordered_json fails;
    for (const auto& [name, n] : counters.test_failures) fails[name] = n;
    results["test_failures"] = fails;
  } else if (request.subcommand == "cheat-delayed") {
    metrics["sessions"] = request.sessions;
    metrics["unveiled_bit"] = request.bit;
    metrics["measure_time_s"] = sig17(cfg.measure_time);
    metrics["announce_fraction"] = sig17(cfg.announce_fraction);
    open_verdicts();
    std::optional<QuantileTable> quantiles;
    if (request.bit == 1) quantiles = load_quantiles(request.calib_dir, cfg);
    const DelayedBatchReport report =
        run_delayed_batch(request.bit, cfg, patterns, quantiles, request.seed,
                          request.sessions, observer);
    results["cheat_success_rate"] = report.counters.accept_rate();
    results["rejection_rate"] = 1.0 - report.counters.accept_rate();
    results["missing_fraction_mean"] = report.missing_fraction_mean;
    results["width_ratio"] = report.width_ratio;
    ordered_json fails;
    for (const auto& [name, n] : report.counters.test_failures) fails[name] = n;
    results["test_failures"] = fails;
  } else if (request.subcommand == "concealing") {
    metrics["sessions"] = request.sessions;
    metrics["paired_seeds"] = request.paired_seeds;
    const ConcealingReport report = concealing_probe(cfg, patterns, request.seed,
                                                     request.sessions,
                                                     request.paired_seeds);
    results["tv_distance_estimate"] = report.tv_debiased;
    results["tv_raw"] = report.tv_raw;
    results["tv_bias"] = report.tv_bias;
    results["perm_p_value"] = report.perm_p_value;
    results["bootstrap_ci"] = ordered_json::array({report.ci_lo, report.ci_hi});
    results["max_marginal_gap"] = report.max_marginal_gap;
    results["schema_identical"] = report.schema_identical;
  } else if (request.subcommand == "calibrate") {
    metrics["sessions"] = request.calib_sessions;
    const QuantileTable table =
        calibrate_quantiles(cfg, patterns, request.calib_sessions, request.seed);
    save_quantiles(request.calib_dir, table);
    results["z_threshold"] = sig17(table.z_threshold);
    results["llr_threshold"] = sig17(table.llr_threshold);
    results["cache_path"] = quantile_cache_path(request.calib_dir, cfg.hash());
  } else if (request.subcommand == "pattern-export") {
    const std::string pat_dir = run_dir + "/patterns";
    fs::create_directories(pat_dir);
    const Grid grid = cfg.make_grid();
    write_text_file(pat_dir + "/numeric_both.csv", pattern_to_csv(patterns.screen_both));
    write_text_file(pat_dir + "/numeric_left.csv", pattern_to_csv(patterns.screen_left));
    write_text_file(pat_dir + "/numeric_right.csv", pattern_to_csv(patterns.screen_right));
    for (const SlitOpen open :
         {SlitOpen::Both, SlitOpen::LeftOnly, SlitOpen::RightOnly}) {
      const ScreenPattern oracle =
          analytic_fraunhofer(cfg.make_mask(open), cfg.wavelength, cfg.screen_distance,
                              grid);
      write_text_file(pat_dir + "/fraunhofer_" + slit_open_name(open) + ".csv",
                      pattern_to_csv(oracle));
    }
    const ScreenPattern collapsed = collapsed_screen(patterns, cfg, Slit::Left);
    write_text_file(pat_dir + "/collapsed_left.csv", pattern_to_csv(collapsed));
    write_text_file(pat_dir + "/slit_field_both.csv", field_to_csv(patterns.field_both));

    const double spacing_expected = cfg.fringe_spacing();
    const double spacing_measured = measure_fringe_spacing(patterns.screen_both);
    const double window = 1.1 * spacing_expected;
    results["alpha_both"] = patterns.alpha_both;
    results["alpha_left"] = patterns.alpha_left;
    results["alpha_right"] = patterns.alpha_right;
    results["p_left_given_both"] = patterns.p_left_given_both;
    results["fringe_spacing_expected_m"] = sig17(spacing_expected);
    results["fringe_spacing_measured_m"] = sig17(spacing_measured);
    results["fringe_spacing_rel_err"] =
        std::abs(spacing_measured - spacing_expected) / spacing_expected;
    results["far_field_ok"] =
        fraunhofer_far_field_ok(cfg.make_mask(SlitOpen::Both), cfg.wavelength,
                                cfg.screen_distance);
    results["fringe_contrast_both"] =
        fringe_contrast(patterns.screen_both, -window, window);
    results["fringe_contrast_left"] =
        fringe_contrast(patterns.screen_left, -window, window);
    results["fringe_contrast_collapsed"] = fringe_contrast(collapsed, -window, window);
    results["wrap_ok"] = patterns.wrap_ok;
    results["max_displacement_m"] = sig17(patterns.max_displacement);
  } else {
    throw InvalidParams("unknown subcommand '" + request.subcommand + "'");
  }

  metrics["results"] = results;
  write_text_file(run_dir + "/metrics.json", metrics.dump(2) + "\n");

  ExperimentResult result;
  result.run_dir = run_dir;
  result.metrics = metrics;
  return result;
}

}  // namespace qbc
