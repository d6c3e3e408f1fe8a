#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "qbcsim/adversary.hpp"
#include "qbcsim/io.hpp"
#include "qbcsim/verify.hpp"

namespace qbc {

struct SessionArtifacts {
  std::uint64_t session_seed = 0;
  int committed_bit = 0;
  int unveiled_bit = 0;
  CommitTranscript transcript;
  UnveilMessage unveil;
  SealedRecord sealed;
  Verdict verdict;
};

using SessionObserver = std::function<void(const SessionArtifacts&)>;

// Commutative per-batch aggregates.
struct BatchCounters {
  std::uint64_t sessions = 0;
  std::uint64_t accepts = 0;
  std::map<std::string, std::uint64_t> test_failures;
  double detected_fraction_sum = 0.0;

  void absorb(const SessionArtifacts& artifacts, std::uint64_t n_trials);
  double accept_rate() const;
  double detected_fraction_mean() const;
};

SessionArtifacts run_honest_session(int bit, const ProtocolConfig& cfg,
                                    const PatternSet& patterns,
                                    const std::optional<QuantileTable>& quantiles,
                                    const RandomStream& session_root);

SessionArtifacts run_bitflip_session(int committed_bit, const ProtocolConfig& cfg,
                                     const PatternSet& patterns,
                                     const std::optional<QuantileTable>& quantiles,
                                     const RandomStream& session_root);

struct DelayedSessionArtifacts {
  SessionArtifacts base;
  double missing_fraction = 0.0;
  double width_ratio = 0.0;
};

DelayedSessionArtifacts run_delayed_session(int unveil_bit, const ProtocolConfig& cfg,
                                            const PatternSet& patterns,
                                            const DelayedContext& context,
                                            const std::optional<QuantileTable>& quantiles,
                                            const RandomStream& session_root);

BatchCounters run_honest_batch(int bit, const ProtocolConfig& cfg,
                               const PatternSet& patterns,
                               const std::optional<QuantileTable>& quantiles,
                               std::uint64_t base_seed, std::uint64_t sessions,
                               const SessionObserver& observer = nullptr);

BatchCounters run_bitflip_batch(int committed_bit, const ProtocolConfig& cfg,
                                const PatternSet& patterns,
                                const std::optional<QuantileTable>& quantiles,
                                std::uint64_t base_seed, std::uint64_t sessions,
                                const SessionObserver& observer = nullptr);

struct DelayedBatchReport {
  BatchCounters counters;
  double missing_fraction_mean = 0.0;
  double width_ratio = 0.0;
};

DelayedBatchReport run_delayed_batch(int unveil_bit, const ProtocolConfig& cfg,
                                     const PatternSet& patterns,
                                     const std::optional<QuantileTable>& quantiles,
                                     std::uint64_t base_seed, std::uint64_t sessions,
                                     const SessionObserver& observer = nullptr);

// Bob's pre-unveil view for b=0 versus b=1 over many honest sessions:
// total-variation distance between detection-count histograms, debiased by
// a permutation null (two finite samples from the same distribution have a
// strictly positive raw empirical TV), with a permutation p-value for
// distribution equality and a bootstrap interval for the debiased distance,
// plus the exact transcript schema comparison.
struct ConcealingReport {
  std::uint64_t sessions = 0;
  bool paired_seeds = false;
  double tv_raw = 0.0;
  double tv_bias = 0.0;
  double tv_debiased = 0.0;
  double perm_p_value = 1.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double max_marginal_gap = 0.0;  // max over trials of |P(det|b=0) - P(det|b=1)|
  bool schema_identical = false;
};

ConcealingReport concealing_probe(const ProtocolConfig& cfg, const PatternSet& patterns,
                                  std::uint64_t base_seed, std::uint64_t sessions,
                                  bool paired_seeds = false);

// Deterministic single-slit screen pattern obtained by collapsing the
// both-open state to one side before the flight to the screen.
ScreenPattern collapsed_screen(const PatternSet& patterns, const ProtocolConfig& cfg,
                               Slit slit);

// Calibration cache on disk, keyed by config hash.
std::string quantile_cache_path(const std::string& calib_dir, std::uint64_t config_hash);
std::optional<QuantileTable> load_quantiles(const std::string& calib_dir,
                                            const ProtocolConfig& cfg);
void save_quantiles(const std::string& calib_dir, const QuantileTable& table);

// CLI-facing experiment driver: runs one subcommand, writes
// out/<runid>/metrics.json (+ verdicts.jsonl, patterns/*.csv as applicable)
// and returns the metrics. All outputs are pure functions of config + seed.
struct ExperimentRequest {
  std::string subcommand;
  ProtocolConfig cfg;
  std::uint64_t seed = 1;
  std::uint64_t sessions = 1000;
  int bit = 1;
  std::string out_dir = "out";
  std::string calib_dir = "calibration";
  std::uint64_t calib_sessions = 10000;
  bool paired_seeds = false;
  bool dump_sessions = false;
};

struct ExperimentResult {
  std::string run_dir;
  ordered_json metrics;
};

ExperimentResult run_experiment(const ExperimentRequest& request);

}  // namespace qbc
