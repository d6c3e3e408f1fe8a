#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qbcsim/protocol.hpp"

namespace qbc {

enum class RejectReason { None, SlitMismatch, PatternMismatch, MissingData, CountAnomaly };

std::string reject_reason_name(RejectReason reason);

struct TestOutcome {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;   // meaningful only when exact = false
  double threshold = 0.0; // p-value floor, z cutoff, or sigma band
  bool exact = false;     // exact checks pass or fail without a p-value
  bool pass = true;
};

struct Verdict {
  bool accept = true;
  RejectReason reason = RejectReason::None;
  std::vector<TestOutcome> tests;
};

// Honest-play quantiles of the two pattern statistics, produced by Monte
// Carlo calibration and cached keyed by config hash.
struct QuantileTable {
  std::uint64_t config_hash = 0;
  std::uint64_t sessions = 0;
  std::uint64_t seed = 0;
  double z_threshold = 0.0;    // low quantile of position_loglik_z
  double llr_threshold = 0.0;  // low quantile of position_fringe_llr
};

// Standardized screen-position log-likelihood: sum of log bin probabilities
// over detected trials, centered and scaled by the exact per-choice moments
// under honest sampling. Zero when nothing was detected.
double position_loglik_z(const UnveilMessage& unveil, const SealedRecord& sealed,
                         const PatternSet& patterns);

// Log-likelihood ratio of the both-slit positions: fringed pattern versus
// the incoherent single-slit mixture. A source that took which-slit
// information drags this negative by about log 2 per trial; honest fringes
// keep it positive on average.
double position_fringe_llr(const UnveilMessage& unveil, const SealedRecord& sealed,
                           const PatternSet& patterns);

// Monte Carlo calibration of both pattern thresholds, each at level
// epsilon_v / 4. Thresholds are deliberately conservative low order
// statistics, so the realized honest rejection rate sits below the budget.
QuantileTable calibrate_quantiles(const ProtocolConfig& cfg, const PatternSet& patterns,
                                  std::uint64_t sessions, std::uint64_t seed);

// Bob's full check of an unveiling, run in order: data coverage, then the
// bit-specific consistency tests, then the detection-count sanity test.
Verdict verify(const CommitTranscript& transcript, const UnveilMessage& unveil,
               const SealedRecord& sealed, const ProtocolConfig& cfg,
               const PatternSet& patterns,
               const std::optional<QuantileTable>& quantiles);

}  // namespace qbc
