#pragma once

#include <cstdint>
#include <vector>

#include "qbcsim/config.hpp"
#include "qbcsim/patterns.hpp"
#include "qbcsim/rng.hpp"

namespace qbc {

// Substream roles hanging off a session's root stream. Every consumer of
// randomness owns a disjoint keyed substream, so adding or reordering
// consumers never perturbs the others' draws.
enum class StreamRole : std::uint64_t {
  BobChoices = 1,
  AliceMeasure = 2,
  WorldDecay = 3,
  WorldTransmit = 4,
  Adversary = 5,
};

inline RandomStream role_stream(const RandomStream& session_root, StreamRole role) {
  return session_root.substream(static_cast<std::uint64_t>(role));
}

struct TrialSetup {
  std::uint64_t trial_id = 0;
  SlitOpen bob_choice = SlitOpen::Both;
};

// Bob's private record of his slit choices, written at prepare time and
// read again only by the verifier.
struct SealedRecord {
  std::uint64_t session_id = 0;
  std::vector<SlitOpen> choices;
};

// Nature's per-trial draws: when the particle decays and whether the
// aperture transmitted it. Shared by honest and cheating Alices, since the
// physics does not care about her plans.
struct TrialWorld {
  double decay_time = 0.0;
  bool transmitted = false;
};

// Everything Bob holds before unveiling. The only per-trial information is
// the detection flag; all announcements carry the same deadline stamp t1,
// whichever bit Alice holds.
struct CommitTranscript {
  std::uint64_t session_id = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t n_trials = 0;
  double announce_time = 0.0;
  std::vector<std::uint8_t> detected;

  std::uint64_t detected_count() const;
};

struct TrialDatum {
  bool detected = false;
  Slit slit = Slit::Left;  // meaningful when bit = 0
  double position = 0.0;   // meaningful when bit = 1
};

struct AlicePrivateState {
  std::uint64_t session_id = 0;
  int bit = 0;
  std::vector<TrialDatum> data;
};

struct UnveilEntry {
  std::uint64_t trial_id = 0;
  Slit slit = Slit::Left;  // bit = 0 payload
  double position = 0.0;   // bit = 1 payload
};

struct UnveilMessage {
  std::uint64_t session_id = 0;
  int bit = 0;
  std::vector<UnveilEntry> entries;
};

struct CommitResult {
  CommitTranscript transcript;
  AlicePrivateState state;
};

struct PreparedTrials {
  std::vector<TrialSetup> setups;
  SealedRecord sealed;
};

// Bob draws N slit configurations i.i.d.: Both with probability both_prob,
// the remainder split evenly between the single-slit settings.
PreparedTrials bob_prepare_trials(const ProtocolConfig& cfg, std::uint64_t session_id,
                                  const RandomStream& session_root);

// Nature's draws for each trial.
std::vector<TrialWorld> simulate_world(const ProtocolConfig& cfg,
                                       const PatternSet& patterns,
                                       const std::vector<TrialSetup>& setups,
                                       const RandomStream& session_root);

// Honest Alice's commit phase. For bit 0 she measures which slit at t0; for
// bit 1 she lets the packet reach the screen and records the position at
// t1. A trial counts as detected only when it was transmitted and the
// particle survived to the announcement time t1 regardless of the bit, so
// the detection flags Bob sees carry no bit information.
CommitResult alice_commit_honest(int bit, const std::vector<TrialSetup>& setups,
                                 const std::vector<TrialWorld>& world,
                                 const ProtocolConfig& cfg, const PatternSet& patterns,
                                 std::uint64_t session_id,
                                 const RandomStream& session_root);

// Honest unveil: copy out exactly the detected trials' data.
UnveilMessage alice_unveil_honest(const AlicePrivateState& state);

}  // namespace qbc
