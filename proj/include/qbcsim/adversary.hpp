#pragma once

#include "qbcsim/protocol.hpp"

namespace qbc {

// Cheating Alice, direction 0 -> 1 or 1 -> 0: commit honestly to
// committed_bit, then unveil the opposite bit with fabricated data.
//
// Having committed 1, she holds screen positions and must invent slit
// claims; the guessing rule is either a fair coin or the maximum-likelihood
// choice given the recorded position (the single-slit envelopes are offset,
// so position carries some which-slit information).
//
// Having committed 0, she measured which slit at t0 and the interference is
// gone; the best she can fabricate is a position drawn from the single-slit
// pattern of the slit she saw.
struct BitFlipResult {
  CommitTranscript transcript;
  UnveilMessage unveil;
  int committed_bit = 0;
  int unveiled_bit = 0;
};

BitFlipResult cheat_bitflip(int committed_bit, const std::vector<TrialSetup>& setups,
                            const std::vector<TrialWorld>& world,
                            const ProtocolConfig& cfg, const PatternSet& patterns,
                            std::uint64_t session_id, const RandomStream& session_root);

// Cheating Alice who defers every measurement to measure_time > t1. The
// announcement deadline is t1, so she announces optimistically: every
// transmitted trial (thinned by announce_fraction) is claimed detected.
// Particles decay with lifetime tau in the meantime; survivors measured at
// measure_time give positions with the wrong spread, and give no which-slit
// information at all. Trials that decayed leave her with nothing to unveil.
struct DelayedResult {
  CommitTranscript transcript;
  UnveilMessage unveil;
  std::uint64_t announced = 0;
  std::uint64_t unsupported = 0;  // announced but decayed before measure_time
  double missing_fraction = 0.0;
  double width_ratio = 0.0;       // measured spread vs the honest t1 spread
};

// Session-independent pieces of the delayed cheat: the late-measurement
// patterns per slit setting and their samplers. Built once per batch.
struct DelayedContext {
  ScreenPattern late_both, late_left, late_right;
  PatternSampler sampler_both, sampler_left, sampler_right;
  double width_ratio = 0.0;

  const PatternSampler& sampler(SlitOpen open) const {
    if (open == SlitOpen::Both) return sampler_both;
    return open == SlitOpen::LeftOnly ? sampler_left : sampler_right;
  }
};

DelayedContext make_delayed_context(const ProtocolConfig& cfg,
                                    const PatternSet& patterns);

DelayedResult cheat_delayed(int unveil_bit, const std::vector<TrialSetup>& setups,
                            const std::vector<TrialWorld>& world,
                            const ProtocolConfig& cfg, const DelayedContext& context,
                            std::uint64_t session_id, const RandomStream& session_root);

// Long-time position density of a state released from the slit plane: after
// spreading far beyond the source size, position is momentum read out
// ballistically, x = hbar k t / m, so the pattern is the momentum density
// mapped onto a uniform position grid.
ScreenPattern ballistic_pattern(const ComplexField& slit_field, double mass,
                                double t, double hbar = constants::hbar);

}  // namespace qbc
