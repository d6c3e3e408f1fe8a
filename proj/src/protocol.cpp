#include "qbcsim/protocol.hpp"

#include "qbcsim/errors.hpp"

namespace qbc {

std::uint64_t CommitTranscript::detected_count() const {
  std::uint64_t n = 0;
  for (auto d : detected) n += d;
  return n;
}

PreparedTrials bob_prepare_trials(const ProtocolConfig& cfg, std::uint64_t session_id,
                                  const RandomStream& session_root) {
  const RandomStream bob = role_stream(session_root, StreamRole::BobChoices);
  PreparedTrials prepared;
  prepared.sealed.session_id = session_id;
  prepared.setups.reserve(cfg.trials);
  prepared.sealed.choices.reserve(cfg.trials);
  const double single = 0.5 * (1.0 - cfg.both_prob);
  for (std::uint64_t i = 0; i < cfg.trials; ++i) {
    RandomStream trial = bob.substream(i);
    const double u = trial.uniform();
    SlitOpen choice;
    if (u < cfg.both_prob)
      choice = SlitOpen::Both;
    else if (u < cfg.both_prob + single)
      choice = SlitOpen::LeftOnly;
    else
      choice = SlitOpen::RightOnly;
    prepared.setups.push_back({i, choice});
    prepared.sealed.choices.push_back(choice);
  }
  return prepared;
}

std::vector<TrialWorld> simulate_world(const ProtocolConfig& cfg,
                                       const PatternSet& patterns,
                                       const std::vector<TrialSetup>& setups,
                                       const RandomStream& session_root) {
  const RandomStream decay = role_stream(session_root, StreamRole::WorldDecay);
  const RandomStream transmit = role_stream(session_root, StreamRole::WorldTransmit);
  std::vector<TrialWorld> world;
  world.reserve(setups.size());
  for (const TrialSetup& setup : setups) {
    RandomStream d = decay.substream(setup.trial_id);
    RandomStream t = transmit.substream(setup.trial_id);
    TrialWorld w;
    w.decay_time = d.exponential(cfg.tau);
    w.transmitted = t.bernoulli(patterns.alpha_effective(setup.bob_choice, cfg));
    world.push_back(w);
  }
  return world;
}

CommitResult alice_commit_honest(int bit, const std::vector<TrialSetup>& setups,
                                 const std::vector<TrialWorld>& world,
                                 const ProtocolConfig& cfg, const PatternSet& patterns,
                                 std::uint64_t session_id,
                                 const RandomStream& session_root) {
  if (bit != 0 && bit != 1) throw InvalidParams("commit: bit must be 0 or 1");
  if (setups.size() != world.size())
    throw StateMismatch("commit: setup/world length mismatch");

  const RandomStream alice = role_stream(session_root, StreamRole::AliceMeasure);

  CommitResult result;
  result.transcript.session_id = session_id;
  result.transcript.config_hash = cfg.hash();
  result.transcript.n_trials = setups.size();
  result.transcript.announce_time = cfg.t1;
  result.transcript.detected.resize(setups.size(), 0);
  result.state.session_id = session_id;
  result.state.bit = bit;
  result.state.data.resize(setups.size());

  for (std::size_t i = 0; i < setups.size(); ++i) {
    const SlitOpen choice = setups[i].bob_choice;
    // Announced detections are the neutrons still alive at the announcement
    // time t1, whichever bit was committed. Anything else would leak the bit
    // through detection statistics; this way Bob's pre-unveil view is
    // bit-independent by construction.
    const bool detected = world[i].transmitted && world[i].decay_time > cfg.t1;
    result.transcript.detected[i] = detected ? 1 : 0;
    TrialDatum& datum = result.state.data[i];
    datum.detected = detected;
    if (!detected) continue;
    RandomStream trial = alice.substream(setups[i].trial_id);
    if (bit == 0) {
      // Which-slit measurement at t0. Single-slit trials are forced; with
      // both slits open the outcome follows the post-aperture weights
      // (precomputed once, identical in law to collapsing the field).
      switch (choice) {
        case SlitOpen::LeftOnly: datum.slit = Slit::Left; break;
        case SlitOpen::RightOnly: datum.slit = Slit::Right; break;
        case SlitOpen::Both:
          datum.slit =
              trial.bernoulli(patterns.p_left_given_both) ? Slit::Left : Slit::Right;
          break;
      }
    } else {
      datum.position = patterns.sampler(choice).sample(trial);
    }
  }
  return result;
}

UnveilMessage alice_unveil_honest(const AlicePrivateState& state) {
  UnveilMessage msg;
  msg.session_id = state.session_id;
  msg.bit = state.bit;
  for (std::size_t i = 0; i < state.data.size(); ++i) {
    const TrialDatum& datum = state.data[i];
    if (!datum.detected) continue;
    UnveilEntry entry;
    entry.trial_id = i;
    if (state.bit == 0)
      entry.slit = datum.slit;
    else
      entry.position = datum.position;
    msg.entries.push_back(entry);
  }
  return msg;
}

}  // namespace qbc
