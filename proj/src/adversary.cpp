#include "qbcsim/adversary.hpp"

#include <cmath>
#include <numbers>

#include "qbcsim/errors.hpp"
#include "qbcsim/fft.hpp"
#include "qbcsim/stats.hpp"

namespace qbc {
namespace {

Slit guess_slit(GuessRule rule, double position, const PatternSet& patterns,
                RandomStream& rng) {
  if (rule == GuessRule::CoinFlip) return rng.bernoulli(0.5) ? Slit::Left : Slit::Right;
  const double left = patterns.screen_left.bin_probability(position);
  const double right = patterns.screen_right.bin_probability(position);
  if (left == right) return rng.bernoulli(0.5) ? Slit::Left : Slit::Right;
  return left > right ? Slit::Left : Slit::Right;
}

}  // namespace

BitFlipResult cheat_bitflip(int committed_bit, const std::vector<TrialSetup>& setups,
                            const std::vector<TrialWorld>& world,
                            const ProtocolConfig& cfg, const PatternSet& patterns,
                            std::uint64_t session_id, const RandomStream& session_root) {
  if (committed_bit != 0 && committed_bit != 1)
    throw InvalidParams("cheat_bitflip: committed bit must be 0 or 1");

  // The commit phase is honest; only the unveiling lies.
  const CommitResult commit = alice_commit_honest(committed_bit, setups, world, cfg,
                                                  patterns, session_id, session_root);
  const RandomStream adv = role_stream(session_root, StreamRole::Adversary);

  BitFlipResult result;
  result.transcript = commit.transcript;
  result.committed_bit = committed_bit;
  result.unveiled_bit = 1 - committed_bit;
  result.unveil.session_id = session_id;
  result.unveil.bit = result.unveiled_bit;

  for (std::size_t i = 0; i < commit.state.data.size(); ++i) {
    const TrialDatum& datum = commit.state.data[i];
    if (!datum.detected) continue;
    RandomStream trial = adv.substream(i);
    UnveilEntry entry;
    entry.trial_id = i;
    if (committed_bit == 1) {
      // She has positions and must claim slits.
      entry.slit = guess_slit(cfg.guess_rule, datum.position, patterns, trial);
    } else {
      // She knows which slit she saw; the fringeless single-slit pattern is
      // the only position distribution consistent with that knowledge.
      const PatternSampler& fallback = datum.slit == Slit::Left
                                           ? patterns.sampler_left
                                           : patterns.sampler_right;
      entry.position = fallback.sample(trial);
    }
    result.unveil.entries.push_back(entry);
  }
  return result;
}

ScreenPattern ballistic_pattern(const ComplexField& slit_field, double mass,
                                double t, double hbar) {
  if (!(mass > 0.0) || !(t > 0.0))
    throw InvalidParams("ballistic_pattern: mass and t must be positive");
  ComplexField k_space = slit_field;
  fft_forward(k_space.values);
  const std::size_t n = k_space.size();
  const double dk = 2.0 * std::numbers::pi / slit_field.grid.length();
  const double scale = hbar * t / mass;  // x = scale * k
  // Reorder to ascending k: negative-frequency half first.
  const auto half = n / 2;
  Grid grid(-scale * dk * static_cast<double>(half),
            scale * dk * static_cast<double>(half), n);
  ScreenPattern pattern(grid);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = (j + half) % n;  // j=0 is the most negative k
    pattern.intensity[j] = std::norm(k_space.values[src]);
  }
  pattern.normalize();
  return pattern;
}

DelayedContext make_delayed_context(const ProtocolConfig& cfg,
                                    const PatternSet& patterns) {
  if (!(cfg.measure_time > cfg.t1))
    throw InvalidParams("cheat_delayed: measure_time must exceed t1");
  DelayedContext ctx;
  // Late-measurement patterns per slit setting; far wider than at t1.
  ctx.late_both = ballistic_pattern(patterns.field_both, cfg.mass, cfg.measure_time);
  ctx.late_left = ballistic_pattern(patterns.field_left, cfg.mass, cfg.measure_time);
  ctx.late_right = ballistic_pattern(patterns.field_right, cfg.mass, cfg.measure_time);
  ctx.sampler_both = PatternSampler(ctx.late_both);
  ctx.sampler_left = PatternSampler(ctx.late_left);
  ctx.sampler_right = PatternSampler(ctx.late_right);
  ctx.width_ratio = pattern_sd(ctx.late_both) / pattern_sd(patterns.screen_both);
  return ctx;
}

DelayedResult cheat_delayed(int unveil_bit, const std::vector<TrialSetup>& setups,
                            const std::vector<TrialWorld>& world,
                            const ProtocolConfig& cfg, const DelayedContext& context,
                            std::uint64_t session_id, const RandomStream& session_root) {
  if (unveil_bit != 0 && unveil_bit != 1)
    throw InvalidParams("cheat_delayed: unveil bit must be 0 or 1");
  if (setups.size() != world.size())
    throw StateMismatch("cheat_delayed: setup/world length mismatch");

  const RandomStream adv = role_stream(session_root, StreamRole::Adversary);

  DelayedResult result;
  result.transcript.session_id = session_id;
  result.transcript.config_hash = cfg.hash();
  result.transcript.n_trials = setups.size();
  result.transcript.announce_time = cfg.t1;
  result.transcript.detected.resize(setups.size(), 0);
  result.unveil.session_id = session_id;
  result.unveil.bit = unveil_bit;
  result.width_ratio = context.width_ratio;

  for (std::size_t i = 0; i < setups.size(); ++i) {
    if (!world[i].transmitted) continue;
    RandomStream trial = adv.substream(i);
    if (cfg.announce_fraction < 1.0 && !trial.bernoulli(cfg.announce_fraction)) continue;
    result.transcript.detected[i] = 1;
    ++result.announced;
    if (world[i].decay_time <= cfg.measure_time) {
      // Decayed before she finally measured: announced, nothing to unveil.
      ++result.unsupported;
      continue;
    }
    UnveilEntry entry;
    entry.trial_id = i;
    if (unveil_bit == 1) {
      entry.position = context.sampler(setups[i].bob_choice).sample(trial);
    } else {
      // All which-slit information is long gone; a coin is her best claim.
      entry.slit = trial.bernoulli(0.5) ? Slit::Left : Slit::Right;
    }
    result.unveil.entries.push_back(entry);
  }
  result.missing_fraction =
      result.announced == 0
          ? 0.0
          : static_cast<double>(result.unsupported) / static_cast<double>(result.announced);
  return result;
}

}  // namespace qbc
