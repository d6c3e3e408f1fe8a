// Session-layer tests: Bob's trial preparation, nature's decay/transmission
// draws, the commit and unveil messages, and the bit-independence of
// everything Bob can see before the unveil.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qbcsim/config.hpp"
#include "qbcsim/errors.hpp"
#include "qbcsim/patterns.hpp"
#include "qbcsim/protocol.hpp"
#include "qbcsim/stats.hpp"

using namespace qbc;

namespace {

const ProtocolConfig& default_config() {
  static const ProtocolConfig cfg = [] {
    ProtocolConfig c;
    c.finalize();
    return c;
  }();
  return cfg;
}

const PatternSet& default_patterns() {
  static const PatternSet patterns = compute_patterns(default_config());
  return patterns;
}

ProtocolConfig many_trials_config(std::uint64_t n) {
  ProtocolConfig cfg;
  cfg.trials = n;
  cfg.finalize();
  return cfg;
}

}  // namespace

TEST_CASE("trial preparation is deterministic and self-consistent") {
  const ProtocolConfig cfg = many_trials_config(500);
  const RandomStream root(91);
  const PreparedTrials a = bob_prepare_trials(cfg, 17, root);
  const PreparedTrials b = bob_prepare_trials(cfg, 17, root);
  REQUIRE(a.setups.size() == 500);
  CHECK(a.sealed.session_id == 17);
  CHECK(a.sealed.choices.size() == a.setups.size());
  for (std::size_t i = 0; i < a.setups.size(); ++i) {
    CHECK(a.setups[i].trial_id == i);
    CHECK(a.setups[i].bob_choice == a.sealed.choices[i]);
    CHECK(a.setups[i].bob_choice == b.setups[i].bob_choice);
  }
  const PreparedTrials c = bob_prepare_trials(cfg, 17, RandomStream(92));
  bool any_difference = false;
  for (std::size_t i = 0; i < a.setups.size(); ++i)
    any_difference |= (a.setups[i].bob_choice != c.setups[i].bob_choice);
  CHECK(any_difference);
}

TEST_CASE("slit choices follow the configured mixture") {
  const ProtocolConfig cfg = many_trials_config(100000);
  const PreparedTrials prep = bob_prepare_trials(cfg, 1, RandomStream(2026));
  std::size_t n_both = 0, n_left = 0, n_right = 0;
  for (const TrialSetup& s : prep.setups) {
    if (s.bob_choice == SlitOpen::Both) ++n_both;
    else if (s.bob_choice == SlitOpen::LeftOnly) ++n_left;
    else ++n_right;
  }
  const double n = static_cast<double>(cfg.trials);
  const double sd_both = std::sqrt(n * cfg.both_prob * (1.0 - cfg.both_prob));
  CHECK(std::abs(n_both - n * cfg.both_prob) < 3.0 * sd_both);
  // Single-slit trials split evenly between the two sides.
  const double singles = static_cast<double>(n_left + n_right);
  CHECK(std::abs(n_left - 0.5 * singles) < 3.0 * std::sqrt(singles * 0.25));
}

TEST_CASE("world draws reproduce the detection physics") {
  const ProtocolConfig cfg = many_trials_config(100000);
  const PatternSet& patterns = default_patterns();
  const RandomStream root(555);
  const PreparedTrials prep = bob_prepare_trials(cfg, 9, root);
  const std::vector<TrialWorld> world = simulate_world(cfg, patterns, prep.setups, root);
  REQUIRE(world.size() == prep.setups.size());

  const CommitResult commit =
      alice_commit_honest(0, prep.setups, world, cfg, patterns, 9, root);

  // Detection = transmitted AND alive at the announcement time; exact.
  double expected = 0.0, variance = 0.0;
  const double survival = std::exp(-cfg.t1 / cfg.tau);
  std::size_t detected = 0;
  for (std::size_t i = 0; i < world.size(); ++i) {
    CHECK(world[i].decay_time >= 0.0);
    const bool d = world[i].transmitted && world[i].decay_time > cfg.t1;
    CHECK(static_cast<bool>(commit.transcript.detected[i]) == d);
    detected += d;
    const double p =
        patterns.alpha_effective(prep.setups[i].bob_choice, cfg) * survival;
    expected += p;
    variance += p * (1.0 - p);
  }
  CHECK(std::abs(static_cast<double>(detected) - expected) <
        3.0 * std::sqrt(variance));
}

TEST_CASE("transcripts are identical whichever bit was committed") {
  const ProtocolConfig cfg = many_trials_config(2000);
  const PatternSet& patterns = default_patterns();
  const RandomStream root(808);
  const PreparedTrials prep = bob_prepare_trials(cfg, 4, root);
  const std::vector<TrialWorld> world = simulate_world(cfg, patterns, prep.setups, root);

  const CommitResult c0 = alice_commit_honest(0, prep.setups, world, cfg, patterns, 4, root);
  const CommitResult c1 = alice_commit_honest(1, prep.setups, world, cfg, patterns, 4, root);

  CHECK(c0.transcript.session_id == 4);
  CHECK(c0.transcript.config_hash == cfg.hash());
  CHECK(c0.transcript.n_trials == cfg.trials);
  CHECK(c0.transcript.announce_time == cfg.t1);
  CHECK(c1.transcript.announce_time == cfg.t1);
  // Bob's entire pre-unveil view carries no bit information.
  CHECK(c0.transcript.detected == c1.transcript.detected);
}

TEST_CASE("which-slit commitments follow forced slits and the both-slit weight") {
  const ProtocolConfig cfg = many_trials_config(100000);
  const PatternSet& patterns = default_patterns();
  const RandomStream root(313);
  const PreparedTrials prep = bob_prepare_trials(cfg, 2, root);
  const std::vector<TrialWorld> world = simulate_world(cfg, patterns, prep.setups, root);
  const CommitResult commit =
      alice_commit_honest(0, prep.setups, world, cfg, patterns, 2, root);

  std::size_t both_detected = 0, both_left = 0;
  for (std::size_t i = 0; i < prep.setups.size(); ++i) {
    if (!commit.state.data[i].detected) continue;
    const Slit s = commit.state.data[i].slit;
    switch (prep.setups[i].bob_choice) {
      case SlitOpen::LeftOnly: CHECK(s == Slit::Left); break;
      case SlitOpen::RightOnly: CHECK(s == Slit::Right); break;
      case SlitOpen::Both:
        ++both_detected;
        both_left += (s == Slit::Left);
        break;
    }
  }
  REQUIRE(both_detected > 1000);
  const double n = static_cast<double>(both_detected);
  const double p = patterns.p_left_given_both;
  CHECK(std::abs(both_left - n * p) < 3.0 * std::sqrt(n * p * (1.0 - p)));
}

TEST_CASE("screen commitments draw positions from the right patterns") {
  const ProtocolConfig cfg = many_trials_config(100000);
  const PatternSet& patterns = default_patterns();
  const RandomStream root(626);
  const PreparedTrials prep = bob_prepare_trials(cfg, 3, root);
  const std::vector<TrialWorld> world = simulate_world(cfg, patterns, prep.setups, root);
  const CommitResult commit =
      alice_commit_honest(1, prep.setups, world, cfg, patterns, 3, root);

  const Grid& grid = patterns.grid;
  std::vector<double> both_positions;
  for (std::size_t i = 0; i < prep.setups.size(); ++i) {
    if (!commit.state.data[i].detected) continue;
    const double x = commit.state.data[i].position;
    CHECK(x >= grid.x_min);
    CHECK(x < grid.x_max);
    if (prep.setups[i].bob_choice == SlitOpen::Both) both_positions.push_back(x);
  }
  REQUIRE(both_positions.size() > 5000);

  // Coarse-bin goodness of fit of the sampled both-slit positions against
  // the computed screen pattern.
  const std::size_t coarse = 128;
  const std::size_t per = grid.n_points / coarse;
  std::vector<double> observed(coarse, 0.0), expected(coarse, 0.0);
  for (const double x : both_positions) {
    const auto bin = static_cast<std::size_t>((x - grid.x_min) / grid.dx());
    observed[std::min(bin / per, coarse - 1)] += 1.0;
  }
  const double scale =
      static_cast<double>(both_positions.size()) * grid.dx();
  for (std::size_t i = 0; i < grid.n_points; ++i)
    expected[i / per] += patterns.screen_both.intensity[i] * scale;
  const ChiSquareFit gof = chi_square_gof(observed, expected, 8.0);
  CHECK(gof.dof > 5);
  CHECK(gof.p_value > 1e-3);

  // Sampled spread matches the pattern's own standard deviation.
  double m1 = 0.0, m2 = 0.0;
  for (const double x : both_positions) { m1 += x; m2 += x * x; }
  m1 /= static_cast<double>(both_positions.size());
  m2 = m2 / static_cast<double>(both_positions.size()) - m1 * m1;
  const double sd = pattern_sd(patterns.screen_both);
  CHECK(std::abs(std::sqrt(m2) - sd) < 0.05 * sd);
}

TEST_CASE("honest unveil lists exactly the detected trials in order") {
  const ProtocolConfig cfg = many_trials_config(3000);
  const PatternSet& patterns = default_patterns();
  const RandomStream root(404);
  const PreparedTrials prep = bob_prepare_trials(cfg, 11, root);
  const std::vector<TrialWorld> world = simulate_world(cfg, patterns, prep.setups, root);

  for (const int bit : {0, 1}) {
    const CommitResult commit =
        alice_commit_honest(bit, prep.setups, world, cfg, patterns, 11, root);
    const UnveilMessage msg = alice_unveil_honest(commit.state);
    CHECK(msg.session_id == 11);
    CHECK(msg.bit == bit);
    CHECK(msg.entries.size() == commit.transcript.detected_count());
    std::size_t cursor = 0;
    std::uint64_t previous = 0;
    bool ordered = true, matched = true;
    for (const UnveilEntry& e : msg.entries) {
      if (cursor > 0 && e.trial_id <= previous) ordered = false;
      matched &= commit.transcript.detected[e.trial_id] == 1;
      previous = e.trial_id;
      ++cursor;
    }
    CHECK(ordered);
    CHECK(matched);
  }

  AlicePrivateState empty;
  empty.session_id = 11;
  empty.bit = 1;
  empty.data.resize(50);  // nothing detected
  const UnveilMessage none = alice_unveil_honest(empty);
  CHECK(none.entries.empty());
}

TEST_CASE("commit rejects malformed inputs") {
  const ProtocolConfig cfg = many_trials_config(100);
  const PatternSet& patterns = default_patterns();
  const RandomStream root(1);
  const PreparedTrials prep = bob_prepare_trials(cfg, 1, root);
  std::vector<TrialWorld> world = simulate_world(cfg, patterns, prep.setups, root);
  CHECK_THROWS_AS(
      alice_commit_honest(2, prep.setups, world, cfg, patterns, 1, root),
      InvalidParams);
  world.pop_back();
  CHECK_THROWS_AS(
      alice_commit_honest(0, prep.setups, world, cfg, patterns, 1, root),
      StateMismatch);
}

TEST_CASE("the whole session layer is bitwise reproducible") {
  const ProtocolConfig cfg = many_trials_config(1500);
  const PatternSet& patterns = default_patterns();
  const RandomStream root(7777);

  const auto run = [&] {
    const PreparedTrials prep = bob_prepare_trials(cfg, 77, root);
    const std::vector<TrialWorld> world =
        simulate_world(cfg, patterns, prep.setups, root);
    const CommitResult commit =
        alice_commit_honest(1, prep.setups, world, cfg, patterns, 77, root);
    return alice_unveil_honest(commit.state);
  };
  const UnveilMessage a = run();
  const UnveilMessage b = run();
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].trial_id == b.entries[i].trial_id);
    CHECK(a.entries[i].position == b.entries[i].position);  // bit-exact
  }
}
