// Verifier and adversary tests: calibration determinism, acceptance of
// honest sessions, each rejection path triggered by a targeted tamper, and
// the two cheating strategies' observable fingerprints.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "qbcsim/adversary.hpp"
#include "qbcsim/config.hpp"
#include "qbcsim/errors.hpp"
#include "qbcsim/patterns.hpp"
#include "qbcsim/protocol.hpp"
#include "qbcsim/stats.hpp"
#include "qbcsim/verify.hpp"

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

const QuantileTable& frozen_table() {
  static const QuantileTable table =
      calibrate_quantiles(default_config(), default_patterns(), 2000, 777);
  return table;
}

struct HonestSession {
  PreparedTrials prep;
  std::vector<TrialWorld> world;
  CommitResult commit;
  UnveilMessage unveil;
};

HonestSession play_honest(const ProtocolConfig& cfg, int bit, std::uint64_t seed) {
  const PatternSet& patterns = default_patterns();
  const RandomStream root(seed);
  HonestSession s;
  s.prep = bob_prepare_trials(cfg, seed, root);
  s.world = simulate_world(cfg, patterns, s.prep.setups, root);
  s.commit = alice_commit_honest(bit, s.prep.setups, s.world, cfg, patterns, seed, root);
  s.unveil = alice_unveil_honest(s.commit.state);
  return s;
}

const TestOutcome& outcome_named(const Verdict& v, const std::string& name) {
  for (const TestOutcome& t : v.tests)
    if (t.name == name) return t;
  REQUIRE_MESSAGE(false, "no test named " << name);
  static const TestOutcome dummy{};
  return dummy;
}

}  // namespace

TEST_CASE("quantile calibration is deterministic with frozen thresholds") {
  const QuantileTable& table = frozen_table();
  CHECK(table.config_hash == default_config().hash());
  CHECK(table.sessions == 2000);
  CHECK(table.seed == 777);
  CHECK(table.z_threshold ==
        doctest::Approx(-4.001167623407178).epsilon(1e-9));
  CHECK(table.llr_threshold ==
        doctest::Approx(-4.8628866305251233).epsilon(1e-9));
  const QuantileTable again =
      calibrate_quantiles(default_config(), default_patterns(), 2000, 777);
  CHECK(again.z_threshold == table.z_threshold);
  CHECK(again.llr_threshold == table.llr_threshold);
  CHECK_THROWS_AS(
      calibrate_quantiles(default_config(), default_patterns(), 99, 1),
      InvalidParams);
}

TEST_CASE("honest sessions pass every check for both bits") {
  const ProtocolConfig& cfg = default_config();
  {
    const HonestSession s = play_honest(cfg, 0, 1001);
    const Verdict v = verify(s.commit.transcript, s.unveil, s.prep.sealed, cfg,
                             default_patterns(), std::nullopt);
    CHECK(v.accept);
    CHECK(v.reason == RejectReason::None);
    REQUIRE(v.tests.size() == 4);
    CHECK(v.tests[0].name == "missing_data");
    CHECK(v.tests[1].name == "slit_consistency_exact");
    CHECK(v.tests[2].name == "slit_consistency_binomial");
    CHECK(v.tests[3].name == "count_anomaly");
    for (const TestOutcome& t : v.tests) CHECK(t.pass);
  }
  {
    const HonestSession s = play_honest(cfg, 1, 1002);
    const Verdict v = verify(s.commit.transcript, s.unveil, s.prep.sealed, cfg,
                             default_patterns(), frozen_table());
    CHECK(v.accept);
    REQUIRE(v.tests.size() == 5);
    CHECK(v.tests[1].name == "pattern_loglik");
    CHECK(v.tests[2].name == "fringe_llr");
    CHECK(v.tests[3].name == "pattern_chi2");
    for (const TestOutcome& t : v.tests) CHECK(t.pass);
  }
}

TEST_CASE("a slit claim against a forced trial is rejected exactly") {
  const ProtocolConfig& cfg = default_config();
  HonestSession s = play_honest(cfg, 0, 2001);
  bool flipped = false;
  for (UnveilEntry& e : s.unveil.entries) {
    const SlitOpen choice = s.prep.sealed.choices[e.trial_id];
    if (choice == SlitOpen::LeftOnly) {
      e.slit = Slit::Right;
      flipped = true;
      break;
    }
  }
  REQUIRE(flipped);
  const Verdict v = verify(s.commit.transcript, s.unveil, s.prep.sealed, cfg,
                           default_patterns(), std::nullopt);
  CHECK_FALSE(v.accept);
  CHECK(v.reason == RejectReason::SlitMismatch);
  const TestOutcome& exact = outcome_named(v, "slit_consistency_exact");
  CHECK_FALSE(exact.pass);
  CHECK(exact.statistic == 1.0);
}

TEST_CASE("coverage violations are rejected as missing data") {
  const ProtocolConfig& cfg = default_config();
  const HonestSession base = play_honest(cfg, 0, 2002);
  REQUIRE(base.unveil.entries.size() > 2);

  const auto expect_missing = [&](const UnveilMessage& tampered) {
    const Verdict v = verify(base.commit.transcript, tampered, base.prep.sealed,
                             cfg, default_patterns(), std::nullopt);
    CHECK_FALSE(v.accept);
    CHECK(v.reason == RejectReason::MissingData);
    CHECK_FALSE(outcome_named(v, "missing_data").pass);
  };

  SUBCASE("withholding an announced trial") {
    UnveilMessage m = base.unveil;
    m.entries.pop_back();
    expect_missing(m);
  }
  SUBCASE("unveiling a trial that was never announced") {
    UnveilMessage m = base.unveil;
    std::size_t undetected = 0;
    while (base.commit.transcript.detected[undetected] != 0) ++undetected;
    UnveilEntry extra;
    extra.trial_id = undetected;
    extra.slit = Slit::Left;
    m.entries.push_back(extra);
    expect_missing(m);
  }
  SUBCASE("duplicating an entry") {
    UnveilMessage m = base.unveil;
    m.entries.push_back(m.entries.front());
    expect_missing(m);
  }
  SUBCASE("referencing a trial outside the session") {
    UnveilMessage m = base.unveil;
    m.entries.front().trial_id = cfg.trials + 5;
    expect_missing(m);
  }
}

TEST_CASE("positions slid off the fringes are rejected as pattern mismatch") {
  const ProtocolConfig& cfg = default_config();
  HonestSession s = play_honest(cfg, 1, 2003);
  const double half_fringe = 0.5 * cfg.fringe_spacing();
  for (UnveilEntry& e : s.unveil.entries) e.position += half_fringe;
  const Verdict v = verify(s.commit.transcript, s.unveil, s.prep.sealed, cfg,
                           default_patterns(), frozen_table());
  CHECK_FALSE(v.accept);
  CHECK(v.reason == RejectReason::PatternMismatch);
}

TEST_CASE("suppressed detections are rejected as a count anomaly") {
  ProtocolConfig cfg;
  cfg.trials = 2000;
  cfg.finalize();
  HonestSession s = play_honest(cfg, 0, 2004);

  // Drop every other detection, keeping the unveiling consistent so only
  // the count statistic can complain.
  std::size_t running = 0;
  std::vector<std::uint8_t> kept(cfg.trials, 0);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    if (!s.commit.transcript.detected[t]) continue;
    kept[t] = (running % 2 == 0) ? 1 : 0;
    ++running;
  }
  s.commit.transcript.detected = kept;
  UnveilMessage thinned;
  thinned.session_id = s.unveil.session_id;
  thinned.bit = s.unveil.bit;
  for (const UnveilEntry& e : s.unveil.entries)
    if (kept[e.trial_id]) thinned.entries.push_back(e);

  const Verdict v = verify(s.commit.transcript, thinned, s.prep.sealed, cfg,
                           default_patterns(), std::nullopt);
  CHECK_FALSE(v.accept);
  CHECK(v.reason == RejectReason::CountAnomaly);
  const TestOutcome& count = outcome_named(v, "count_anomaly");
  CHECK(count.statistic < -4.0);
}

TEST_CASE("verification is bound to session, config, and calibration") {
  const ProtocolConfig& cfg = default_config();
  const HonestSession s = play_honest(cfg, 1, 2005);
  const PatternSet& patterns = default_patterns();

  UnveilMessage wrong_session = s.unveil;
  wrong_session.session_id += 1;
  CHECK_THROWS_AS(verify(s.commit.transcript, wrong_session, s.prep.sealed, cfg,
                         patterns, frozen_table()),
                  SessionMismatch);

  CommitTranscript wrong_config = s.commit.transcript;
  wrong_config.config_hash ^= 1;
  CHECK_THROWS_AS(verify(wrong_config, s.unveil, s.prep.sealed, cfg, patterns,
                         frozen_table()),
                  SessionMismatch);

  CommitTranscript wrong_count = s.commit.transcript;
  wrong_count.n_trials -= 1;
  CHECK_THROWS_AS(verify(wrong_count, s.unveil, s.prep.sealed, cfg, patterns,
                         frozen_table()),
                  SessionMismatch);

  UnveilMessage bad_bit = s.unveil;
  bad_bit.bit = 2;
  CHECK_THROWS_AS(verify(s.commit.transcript, bad_bit, s.prep.sealed, cfg,
                         patterns, frozen_table()),
                  InvalidParams);

  CHECK_THROWS_AS(verify(s.commit.transcript, s.unveil, s.prep.sealed, cfg,
                         patterns, std::nullopt),
                  UncalibratedQuantiles);
  QuantileTable stale = frozen_table();
  stale.config_hash ^= 1;
  CHECK_THROWS_AS(verify(s.commit.transcript, s.unveil, s.prep.sealed, cfg,
                         patterns, stale),
                  UncalibratedQuantiles);
}

TEST_CASE("pattern statistics degrade gracefully on empty unveilings") {
  UnveilMessage empty;
  SealedRecord sealed;
  sealed.choices.assign(10, SlitOpen::Both);
  CHECK(position_loglik_z(empty, sealed, default_patterns()) == 0.0);
  CHECK(position_fringe_llr(empty, sealed, default_patterns()) == 0.0);
}

TEST_CASE("bit-flip cheats announce honestly and fabricate the other bit") {
  ProtocolConfig cfg;
  cfg.trials = 2000;
  cfg.finalize();
  const PatternSet& patterns = default_patterns();
  const RandomStream root(3001);
  const PreparedTrials prep = bob_prepare_trials(cfg, 30, root);
  const auto world = simulate_world(cfg, patterns, prep.setups, root);

  for (const int committed : {0, 1}) {
    const BitFlipResult cheat =
        cheat_bitflip(committed, prep.setups, world, cfg, patterns, 30, root);
    CHECK(cheat.committed_bit == committed);
    CHECK(cheat.unveiled_bit == 1 - committed);
    CHECK(cheat.unveil.bit == 1 - committed);

    // The commit phase is honest, so the transcript matches honest play.
    const CommitResult honest =
        alice_commit_honest(committed, prep.setups, world, cfg, patterns, 30, root);
    CHECK(cheat.transcript.detected == honest.transcript.detected);
    CHECK(cheat.transcript.announce_time == cfg.t1);

    // Entries cover exactly the detected trials, in order.
    CHECK(cheat.unveil.entries.size() == cheat.transcript.detected_count());
    for (const UnveilEntry& e : cheat.unveil.entries) {
      CHECK(cheat.transcript.detected[e.trial_id] == 1);
      if (committed == 0) {
        CHECK(e.position >= patterns.grid.x_min);
        CHECK(e.position < patterns.grid.x_max);
      }
    }
  }
  CHECK_THROWS_AS(cheat_bitflip(2, prep.setups, world, cfg, patterns, 30, root),
                  InvalidParams);
}

TEST_CASE("maximum-likelihood slit guesses follow the envelope sides") {
  // The single-slit envelopes are centered at -d/2 and +d/2; far into one
  // side the likelihood ratio is decisive, so the guessing rule must claim
  // that side. Exercised through the public cheat with a both-slit-only
  // session so every entry is a guess.
  ProtocolConfig cfg;
  cfg.trials = 400;
  cfg.both_prob = 1.0;
  cfg.guess_rule = GuessRule::MaxLikelihood;
  cfg.finalize();
  const PatternSet& patterns = default_patterns();
  const RandomStream root(3002);
  const PreparedTrials prep = bob_prepare_trials(cfg, 31, root);
  const auto world = simulate_world(cfg, patterns, prep.setups, root);
  const CommitResult honest =
      alice_commit_honest(1, prep.setups, world, cfg, patterns, 31, root);
  const BitFlipResult cheat =
      cheat_bitflip(1, prep.setups, world, cfg, patterns, 31, root);
  REQUIRE(cheat.unveil.entries.size() > 20);
  for (const UnveilEntry& e : cheat.unveil.entries) {
    const double x = honest.state.data[e.trial_id].position;
    const double left = patterns.screen_left.bin_probability(x);
    const double right = patterns.screen_right.bin_probability(x);
    if (left > right) CHECK(e.slit == Slit::Left);
    if (right > left) CHECK(e.slit == Slit::Right);
  }
}

TEST_CASE("the delayed-measurement context captures the late spread") {
  const DelayedContext ctx =
      make_delayed_context(default_config(), default_patterns());
  CHECK(ctx.width_ratio ==
        doctest::Approx(37912.449400188358).epsilon(1e-6));
  CHECK(pattern_sd(ctx.late_left) > 100.0 * pattern_sd(default_patterns().screen_left));

  ProtocolConfig too_early = default_config();
  too_early.measure_time = too_early.t1;
  CHECK_THROWS_AS(make_delayed_context(too_early, default_patterns()),
                  InvalidParams);
}

TEST_CASE("delayed cheats overannounce and cannot support the decayed trials") {
  ProtocolConfig cfg;
  cfg.trials = 2000;
  cfg.finalize();
  const PatternSet& patterns = default_patterns();
  const DelayedContext ctx = make_delayed_context(cfg, patterns);
  const RandomStream root(3003);
  const PreparedTrials prep = bob_prepare_trials(cfg, 32, root);
  const auto world = simulate_world(cfg, patterns, prep.setups, root);

  const DelayedResult res =
      cheat_delayed(1, prep.setups, world, cfg, ctx, 32, root);
  CHECK(res.width_ratio == ctx.width_ratio);

  // With announce_fraction = 1 every transmitted trial is claimed detected.
  std::uint64_t transmitted = 0, dead_at_measure = 0;
  for (std::size_t i = 0; i < world.size(); ++i) {
    transmitted += world[i].transmitted;
    dead_at_measure +=
        world[i].transmitted && world[i].decay_time <= cfg.measure_time;
    CHECK(static_cast<bool>(res.transcript.detected[i]) == world[i].transmitted);
  }
  CHECK(res.announced == transmitted);
  CHECK(res.unsupported == dead_at_measure);
  CHECK(res.missing_fraction ==
        static_cast<double>(res.unsupported) / static_cast<double>(res.announced));
  CHECK(res.unveil.entries.size() == res.announced - res.unsupported);

  // Measuring at one lifetime loses about 1 - 1/e of the announced trials.
  const double expected = 1.0 - std::exp(-cfg.measure_time / cfg.tau);
  const double sd = std::sqrt(expected * (1.0 - expected) /
                              static_cast<double>(res.announced));
  CHECK(std::abs(res.missing_fraction - expected) < 3.0 * sd);

  const DelayedResult claims =
      cheat_delayed(0, prep.setups, world, cfg, ctx, 32, root);
  CHECK(claims.unveil.bit == 0);
  CHECK(claims.announced == res.announced);

  CHECK_THROWS_AS(cheat_delayed(2, prep.setups, world, cfg, ctx, 32, root),
                  InvalidParams);
  auto short_world = world;
  short_world.pop_back();
  CHECK_THROWS_AS(cheat_delayed(1, prep.setups, short_world, cfg, ctx, 32, root),
                  StateMismatch);
}

TEST_CASE("ballistic pattern is the momentum density read out at x = hbar k t / m") {
  // Analytic source: a minimum-uncertainty Gaussian of width sigma has
  // momentum spread hbar / (2 sigma), so the long-time position spread is
  // hbar t / (2 m sigma) and a momentum kick p0 moves the centroid to
  // p0 t / m.
  const Grid grid = make_grid(-20.0, 20.0, 4096);
  PacketParams params;
  params.sigma0 = 1.0;
  params.x0 = 0.0;
  params.p0 = 0.5;
  params.mass = 1.0;
  const ComplexField field = make_gaussian_packet(params, grid, 1.0);
  const double t = 200.0;
  const ScreenPattern late = ballistic_pattern(field, params.mass, t, 1.0);

  const double dx = late.grid.dx();
  double mass_total = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < late.intensity.size(); ++i) {
    const double x = late.grid.x(i);
    const double w = late.intensity[i] * dx;
    mass_total += w;
    m1 += w * x;
    m2 += w * x * x;
  }
  CHECK(mass_total == doctest::Approx(1.0).epsilon(1e-9));
  const double centroid = m1 / mass_total;
  const double spread = std::sqrt(m2 / mass_total - centroid * centroid);
  CHECK(centroid == doctest::Approx(params.p0 * t / params.mass).epsilon(1e-3));
  CHECK(spread ==
        doctest::Approx(t / (2.0 * params.sigma0 * params.mass)).epsilon(1e-2));

  CHECK_THROWS_AS(ballistic_pattern(field, 1.0, 0.0, 1.0), InvalidParams);
  CHECK_THROWS_AS(ballistic_pattern(field, -1.0, 5.0, 1.0), InvalidParams);
}
