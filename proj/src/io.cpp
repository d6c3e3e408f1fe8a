#include "qbcsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qbcsim/errors.hpp"

namespace qbc {
namespace {

double parse_sig17(const ordered_json& j, const char* what) {
  if (!j.is_string()) throw InvalidParams(std::string("json: ") + what + " must be a decimal string");
  const std::string s = j.get<std::string>();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidParams(std::string("json: bad decimal string for ") + what);
  }
}

void expect_schema(const ordered_json& j, const std::string& schema) {
  if (!j.contains("schema") || j.at("schema") != schema)
    throw InvalidParams("json: expected schema '" + schema + "'");
}

}  // namespace

std::string sig17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string slit_name(Slit slit) { return slit == Slit::Left ? "left" : "right"; }

Slit parse_slit(const std::string& name) {
  if (name == "left") return Slit::Left;
  if (name == "right") return Slit::Right;
  throw InvalidParams("json: unknown slit '" + name + "'");
}

std::string slit_open_name(SlitOpen open) {
  switch (open) {
    case SlitOpen::Both: return "both";
    case SlitOpen::LeftOnly: return "left";
    case SlitOpen::RightOnly: return "right";
  }
  throw StateMismatch("slit_open_name: bad enum");
}

SlitOpen parse_slit_open(const std::string& name) {
  if (name == "both") return SlitOpen::Both;
  if (name == "left") return SlitOpen::LeftOnly;
  if (name == "right") return SlitOpen::RightOnly;
  throw InvalidParams("json: unknown slit setting '" + name + "'");
}

ordered_json transcript_to_json(const CommitTranscript& transcript) {
  ordered_json j;
  j["schema"] = "qbc-transcript/1";
  j["session_id"] = transcript.session_id;
  j["config_hash"] = transcript.config_hash;
  j["n_trials"] = transcript.n_trials;
  j["announce_time_s"] = sig17(transcript.announce_time);
  ordered_json detected = ordered_json::array();
  for (auto d : transcript.detected) detected.push_back(static_cast<int>(d));
  j["detected"] = detected;
  return j;
}

CommitTranscript transcript_from_json(const ordered_json& j) {
  expect_schema(j, "qbc-transcript/1");
  CommitTranscript t;
  t.session_id = j.at("session_id").get<std::uint64_t>();
  t.config_hash = j.at("config_hash").get<std::uint64_t>();
  t.n_trials = j.at("n_trials").get<std::uint64_t>();
  t.announce_time = parse_sig17(j.at("announce_time_s"), "announce_time_s");
  for (const auto& d : j.at("detected"))
    t.detected.push_back(d.get<int>() != 0 ? 1 : 0);
  if (t.detected.size() != t.n_trials)
    throw InvalidParams("json: transcript detected length != n_trials");
  return t;
}

ordered_json unveil_to_json(const UnveilMessage& unveil) {
  ordered_json j;
  j["schema"] = "qbc-unveil/1";
  j["session_id"] = unveil.session_id;
  j["bit"] = unveil.bit;
  ordered_json entries = ordered_json::array();
  for (const UnveilEntry& e : unveil.entries) {
    ordered_json je;
    je["trial_id"] = e.trial_id;
    if (unveil.bit == 0)
      je["slit"] = slit_name(e.slit);
    else
      je["x_m"] = sig17(e.position);
    entries.push_back(je);
  }
  j["entries"] = entries;
  return j;
}

UnveilMessage unveil_from_json(const ordered_json& j) {
  expect_schema(j, "qbc-unveil/1");
  UnveilMessage u;
  u.session_id = j.at("session_id").get<std::uint64_t>();
  u.bit = j.at("bit").get<int>();
  if (u.bit != 0 && u.bit != 1) throw InvalidParams("json: unveil bit must be 0 or 1");
  for (const auto& je : j.at("entries")) {
    UnveilEntry e;
    e.trial_id = je.at("trial_id").get<std::uint64_t>();
    if (u.bit == 0)
      e.slit = parse_slit(je.at("slit").get<std::string>());
    else
      e.position = parse_sig17(je.at("x_m"), "x_m");
    u.entries.push_back(e);
  }
  return u;
}

ordered_json sealed_to_json(const SealedRecord& sealed) {
  ordered_json j;
  j["schema"] = "qbc-sealed/1";
  j["session_id"] = sealed.session_id;
  ordered_json choices = ordered_json::array();
  for (const SlitOpen c : sealed.choices) choices.push_back(slit_open_name(c));
  j["choices"] = choices;
  return j;
}

SealedRecord sealed_from_json(const ordered_json& j) {
  expect_schema(j, "qbc-sealed/1");
  SealedRecord s;
  s.session_id = j.at("session_id").get<std::uint64_t>();
  for (const auto& c : j.at("choices"))
    s.choices.push_back(parse_slit_open(c.get<std::string>()));
  return s;
}

ordered_json verdict_to_json(const Verdict& verdict) {
  ordered_json j;
  j["schema"] = "qbc-verdict/1";
  j["accept"] = verdict.accept;
  j["rejection_reason"] =
      verdict.accept ? ordered_json(nullptr) : ordered_json(reject_reason_name(verdict.reason));
  ordered_json tests = ordered_json::array();
  for (const TestOutcome& t : verdict.tests) {
    ordered_json jt;
    jt["name"] = t.name;
    jt["statistic"] = sig17(t.statistic);
    jt["p_value"] = t.exact ? ordered_json(nullptr) : ordered_json(sig17(t.p_value));
    jt["threshold"] = sig17(t.threshold);
    jt["exact"] = t.exact;
    jt["pass"] = t.pass;
    tests.push_back(jt);
  }
  j["tests"] = tests;
  return j;
}

ordered_json quantiles_to_json(const QuantileTable& table) {
  ordered_json j;
  j["schema"] = "qbc-quantiles/1";
  j["config_hash"] = table.config_hash;
  j["sessions"] = table.sessions;
  j["seed"] = table.seed;
  j["z_threshold"] = sig17(table.z_threshold);
  j["llr_threshold"] = sig17(table.llr_threshold);
  return j;
}

QuantileTable quantiles_from_json(const ordered_json& j) {
  expect_schema(j, "qbc-quantiles/1");
  QuantileTable t;
  t.config_hash = j.at("config_hash").get<std::uint64_t>();
  t.sessions = j.at("sessions").get<std::uint64_t>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.z_threshold = parse_sig17(j.at("z_threshold"), "z_threshold");
  t.llr_threshold = parse_sig17(j.at("llr_threshold"), "llr_threshold");
  return t;
}

ordered_json config_to_json(const ProtocolConfig& cfg) {
  ordered_json j;
  j["wavelength_m"] = sig17(cfg.wavelength);
  j["slit_width_m"] = sig17(cfg.slit_width);
  j["slit_separation_m"] = sig17(cfg.slit_separation);
  j["screen_distance_m"] = sig17(cfg.screen_distance);
  j["sigma0_m"] = sig17(cfg.sigma0);
  j["edge_softness_m"] = sig17(cfg.edge_softness);
  j["mass_kg"] = sig17(cfg.mass);
  j["tau_s"] = sig17(cfg.tau);
  j["grid_points"] = cfg.grid_points;
  j["grid_halfwidth_m"] = sig17(cfg.grid_halfwidth);
  j["trials"] = cfg.trials;
  j["t0_s"] = sig17(cfg.t0);
  j["t1_s"] = sig17(cfg.t1);
  j["commit_end_s"] = sig17(cfg.commit_end);
  j["unveil_time_s"] = sig17(cfg.unveil_time);
  j["t1_guard_divisor"] = sig17(cfg.t1_guard_divisor);
  j["epsilon_v"] = sig17(cfg.epsilon_v);
  j["both_prob"] = sig17(cfg.both_prob);
  j["alpha_override"] = sig17(cfg.alpha_override);
  j["guess_rule"] = guess_rule_name(cfg.guess_rule);
  j["measure_time_s"] = sig17(cfg.measure_time);
  j["announce_fraction"] = sig17(cfg.announce_fraction);
  j["config_hash"] = cfg.hash();
  return j;
}

std::string pattern_to_csv(const ScreenPattern& pattern) {
  std::ostringstream out;
  out << "x_m,intensity\n";
  for (std::size_t i = 0; i < pattern.intensity.size(); ++i)
    out << sig17(pattern.grid.x(i)) << ',' << sig17(pattern.intensity[i]) << '\n';
  return out.str();
}

std::string field_to_csv(const ComplexField& field) {
  std::ostringstream out;
  out << "x_m,re,im\n";
  for (std::size_t i = 0; i < field.size(); ++i)
    out << sig17(field.grid.x(i)) << ',' << sig17(field.values[i].real()) << ','
        << sig17(field.values[i].imag()) << '\n';
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace qbc
