#pragma once

#include <string>

#include <json.hpp>

#include "qbcsim/protocol.hpp"
#include "qbcsim/verify.hpp"

namespace qbc {

using ordered_json = nlohmann::ordered_json;

// 17 significant digits, enough to round-trip any double exactly. Times and
// positions travel as decimal strings of this form.
std::string sig17(double v);

std::string slit_name(Slit slit);
Slit parse_slit(const std::string& name);
std::string slit_open_name(SlitOpen open);
SlitOpen parse_slit_open(const std::string& name);

ordered_json transcript_to_json(const CommitTranscript& transcript);
CommitTranscript transcript_from_json(const ordered_json& j);

ordered_json unveil_to_json(const UnveilMessage& unveil);
UnveilMessage unveil_from_json(const ordered_json& j);

ordered_json sealed_to_json(const SealedRecord& sealed);
SealedRecord sealed_from_json(const ordered_json& j);

ordered_json verdict_to_json(const Verdict& verdict);

ordered_json quantiles_to_json(const QuantileTable& table);
QuantileTable quantiles_from_json(const ordered_json& j);

ordered_json config_to_json(const ProtocolConfig& cfg);

// CSV exports: `x_m,intensity` for patterns, `x_m,re,im` for field
// snapshots, 17 significant digits.
std::string pattern_to_csv(const ScreenPattern& pattern);
std::string field_to_csv(const ComplexField& field);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace qbc
