#pragma once

#include <string>

#include <json.hpp>

#include "nsq/action.hpp"
#include "nsq/hamiltonians.hpp"
#include "nsq/minimax_flow.hpp"
#include "nsq/nonsqueeze.hpp"
#include "nsq/ps_diagnostics.hpp"
#include "nsq/symplectomorphisms.hpp"

namespace nsq::io {

using json = nlohmann::ordered_json;

json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);
/// 2-space indent, trailing newline.
std::string dump(const json& j);

// loops: {"d", "K", "coeffs": [[x^{-K}], ..., [x^K]]}
json loop_to_json(const FourierLoop& x);
FourierLoop loop_from_json(const json& j);

/// Builds a Hamiltonian; `resolved` receives the config with defaults filled in.
HamPtr hamiltonian_from_json(const json& j, int d, json* resolved = nullptr);
MapPtr map_from_json(const json& j, int d, json* resolved = nullptr);

FlowConfig flow_from_json(const json& j, FlowConfig base = {});
json flow_to_json(const FlowConfig& f);

/// Reads the nonsqueeze section; `resolved` echoes every field actually used.
NonsqueezeConfig nonsqueeze_from_json(const json& j, json* resolved = nullptr);

json action_report_json(const ActionReport& r);
json trace_json(const MinimaxTrace& tr, bool with_loops);
/// t, sup, witness gradient
std::string trace_csv(const MinimaxTrace& tr);
/// k, |y^k| for the log-log plot
std::string decay_csv(const DecayFit& f);
std::string profile_g_csv(const ProfileG& g, int samples);
std::string profile_rho_csv(const ProfileRho& rho, int samples);
json decay_json(const DecayFit& f);
json candidate_json(const PSCandidate& c);
json level_verdict_json(const LevelVerdict& v);
json nonsqueeze_report_json(const NonsqueezeReport& rep, bool with_loops);
json admissibility_json(const AdmissibilityReport& rep);

/// Doubles that may be non-finite are written as strings ("inf", "-inf", "nan").
json number(double v);

}  // namespace nsq::io
