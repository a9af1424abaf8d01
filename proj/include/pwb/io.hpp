#pragma once

#include <json.hpp>

#include <string>

#include "pwb/construct.hpp"
#include "pwb/criteria.hpp"
#include "pwb/model.hpp"
#include "pwb/moments.hpp"
#include "pwb/opcalc.hpp"
#include "pwb/sim.hpp"
#include "pwb/synth.hpp"

namespace pwb::io {

// All numeric fields are decimal strings at the working precision; key order
// is fixed by construction (insertion-ordered JSON).
using Json = nlohmann::ordered_json;

Json params_record(const SystemParams& p);
SystemParams params_from(const Json& j);

Json complex_record(const Complex& z, unsigned digits = 0);

Json spectrum_record(const Spectrum& s);

Json verdict_record(const Verdict& v);

Json gap_record(const GapCertificate& g);

Json biortho_record(const BiorthogonalFamily& b);

Json control_record(const ControlSignal& c);
ControlSignal control_from(const Json& j);

Json initial_state_record(const InitialState& y);
InitialState initial_state_from(const Json& j);

Json trajectory_summary(const ModalTrajectory& t);
// Plot-ready rows: t <tab> k <tab> component <tab> re <tab> im.
std::string trajectory_table(const ModalTrajectory& t, unsigned digits = 20);

Json counterexample_record(const Counterexample& ce, unsigned samples);

Json exponent_family_record(const ExponentFamily& f);
ExponentFamily exponent_family_from(const Json& j, const Real& T, unsigned precision,
                                    unsigned eta);

Json diffop_record(const opcalc::DiffOp& op);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

}  // namespace pwb::io
