#pragma once

// JSON encoding of every domain type plus the report builders used by the
// CLI.  Encodings are deterministic: nlohmann::json keeps keys sorted, all
// numbers are integers, and no timestamps or environment data are embedded.
//
//   ring      {"kind": "z-mod-p2" | "dual-numbers", "p": 2}
//   matrix    {"rows": 2, "cols": 2, "entries": [...]}   (dual entries [a, b])
//   sequence  {"ring": ..., "n": 4, "ranks": [...], "maps": [...]}
//   morphism  {"source": ..., "target": ..., "components": [...]}

#include "nangle/goodness.hpp"

#include <json.hpp>

namespace nangle {

inline constexpr const char* kToolName = "nangle";
inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::json;

Json to_json(const RingSpec& spec);
RingSpec ring_from_json(const Json& j);

Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const RingSpec& spec);

Json to_json(const NSigmaSequence& a);
NSigmaSequence sequence_from_json(const Json& j);

Json to_json(const SequenceMorphism& phi);
SequenceMorphism morphism_from_json(const Json& j);

Json to_json(const Decomposition& d);
Json to_json(const ContractingHomotopy& h);
Json to_json(const MiddlingDiagram& d);
MiddlingDiagram middling_from_json(const Json& j);
Json to_json(const OctahedronWitness& w);
OctahedronWitness octahedron_from_json(const Json& j);
Json to_json(const VerdierWitness& w);
VerdierWitness verdier_from_json(const Json& j);
Json to_json(const MiddlingSearchResult& r);
Json to_json(const CounterexampleReport& r);
Json to_json(const SummandLemmaReport& r);

// Report envelope shared by all commands: tool name/version plus the
// parameters that make a verdict auditable.
Json report_envelope(const std::string& command, const RingSpec& spec);

// Serialize exactly as the CLI does (2-space indent, trailing newline).
std::string dump_report(const Json& j);

// ---------------------------------------------------------------------------
// Minimal JSON-schema checker covering the subset the shipped schemas use:
// type, properties, required, items, enum, oneOf.  Returns an error string
// or std::nullopt on success.
std::optional<std::string> schema_check(const Json& value, const Json& schema);

} // namespace nangle
