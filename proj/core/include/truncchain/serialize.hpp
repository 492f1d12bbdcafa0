#pragma once

#include <string>
#include <string_view>

#include "truncchain/chaining.hpp"
#include "truncchain/estimator.hpp"
#include "truncchain/function_class.hpp"
#include "truncchain/measure.hpp"

namespace truncchain {

/// JSON round trips for the core types. Malformed text throws ParseError with
/// a "line:column" prefix; well-formed JSON with invalid content throws the
/// code of the failing constructor.

/// {"probs": [...]}
std::string space_to_json(const DiscreteSpace& space);
DiscreteSpace space_from_json(std::string_view text);

/// {"probs": [...], "values": [[row per function]], "anchor": i}
std::string class_to_json(const FunctionClass& cls);
/// `anchor` is optional; when present that row must be identically zero.
ClassPtr class_from_json(std::string_view text);

/// {"metric": "L2" | "Linf", "levels": [[...], ...]}
std::string sequence_to_json(const AdmissibleSequence& seq);
AdmissibleSequence sequence_from_json(ClassPtr cls, std::string_view text);

/// {"c0": 1.0, "rule": "sqrt_n" | {"tail_from": s0} | {"universal": {"b_exponent": b}}, "n": n}
std::string config_to_json(const EstimatorConfig& config);
EstimatorConfig config_from_json(std::string_view text);

/// "line:column" of a byte offset into `text`, both 1-based.
std::string text_position(std::string_view text, std::size_t byte);

}  // namespace truncchain
