#include "truncchain/serialize.hpp"

#include <json.hpp>

#include "truncchain/error.hpp"

namespace truncchain {

using nlohmann::json;

std::string text_position(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

namespace {

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw Error(ErrorCode::ParseError, text_position(text, at) + ": malformed JSON");
  }
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::ParseError, std::string("missing field \"") + key + "\"");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ParseError, std::string("field \"") + key + "\" has the wrong type");
  }
}

EstimatorConfig config_from(const json& j) {
  EstimatorConfig config;
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "estimator config must be an object");
  if (j.contains("c0")) config.c0 = field<double>(j, "c0");
  if (j.contains("n")) config.n = field<std::size_t>(j, "n");
  if (j.contains("rule")) {
    const json& rule = j.at("rule");
    if (rule.is_string() && rule.get<std::string>() == "sqrt_n") {
      config.rule = SqrtN{};
    } else if (rule.is_object() && rule.contains("tail_from")) {
      config.rule = TailFrom{field<std::size_t>(rule, "tail_from")};
    } else if (rule.is_object() && rule.contains("universal")) {
      config.rule = Universal{field<double>(rule.at("universal"), "b_exponent")};
    } else {
      throw Error(ErrorCode::ParseError,
                  "rule must be \"sqrt_n\", {\"tail_from\": s0} or {\"universal\": {...}}");
    }
  }
  config.validate();
  return config;
}

}  // namespace

std::string space_to_json(const DiscreteSpace& space) {
  json j;
  j["probs"] = std::vector<double>(space.probs().begin(), space.probs().end());
  return j.dump();
}

DiscreteSpace space_from_json(std::string_view text) {
  return DiscreteSpace(field<std::vector<double>>(parse(text), "probs"));
}

std::string class_to_json(const FunctionClass& cls) {
  json j;
  j["probs"] = std::vector<double>(cls.space().probs().begin(), cls.space().probs().end());
  json rows = json::array();
  for (std::size_t f = 0; f < cls.size(); ++f) {
    rows.push_back(std::vector<double>(cls.row(f).begin(), cls.row(f).end()));
  }
  j["values"] = std::move(rows);
  j["anchor"] = cls.anchor();
  return j.dump();
}

ClassPtr class_from_json(std::string_view text) {
  const json j = parse(text);
  auto space = std::make_shared<const DiscreteSpace>(field<std::vector<double>>(j, "probs"));
  const auto rows = field<std::vector<std::vector<double>>>(j, "values");
  if (j.contains("anchor")) {
    const auto anchor = field<std::size_t>(j, "anchor");
    if (anchor >= rows.size()) throw Error(ErrorCode::InvalidArgument, "anchor index out of range");
    for (double v : rows[anchor]) {
      if (v != 0.0) throw Error(ErrorCode::InvalidArgument, "anchor row is not the zero function");
    }
  }
  return make_class(std::move(space), rows);
}

std::string sequence_to_json(const AdmissibleSequence& seq) {
  json j;
  j["metric"] = seq.metric() == Metric::L2 ? "L2" : "Linf";
  j["levels"] = seq.levels();
  return j.dump();
}

AdmissibleSequence sequence_from_json(ClassPtr cls, std::string_view text) {
  const json j = parse(text);
  const auto name = field<std::string>(j, "metric");
  Metric metric;
  if (name == "L2") {
    metric = Metric::L2;
  } else if (name == "Linf") {
    metric = Metric::Linf;
  } else {
    throw Error(ErrorCode::ParseError, "metric must be \"L2\" or \"Linf\"");
  }
  return AdmissibleSequence(std::move(cls), metric,
                            field<std::vector<std::vector<std::size_t>>>(j, "levels"));
}

std::string config_to_json(const EstimatorConfig& config) {
  json j;
  j["c0"] = config.c0;
  j["n"] = config.n;
  if (std::holds_alternative<SqrtN>(config.rule)) {
    j["rule"] = "sqrt_n";
  } else if (const auto* t = std::get_if<TailFrom>(&config.rule)) {
    j["rule"] = {{"tail_from", t->s0}};
  } else {
    j["rule"] = {{"universal", {{"b_exponent", std::get<Universal>(config.rule).b_exponent}}}};
  }
  return j.dump();
}

EstimatorConfig config_from_json(std::string_view text) { return config_from(parse(text)); }

}  // namespace truncchain
