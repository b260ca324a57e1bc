#include "attnparse/selection_io.hpp"

#include <algorithm>
#include <stdexcept>

#include "attnparse/version.hpp"

namespace attnparse {

namespace {

using nlohmann::json;

json head_json(const HeadId& h, const std::vector<std::string>& model_ids) {
  const std::string& name =
      h.model < model_ids.size() ? model_ids[h.model] : std::to_string(h.model);
  return json::array({name, h.layer, h.head});
}

json trace_json(const std::vector<TraceRound>& trace, const std::vector<std::string>& model_ids) {
  json rounds = json::array();
  for (const auto& r : trace) {
    json sets = json::array();
    for (std::size_t i = 0; i < r.vals.size(); ++i) {
      json heads = json::array();
      if (i < r.sets.size()) {
        for (const auto& h : r.sets[i]) heads.push_back(head_json(h, model_ids));
      }
      sets.push_back({{"heads", heads}, {"val", r.vals[i]}, {"kept", static_cast<bool>(r.accepted[i])}});
    }
    rounds.push_back({{"round", r.round}, {"candidates", sets}});
  }
  return rounds;
}

}  // namespace

json selection_to_json(const HeadSelection& s, bool with_trace) {
  json hyper = json::object();
  if (s.top_k) hyper["K"] = *s.top_k;
  if (s.beam_size) hyper["b"] = *s.beam_size;
  hyper["measure"] = std::string(to_string(s.measure));
  hyper["rank_normalized"] = s.rank_normalized;

  json heads = json::array();
  for (const auto& h : s.chosen) heads.push_back(head_json(h, s.model_ids));

  json subset = {{"used", s.subset.used}, {"total", s.subset.total}};
  subset["seed"] = s.subset.seed ? json(*s.subset.seed) : json(nullptr);
  subset["fraction"] = s.subset.fraction ? json(*s.subset.fraction) : json(nullptr);

  json doc = {
      {"strategy", std::string(to_string(s.strategy))},
      {"hyperparameters", hyper},
      {"models", s.model_ids},
      {"chosen", heads},
      {"validation_f1", s.validation_f1},
      {"validation_subset", subset},
      {"degenerate", s.degenerate},
      {"version", kVersion},
  };
  if (with_trace) doc["trace"] = trace_json(s.trace, s.model_ids);
  return doc;
}

HeadSelection selection_from_json(const json& doc) {
  try {
    HeadSelection s;
    s.strategy = parse_strategy(doc.at("strategy").get<std::string>());
    const auto& hyper = doc.at("hyperparameters");
    if (hyper.contains("K")) s.top_k = hyper["K"].get<std::size_t>();
    if (hyper.contains("b")) s.beam_size = hyper["b"].get<std::size_t>();
    s.measure = parse_measure(hyper.value("measure", std::string("hel")));
    s.rank_normalized = hyper.value("rank_normalized", false);
    s.model_ids = doc.at("models").get<std::vector<std::string>>();
    for (const auto& h : doc.at("chosen")) {
      const auto name = h.at(0).get<std::string>();
      const auto it = std::find(s.model_ids.begin(), s.model_ids.end(), name);
      if (it == s.model_ids.end()) {
        throw std::invalid_argument("head refers to model '" + name + "' missing from \"models\"");
      }
      s.chosen.push_back({static_cast<std::uint32_t>(it - s.model_ids.begin()),
                          h.at(1).get<std::uint32_t>(), h.at(2).get<std::uint32_t>()});
    }
    if (s.chosen.empty()) throw std::invalid_argument("selection chooses no heads");
    s.validation_f1 = doc.at("validation_f1").get<double>();
    s.degenerate = doc.value("degenerate", false);
    if (doc.contains("validation_subset")) {
      const auto& sub = doc["validation_subset"];
      s.subset.used = sub.value("used", std::size_t{0});
      s.subset.total = sub.value("total", std::size_t{0});
      if (sub.contains("seed") && !sub["seed"].is_null()) s.subset.seed = sub["seed"].get<std::uint64_t>();
      if (sub.contains("fraction") && !sub["fraction"].is_null()) {
        s.subset.fraction = sub["fraction"].get<double>();
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed selection document: ") + e.what());
  }
}

std::vector<HeadId> resolve_heads(const HeadSelection& selection, const ArchiveSet& archives) {
  std::vector<HeadId> out;
  for (const auto& h : selection.chosen) {
    const std::string name = h.model < selection.model_ids.size() ? selection.model_ids[h.model]
                                                                  : std::to_string(h.model);
    const auto model = archives.find_model(name);
    const HeadId mapped{model.value_or(0), h.layer, h.head};
    if (!model || !archives.contains(mapped)) {
      throw std::out_of_range("head (" + name + ", " + std::to_string(h.layer) + ", " +
                              std::to_string(h.head) + ") is not in the given archives");
    }
    out.push_back(mapped);
  }
  return out;
}

}  // namespace attnparse
