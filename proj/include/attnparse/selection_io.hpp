#pragma once

#include <string>

#include "attnparse/ensemble.hpp"
#include "json.hpp"

namespace attnparse {

/// HeadSelection document: strategy, hyperparameters, chosen heads as
/// [model_id, layer, head], validation F1, subset descriptor and toolkit
/// version. The trace is included only when `with_trace` is set.
nlohmann::json selection_to_json(const HeadSelection& selection, bool with_trace = false);

/// Parses a document written by selection_to_json. Heads keep their model
/// index relative to the document's own "models" list. Throws
/// std::invalid_argument on malformed documents.
HeadSelection selection_from_json(const nlohmann::json& doc);

/// Maps the selection's heads onto `archives` by model id. Throws
/// std::out_of_range naming (model, layer, head) for heads the archives lack.
std::vector<HeadId> resolve_heads(const HeadSelection& selection, const ArchiveSet& archives);

}  // namespace attnparse
