#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "attnparse/attention_io.hpp"
#include "attnparse/distance.hpp"
#include "attnparse/scoring.hpp"

namespace attnparse {

/// Serial is the reference path; parallel fans out with OpenMP and must
/// produce bit-identical results.
enum class Execution { serial, parallel };

/// Sets the OpenMP worker count; 0 means available parallelism. No-op when
/// built without OpenMP.
void set_worker_count(int workers);
int worker_count();

/// Head decode for one sentence: distance matrix, CKY, height vector.
DistanceVector decode_head(const ArchiveSet& archives, const HeadId& head,
                           std::uint32_t sentence_id, Measure measure);

/// result[h][s] is the height vector of heads[h] on sentence_ids[s].
/// Throws std::out_of_range up front if any head or sentence is missing.
std::vector<std::vector<DistanceVector>> decode_heads(const ArchiveSet& archives,
                                                      std::span<const HeadId> heads,
                                                      std::span<const std::uint32_t> sentence_ids,
                                                      Measure measure, Execution exec);

/// Distance matrices for every head of every model on one sentence, in
/// ArchiveSet::all_heads() order.
std::vector<DistanceMatrix> head_distance_matrices(const ArchiveSet& archives,
                                                   std::uint32_t sentence_id, Measure measure,
                                                   Execution exec);

}  // namespace attnparse
