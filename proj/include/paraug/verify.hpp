#pragma once

#include "paraug/augment_pipeline.hpp"
#include "paraug/provenance.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace paraug {

struct VerifyResources {
  const ParallelCorpus& corpus;
  const EmbeddingTable& embeddings_src;
  const LanguageModel& lm_src;
  const LanguageModel& lm_tgt;
  const AnnotatedLexicon* lexicon_src = nullptr;
};

struct Violation {
  std::size_t record_id = 0;
  std::string check;
  std::string detail;
};

// Re-checks every accepted record against the enabled gates. Scores are
// recomputed from the resources without going through the pipeline code and
// must match the recorded values; recorded values must clear each threshold.
std::vector<Violation> verify_provenance(std::span<const ProvenanceEntry> entries, const VerifyResources& resources,
                                         const AugmentationConfig& config);

} // namespace paraug
