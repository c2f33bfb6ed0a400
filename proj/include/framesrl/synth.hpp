#pragma once

#include <cstdint>
#include <vector>

#include "framesrl/corpus.hpp"
#include "framesrl/lexicon.hpp"

namespace framesrl {

struct SynthConfig {
  int num_docs = 10;
  int sentences_per_doc = 8;
  int vocab_size = 100;
  int num_frames = 3;
  int max_fes_per_frame = 4;
  int max_fes_per_instance = 2;

  double verbal_trigger_fraction = 0.7;
  double root_trigger_fraction = 0.5;
  double mean_sentence_length = 10.0;

  // When > 0, each document draws its own root/verbal fractions uniformly
  // from [base - jitter, base + jitter] clamped to [0,1]; used to plant
  // document-level variation for the regression study.
  double doc_fraction_jitter = 0.0;

  // Tie FE token forms to their label's vocabulary bucket so label sequences
  // are predictable from the surface (learnability at desk scale).
  bool correlated_fes = true;
};

FrameLexicon synth_lexicon(const SynthConfig& config);

std::vector<Document> synth_corpus(const SynthConfig& config, uint64_t seed);

}  // namespace framesrl
