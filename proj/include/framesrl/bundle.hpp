#pragma once

#include <cstdint>
#include <string>

#include "framesrl/corpus.hpp"
#include "framesrl/encoder.hpp"
#include "framesrl/tagger.hpp"

namespace framesrl {

// On-disk model bundle: a directory with
//   manifest.json  hyperparameters, seed, label set, channel order/dims
//   vocab.json     vocabulary file
//   tensors.bin    flat little-endian 64-bit floats
//   tensors.idx    one line per tensor: name rows cols byte-offset
struct ModelBundle {
  TaggerConfig config;
  uint64_t seed = 0;
  Vocabulary vocab;
  LabelSet labels;
  TaggerParams params;
};

void save_bundle(const ModelBundle& bundle, const std::string& dir);
ModelBundle load_bundle(const std::string& dir);

}  // namespace framesrl
