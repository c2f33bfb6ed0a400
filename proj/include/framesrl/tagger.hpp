#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "framesrl/encoder.hpp"
#include "framesrl/linalg.hpp"

namespace framesrl {

struct TaggerConfig {
  int hidden = 64;
  int num_layers = 4;  // alternating directions F,B,F,B,...
  std::array<int, kNumChannels> channel_dims = {64, 8, 8, 8, 4, 8, 8};

  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double clip_norm = 5.0;
  int epochs = 50;
  int batch_size = 1;
  int patience = 5;  // early stop on dev F-measure
};

// One LSTM layer plus its highway gate. Input width `in`, hidden width H.
// W*: H x in, U*: H x H, b*: 1 x H. Wg/bg gate the layer input; Wp projects
// the input onto width H when in != H.
struct LstmLayer {
  bool forward_dir = true;
  Matrix Wi, Ui, bi;
  Matrix Wf, Uf, bf;
  Matrix Wo, Uo, bo;
  Matrix Wc, Uc, bc;
  Matrix Wg, bg;
  Matrix Wp;
  bool has_proj = false;

  int input_width() const { return Wi.cols; }
  int hidden_width() const { return Wi.rows; }
};

struct TaggerParams {
  TaggerConfig config;
  EmbeddingTables embeddings;  // one per channel
  std::vector<LstmLayer> layers;
  Matrix proj_w;  // |labels| x 2H (last two layer outputs concatenated)
  Matrix proj_b;  // 1 x |labels|

  int label_count() const { return proj_w.rows; }

  // Deterministic enumeration of every parameter tensor, used for the model
  // bundle, Adam state, clipping and gradient checks.
  std::vector<std::pair<std::string, Matrix*>> tensors();
  std::vector<std::pair<std::string, const Matrix*>> tensors() const;

  bool all_finite() const;
};

TaggerParams init_params(const TaggerConfig& config, const Vocabulary& vocab,
                         int label_count, uint64_t seed);

// Gradients share the parameter layout.
using TaggerGrads = TaggerParams;
TaggerGrads zero_like(const TaggerParams& p);

struct LayerCache {
  std::vector<Vector> x;                       // layer input per position
  std::vector<Vector> ig, fg, og, cand;        // post-activation gates
  std::vector<Vector> c, tanh_c, h;            // cell state and hidden
  std::vector<Vector> gate, x_tilde, y;        // highway pieces
};

struct ForwardCache {
  std::vector<Vector> embedded;
  std::vector<LayerCache> layers;
  std::vector<Vector> posteriors;
};

using TokenPosteriors = std::vector<Vector>;

TokenPosteriors forward(const std::vector<Vector>& inputs, const TaggerParams& p,
                        ForwardCache* cache = nullptr);

double loss(const TokenPosteriors& posteriors, const std::vector<int>& gold_ids);

TaggerGrads backward(const EncodedSample& enc, const std::vector<int>& gold_ids,
                     const TaggerParams& p, const ForwardCache& cache);

// embed + forward + loss in one call (the function the gradient check probes).
double sample_loss(const TaggerParams& p, const EncodedSample& enc,
                   const std::vector<int>& gold_ids);

TokenPosteriors predict_posteriors(const TaggerParams& p, const EncodedSample& enc);

// Max relative error between analytic and central-difference gradients over
// `ncoords` randomly sampled parameter coordinates.
double grad_check(const TaggerParams& p, const EncodedSample& enc,
                  const std::vector<int>& gold_ids, double epsilon, int ncoords,
                  uint64_t seed);

struct TrainHistory {
  std::vector<double> epoch_loss;
  std::vector<double> dev_f;  // empty when no dev evaluator given
  int best_epoch = -1;
  bool diverged = false;
};

using DevEvaluator = std::function<double(const TaggerParams&)>;

struct TrainSample {
  EncodedSample encoded;
  std::vector<int> gold_ids;
};

TrainSample make_train_sample(const TaggingSample& s, const Vocabulary& vocab,
                              const LabelSet& labels);

TaggerParams train(const std::vector<TrainSample>& samples,
                   const TaggerConfig& config, const Vocabulary& vocab,
                   int label_count, uint64_t seed, TrainHistory* history = nullptr,
                   const DevEvaluator& dev_eval = nullptr);

double token_accuracy(const TaggerParams& p, const std::vector<TrainSample>& samples);

}  // namespace framesrl
