#include "framesrl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace framesrl {

namespace {

std::string frame_name(int i) { return "Frame" + std::to_string(i + 1); }
std::string fe_name(int frame, int j) {
  return "F" + std::to_string(frame + 1) + "E" + std::to_string(j + 1);
}

int fes_of_frame(const SynthConfig& cfg, int f) {
  return 1 + (f * 7 + 3) % cfg.max_fes_per_frame;
}

const char* kFillerPos[] = {"DET", "ADJ", "ADV", "ADP", "PRON", "NOUN"};
const char* kFillerDep[] = {"det", "amod", "advmod", "case", "obl", "nmod"};

}  // namespace

FrameLexicon synth_lexicon(const SynthConfig& cfg) {
  if (cfg.num_frames < 1) throw std::runtime_error("synth: need >= 1 frame");
  if (cfg.max_fes_per_frame < 1)
    throw std::runtime_error("synth: need >= 1 FE per frame");
  FrameLexicon lex;
  for (int f = 0; f < cfg.num_frames; ++f) {
    std::vector<std::string> fes;
    for (int j = 0; j < fes_of_frame(cfg, f); ++j) fes.push_back(fe_name(f, j));
    lex.add_frame(frame_name(f), std::move(fes));
  }
  for (int f = 0; f < cfg.num_frames; ++f) {
    lex.add_trigger("vtrig" + std::to_string(f + 1), 'V', frame_name(f));
    lex.add_trigger("ntrig" + std::to_string(f + 1), 'N', frame_name(f));
  }
  return lex;
}

namespace {

// Exact count allocation: `count` of `n` slots set true, deterministically
// shuffled, so realized fractions match requests up to rounding.
std::vector<bool> allocate(int n, double fraction, std::mt19937_64& rng) {
  int count = static_cast<int>(std::llround(fraction * n));
  count = std::clamp(count, 0, n);
  std::vector<bool> flags(n, false);
  std::fill(flags.begin(), flags.begin() + count, true);
  std::shuffle(flags.begin(), flags.end(), rng);
  return flags;
}

}  // namespace

std::vector<Document> synth_corpus(const SynthConfig& cfg, uint64_t seed) {
  if (cfg.num_docs < 1 || cfg.sentences_per_doc < 1 || cfg.vocab_size < 4)
    throw std::runtime_error("synth: infeasible config (counts too small)");
  int min_len = 2 + cfg.max_fes_per_instance * 2;
  if (cfg.mean_sentence_length < min_len)
    throw std::runtime_error(
        "synth: infeasible config (FE count exceeds sentence length)");

  FrameLexicon lex = synth_lexicon(cfg);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Document> docs;
  for (int d = 0; d < cfg.num_docs; ++d) {
    Document doc;
    doc.id = "synth" + std::to_string(d + 1);
    doc.source = "synthetic";

    double root_frac = cfg.root_trigger_fraction;
    double verbal_frac = cfg.verbal_trigger_fraction;
    if (cfg.doc_fraction_jitter > 0.0) {
      auto jitter = [&](double base) {
        double lo = std::max(0.0, base - cfg.doc_fraction_jitter);
        double hi = std::min(1.0, base + cfg.doc_fraction_jitter);
        return lo + (hi - lo) * unit(rng);
      };
      root_frac = jitter(root_frac);
      verbal_frac = jitter(verbal_frac);
    }
    auto root_flags = allocate(cfg.sentences_per_doc, root_frac, rng);
    auto verbal_flags = allocate(cfg.sentences_per_doc, verbal_frac, rng);

    for (int s = 0; s < cfg.sentences_per_doc; ++s) {
      // sentence length around the mean
      int spread = std::max(1, static_cast<int>(cfg.mean_sentence_length * 0.2));
      std::uniform_int_distribution<int> len_dist(
          static_cast<int>(cfg.mean_sentence_length) - spread,
          static_cast<int>(cfg.mean_sentence_length) + spread);
      int len = std::max(min_len, len_dist(rng));

      Sentence sent;
      sent.id = doc.id + "-s" + std::to_string(s + 1);
      std::uniform_int_distribution<int> word_dist(0, cfg.vocab_size - 1);
      std::uniform_int_distribution<int> pos_dist(0, 5);
      for (int i = 1; i <= len; ++i) {
        Token t;
        t.index = i;
        int w = word_dist(rng);
        t.form = "w" + std::to_string(w);
        t.lemma = t.form;
        int pick = pos_dist(rng);
        t.upos = kFillerPos[pick];
        t.deprel = kFillerDep[pick];
        sent.tokens.push_back(std::move(t));
      }

      // trigger placement: root triggers sit at the tree root
      bool is_root = root_flags[s];
      bool is_verbal = verbal_flags[s];
      std::uniform_int_distribution<int> idx_dist(1, len);
      int root_pos = idx_dist(rng);
      int trig_pos;
      if (is_root) {
        trig_pos = root_pos;
      } else {
        do {
          trig_pos = idx_dist(rng);
        } while (trig_pos == root_pos);
      }

      // head tree: attach each non-root token to an already-connected one
      std::vector<int> order(len);
      std::iota(order.begin(), order.end(), 1);
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<int> connected{root_pos};
      sent.tokens[root_pos - 1].head = 0;
      sent.tokens[root_pos - 1].deprel = "root";
      for (int idx : order) {
        if (idx == root_pos) continue;
        std::uniform_int_distribution<size_t> parent(0, connected.size() - 1);
        sent.tokens[idx - 1].head = connected[parent(rng)];
        connected.push_back(idx);
      }

      // frame + trigger token surface
      std::uniform_int_distribution<int> frame_dist(0, cfg.num_frames - 1);
      int f = frame_dist(rng);
      Token& trig = sent.tokens[trig_pos - 1];
      trig.lemma = (is_verbal ? "vtrig" : "ntrig") + std::to_string(f + 1);
      trig.form = trig.lemma;
      trig.upos = is_verbal ? "VERB" : "NOUN";
      if (!is_root) trig.deprel = is_verbal ? "xcomp" : "nmod";

      FrameInstance inst;
      inst.frame = frame_name(f);
      inst.trigger = {trig_pos, trig_pos};

      // FE spans: disjoint from the trigger and each other
      int n_fe_labels = fes_of_frame(cfg, f);
      int want = std::min(cfg.max_fes_per_instance, n_fe_labels);
      std::vector<bool> taken(len + 1, false);
      taken[trig_pos] = true;
      std::vector<int> fe_ids(n_fe_labels);
      std::iota(fe_ids.begin(), fe_ids.end(), 0);
      std::shuffle(fe_ids.begin(), fe_ids.end(), rng);
      for (int e = 0; e < want; ++e) {
        std::uniform_int_distribution<int> span_len_dist(1, 2);
        int span_len = span_len_dist(rng);
        int start = -1;
        for (int attempt = 0; attempt < 50; ++attempt) {
          std::uniform_int_distribution<int> start_dist(1, len - span_len + 1);
          int cand = start_dist(rng);
          bool free = true;
          for (int i = cand; i < cand + span_len; ++i)
            if (taken[i]) free = false;
          if (free) {
            start = cand;
            break;
          }
        }
        if (start < 0) continue;  // dense sentence, skip this FE
        for (int i = start; i < start + span_len; ++i) taken[i] = true;
        std::string label = fe_name(f, fe_ids[e]);
        if (cfg.correlated_fes) {
          // draw FE token forms from the label's vocabulary bucket
          int bucket = (f * cfg.max_fes_per_frame + fe_ids[e]) % 8;
          int width = std::max(1, cfg.vocab_size / 8);
          std::uniform_int_distribution<int> bw(bucket * width,
                                                bucket * width + width - 1);
          for (int i = start; i < start + span_len; ++i) {
            Token& tok = sent.tokens[i - 1];
            tok.form = "w" + std::to_string(bw(rng) % cfg.vocab_size);
            tok.lemma = tok.form;
          }
        }
        inst.elements.push_back({label, {start, start + span_len - 1}});
      }
      std::sort(inst.elements.begin(), inst.elements.end(),
                [](const FrameElement& a, const FrameElement& b) {
                  return a.span.begin < b.span.begin;
                });

      doc.annotations[sent.id].push_back(std::move(inst));
      doc.sentences.push_back(std::move(sent));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace framesrl
