#pragma once

#include <gtest/gtest.h>

#include <vector>

#include "dlvgen/config.hpp"
#include "dlvgen/corpus.hpp"
#include "dlvgen/graph.hpp"
#include "dlvgen/model.hpp"
#include "dlvgen/rng.hpp"

namespace dlvgen::testing {

inline void expect_tensor_near(const Tensor& actual, const std::vector<double>& expected, double tol) {
  ASSERT_EQ(actual.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(actual[i], expected[i], tol) << "at " << i;
}

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = scale * (2.0 * rng.uniform() - 1.0);
  return t;
}

// Small model dimensions so tests run in milliseconds.
inline ModelConfig tiny_model(Variant variant = Variant::dlvgen) {
  ModelConfig m;
  m.variant = variant;
  m.d_latent = 4;
  m.d_model = 16;
  m.layers = 1;
  m.heads = 2;
  m.max_len = 48;
  return m;
}

struct TinySetup {
  corpus::Corpus corpus;
  std::vector<DialogueExample> train;
  std::vector<DialogueExample> test;
  seq::Vocab vocab;
};

inline TinySetup tiny_setup(std::size_t personas = 4, std::size_t dialogues = 40, std::uint64_t seed = 3) {
  TinySetup s;
  s.corpus = corpus::generate_corpus(personas, dialogues, seed);
  s.train = corpus::to_examples(s.corpus.train);
  s.test = corpus::to_examples(s.corpus.test);
  s.vocab = corpus::build_vocab(s.train, 1000);
  return s;
}

}  // namespace dlvgen::testing
