#include <algorithm>
#include <cstring>
#include <filesystem>

#include "dlvgen/context.hpp"
#include "dlvgen/decoder.hpp"
#include "dlvgen/errors.hpp"
#include "dlvgen/ops.hpp"
#include "dlvgen/optim.hpp"
#include "dlvgen/vocab.hpp"
#include "test_support.hpp"

using namespace dlvgen;
using namespace dlvgen::seq;

namespace {

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct Fixture : ::testing::Test {
  ParameterStore store;
  Rng init{21};
  DecoderDims dims = [] {
    DecoderDims d;
    d.vocab = 20;
    d.d_model = 16;
    d.layers = 2;
    d.heads = 2;
    d.ff = 32;
    d.max_len = 24;
    d.d_latent = 3;
    return d;
  }();
  DecoderModel decoder{store, dims, init};
};

using DecoderTest = Fixture;

std::vector<TokenId> random_ids(Rng& rng, std::size_t n, std::size_t vocab) {
  std::vector<TokenId> ids(n);
  for (auto& id : ids) id = static_cast<TokenId>(kSpecialCount + rng.below(vocab - kSpecialCount));
  return ids;
}

}  // namespace

TEST(Tokenize, Examples) {
  EXPECT_EQ(split_words("Hello!"), (std::vector<std::string>{"hello", "!"}));
  EXPECT_EQ(split_words("i love food."), (std::vector<std::string>{"i", "love", "food", "."}));
  EXPECT_EQ(split_words("  a,b ?c  "), (std::vector<std::string>{"a", ",", "b", "?", "c"}));
  EXPECT_TRUE(split_words("   ").empty());
}

TEST(VocabTest, SpecialIdsAndUnknown) {
  Vocab v({"hello", "!"});
  EXPECT_EQ(v.size(), 8u);
  EXPECT_EQ(v.token(kPad), "<pad>");
  EXPECT_EQ(v.id("hello"), 6);
  EXPECT_EQ(v.id("zyzzyva"), kUnk);
  EXPECT_EQ(v.encode("Hello zyzzyva!"), (std::vector<TokenId>{6, kUnk, 7}));
  EXPECT_THROW(v.token(99), IndexError);
  EXPECT_THROW(Vocab({"a", "a"}), ContractError);
}

TEST(VocabTest, RoundTripOfInVocabularyText) {
  const std::vector<std::string> texts = {"i love food .", "do you like dogs ?", "yes , i do !"};
  const auto v = Vocab::build(texts, 100);
  for (const auto& t : texts) EXPECT_EQ(v.decode(v.encode(t)), t);
  const std::vector<TokenId> framed = {kBos, v.id("yes"), kEos, kPad};
  EXPECT_EQ(v.decode(framed), "yes");
}

TEST(VocabTest, BuildOrdersByFrequencyThenAlphabetAndCaps) {
  const std::vector<std::string> texts = {"b a c b", "c b"};
  const auto v = Vocab::build(texts, kSpecialCount + 2);
  EXPECT_EQ(v.regular_tokens(), (std::vector<std::string>{"b", "c"}));
  EXPECT_EQ(v.id("a"), kUnk);
}

TEST(VocabTest, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "dlvgen_vocab_test.txt";
  Vocab v({"x", "y", "z"});
  v.save(path);
  const auto back = Vocab::load(path);
  EXPECT_EQ(back.regular_tokens(), v.regular_tokens());
  std::filesystem::remove(path);
  EXPECT_THROW(Vocab::load(path), FileError);
}

TEST(MaskUserTurns, Examples) {
  Vocab v({"u1", "a1", "u2", "a2"});
  const TokenId a1 = v.id("a1"), a2 = v.id("a2");
  const std::vector<Turn> uau = {{Speaker::user, "u1"}, {Speaker::agent, "a1"}, {Speaker::user, "u2"}};
  EXPECT_EQ(mask_user_turns(v, uau), (std::vector<TokenId>{kSepAgent, a1}));
  const std::vector<Turn> users = {{Speaker::user, "u1"}, {Speaker::user, "u2"}};
  EXPECT_EQ(mask_user_turns(v, users), (std::vector<TokenId>{kSepAgent}));
  const std::vector<Turn> aua = {{Speaker::agent, "a1"}, {Speaker::user, "u1"}, {Speaker::agent, "a2"}};
  EXPECT_EQ(mask_user_turns(v, aua), (std::vector<TokenId>{kSepAgent, a1, kSepAgent, a2}));
  const std::vector<Turn> bad = {{Speaker::untagged, "u1"}};
  EXPECT_THROW(mask_user_turns(v, bad), ContractError);
}

TEST(MaskUserTurns, PersonaViewHasNoUserTokens) {
  Vocab v({"u1", "a1", "u2"});
  const std::vector<Turn> turns = {{Speaker::user, "u1 u2"}, {Speaker::agent, "a1"}, {Speaker::user, "u2"}};
  const auto view = make_context_view(v, turns);
  EXPECT_EQ(view.full, (std::vector<TokenId>{kSepUser, v.id("u1"), v.id("u2"), kSepAgent, v.id("a1"), kSepUser,
                                             v.id("u2")}));
  for (TokenId id : view.persona_view) {
    EXPECT_NE(id, v.id("u1"));
    EXPECT_NE(id, v.id("u2"));
    EXPECT_NE(id, kSepUser);
  }
}

TEST_F(DecoderTest, EncodeSequenceSingleTokenIsItsHiddenState) {
  Graph g(false);
  const std::vector<TokenId> one = {7};
  const auto h = decoder.hidden_states(g, one).value();
  const auto e = decoder.encode_sequence(g, one).value();
  ASSERT_EQ(e.size(), dims.d_model);
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_NEAR(e[i], h[i], 1e-15);
  EXPECT_THROW(decoder.encode_sequence(g, std::vector<TokenId>{}), ContractError);
}

TEST_F(DecoderTest, EncodeSequenceIsDeterministicAndPadInvariant) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    auto ids = random_ids(rng, 1 + rng.below(10), dims.vocab);
    Graph g(false);
    const auto a = decoder.encode_sequence(g, ids).value();
    EXPECT_TRUE(bitwise_equal(a, decoder.encode_sequence(g, ids).value()));
    auto padded = ids;
    padded.insert(padded.end(), 1 + rng.below(5), kPad);
    const auto b = decoder.encode_sequence(g, padded).value();
    // Oracle: mean of the unpadded hidden states, computed here.
    const auto h = decoder.hidden_states(g, ids).value();
    for (std::size_t c = 0; c < dims.d_model; ++c) {
      double mean = 0.0;
      for (std::size_t t = 0; t < ids.size(); ++t) mean += h.at(t, c);
      mean /= static_cast<double>(ids.size());
      EXPECT_NEAR(a[c], mean, 1e-12);
      EXPECT_NEAR(b[c], a[c], 1e-9);
    }
  }
}

TEST_F(DecoderTest, ForwardLogitsAreCausal) {
  Rng rng(5);
  const auto ctx = random_ids(rng, 6, dims.vocab);
  auto prefix = random_ids(rng, 5, dims.vocab);
  Graph g(false);
  const auto base = decoder.forward_logits(g, ctx, prefix).value();
  ASSERT_EQ(base.rows(), prefix.size() + 1);
  ASSERT_EQ(base.cols(), dims.vocab);
  for (std::size_t t = 0; t < prefix.size(); ++t) {
    auto changed = prefix;
    changed[t] = changed[t] == 6 ? 7 : 6;
    const auto out = decoder.forward_logits(g, ctx, changed).value();
    // Row r sees prefix[0..r), so rows up to and including t are unaffected.
    for (std::size_t r = 0; r <= t; ++r) {
      for (std::size_t c = 0; c < dims.vocab; ++c) EXPECT_EQ(out.at(r, c), base.at(r, c)) << "row " << r << " t " << t;
    }
    bool later_changed = false;
    for (std::size_t c = 0; c < dims.vocab; ++c) later_changed |= out.at(t + 1, c) != base.at(t + 1, c);
    EXPECT_TRUE(later_changed);
  }
  EXPECT_TRUE(bitwise_equal(base, decoder.forward_logits(g, ctx, prefix).value()));
}

TEST_F(DecoderTest, LongContextIsTruncatedFromTheLeft) {
  Rng rng(6);
  const auto ctx = random_ids(rng, 40, dims.vocab);
  const auto prefix = random_ids(rng, 4, dims.vocab);
  const auto input = decoder.assemble_input(ctx, prefix);
  ASSERT_EQ(input.size(), dims.max_len);
  // Most recent context tokens, BOS, then the untouched prefix.
  const std::size_t kept = dims.max_len - 1 - prefix.size();
  EXPECT_TRUE(std::equal(input.begin(), input.begin() + kept, ctx.end() - kept));
  EXPECT_EQ(input[kept], kBos);
  EXPECT_TRUE(std::equal(prefix.begin(), prefix.end(), input.begin() + kept + 1));
  Graph g(false);
  EXPECT_EQ(decoder.forward_logits(g, ctx, prefix).value().rows(), prefix.size() + 1);
  const std::vector<TokenId> tail(ctx.end() - kept, ctx.end());
  const Tensor full = decoder.forward_logits(g, ctx, prefix).value();
  EXPECT_TRUE(bitwise_equal(full, decoder.forward_logits(g, tail, prefix).value()));
}

TEST_F(DecoderTest, InjectLatentShapesAndBias) {
  Graph g(false);
  Rng rng(1);
  decoder.latent_bias().value = dlvgen::testing::random_tensor({dims.d_model}, rng);
  const auto v = decoder.inject_latent(g.constant(Tensor({3})), g.constant(Tensor({3}))).value();
  ASSERT_EQ(v.size(), dims.d_model);
  EXPECT_TRUE(bitwise_equal(v, decoder.latent_bias().value));
  EXPECT_THROW(decoder.inject_latent(g.constant(Tensor({3})), g.constant(Tensor({2}))), ContractError);
}

TEST_F(DecoderTest, ConstantInjectionShiftsEveryInputPosition) {
  // A shift v added at every position equals adding v to every token
  // embedding row, which the oracle does by hand.
  Rng rng(9);
  const auto ctx = random_ids(rng, 5, dims.vocab);
  const auto prefix = random_ids(rng, 3, dims.vocab);
  const auto v = dlvgen::testing::random_tensor({dims.d_model}, rng, 0.3);
  Graph g(false);
  const auto injected = decoder.forward_logits(g, ctx, prefix, g.constant(v)).value();
  Parameter* embed = nullptr;
  for (auto* p : store.all()) {
    if (p->value.rank() == 2 && p->value.rows() == dims.vocab && p->value.cols() == dims.d_model) embed = p;
  }
  ASSERT_NE(embed, nullptr);
  for (std::size_t r = 0; r < dims.vocab; ++r) {
    for (std::size_t c = 0; c < dims.d_model; ++c) embed->value.at(r, c) += v[c];
  }
  const auto shifted = decoder.forward_logits(g, ctx, prefix).value();
  for (std::size_t i = 0; i < injected.size(); ++i) EXPECT_NEAR(injected[i], shifted[i], 1e-9);
}

TEST_F(DecoderTest, ZeroInjectionIsBitwiseIdentity) {
  Rng rng(3);
  decoder.latent_weight().value.fill(0.0);
  decoder.latent_bias().value.fill(0.0);
  Graph g(false);
  const auto v = decoder.inject_latent(g.constant(Tensor::vector({1, 2, 3})), g.constant(Tensor::vector({4, 5, 6})));
  for (int trial = 0; trial < 5; ++trial) {
    const auto ctx = random_ids(rng, 1 + rng.below(8), dims.vocab);
    const auto prefix = random_ids(rng, rng.below(5), dims.vocab);
    // Copies: a later graph op may relocate earlier node values.
    const Tensor a = decoder.forward_logits(g, ctx, prefix).value();
    const Tensor b = decoder.forward_logits(g, ctx, prefix, v).value();
    EXPECT_TRUE(bitwise_equal(a, b));
  }
}

TEST_F(DecoderTest, InjectionLengthMismatchIsRejected) {
  Graph g(false);
  const std::vector<TokenId> ids = {6, 7};
  EXPECT_THROW(decoder.hidden_states(g, ids, g.constant(Tensor({dims.d_model + 1}))), DimensionError);
}

TEST(DecoderGradients, SmallDecoderPassesGradCheck) {
  ParameterStore store;
  Rng init(4);
  DecoderDims d;
  d.vocab = 9;
  d.d_model = 8;
  d.layers = 1;
  d.heads = 2;
  d.ff = 12;
  d.max_len = 12;
  d.d_latent = 2;
  DecoderModel decoder(store, d, init);
  const std::vector<TokenId> ctx = {kSepUser, 6, 7}, prefix = {8, 6};
  const std::vector<TokenId> targets = {8, 6, kEos};
  auto params = store.all();
  const auto r = grad_check(
      [&](Graph& g) {
        Var v = decoder.inject_latent(g.constant(Tensor::vector({0.3, -0.2})), g.constant(Tensor::vector({0.1, 0.5})));
        return log_softmax_nll(decoder.forward_logits(g, ctx, prefix, v), targets);
      },
      params, 1e-4, 60, 7);
  EXPECT_LT(r.max_relative_error, 1e-3);
}
