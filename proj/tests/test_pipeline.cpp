#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sefd/errors.hpp"
#include "sefd/pipeline.hpp"

using namespace sefd;

namespace {

const std::vector<double> kO{1.0, 0.0, 0.0};
const std::vector<double> kP1{0.93, 0.3675595189897821, 0.0};
const std::vector<double> kP2{0.8, 0.5060404924655772, 0.3223709353915085};

CandidateText text(std::string id, double raw, std::vector<double> emb,
                   std::optional<TruthLabel> truth = std::nullopt) {
  CandidateText c;
  c.id = std::move(id);
  c.raw_score = raw;
  c.embedding = std::move(emb);
  c.truth = truth;
  return c;
}

PipelineConfig trace_config() {
  PipelineConfig cfg;
  cfg.detector = {"detectgpt", Orientation::HigherMeansLLM, 0.0, 2.0, 0.5};
  cfg.epsilon_sim = 0.85;
  cfg.fusion.decision_epsilon = 0.13;
  return cfg;
}

std::vector<CandidateText> trace_stream() {
  return {text("o", 1.8, kO, TruthLabel::llm()),
          text("p1", 0.2, kP1, TruthLabel::paraphrase(1)),
          text("p2", 0.2, kP2, TruthLabel::paraphrase(2))};
}

RetrievalPool pool_of(const std::vector<std::vector<double>>& rows) {
  RetrievalPool p(rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) p.add(rows[i], "m" + std::to_string(i));
  p.mark_initial();
  return p;
}

SimilarityResult sim(double s, std::size_t idx) { return {s, idx}; }

std::vector<CandidateText> random_stream(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> score(0.5, 1.0);
  std::vector<CandidateText> out;
  std::vector<std::vector<double>> seen;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v = oracle::random_vector(rng, d);
    // Half the texts lean towards an earlier one so all four rows occur.
    if (!seen.empty() && rng() % 2 == 0) {
      const auto& base = seen[rng() % seen.size()];
      for (std::size_t k = 0; k < d; ++k) v[k] = base[k] + 0.15 * v[k];
    }
    seen.push_back(v);
    out.push_back(text("t" + std::to_string(i), score(rng), v,
                       i % 2 ? TruthLabel::llm() : TruthLabel::human()));
  }
  return out;
}

PipelineConfig random_config() {
  PipelineConfig cfg;
  cfg.detector = {"x", Orientation::HigherMeansLLM, -2.0, 3.0, 0.5};
  cfg.epsilon_sim = 0.85;
  cfg.fusion.decision_epsilon = 0.6;
  return cfg;
}

}  // namespace

TEST(PoolTable, PublishedRows) {
  const Thresholds t{4.0, 0.85};
  EXPECT_EQ(pool_action_for(5.0, sim(0.95, 2), t), (PoolAction{PoolActionKind::None, {}}));
  EXPECT_EQ(pool_action_for(5.0, sim(0.30, 2), t), (PoolAction{PoolActionKind::Add, {}}));
  EXPECT_EQ(pool_action_for(1.0, sim(0.95, 7), t), (PoolAction{PoolActionKind::Replace, 7}));
  EXPECT_EQ(pool_action_for(1.0, sim(0.30, 7), t), (PoolAction{PoolActionKind::None, {}}));
  EXPECT_EQ(situation_for(5.0, sim(0.95, 0), t), 1);
  EXPECT_EQ(situation_for(5.0, sim(0.30, 0), t), 2);
  EXPECT_EQ(situation_for(1.0, sim(0.95, 0), t), 3);
  EXPECT_EQ(situation_for(1.0, sim(0.30, 0), t), 4);
}

TEST(PoolTable, ExactBoundaryIsSituationOne) {
  const Thresholds t{4.0, 0.85};
  EXPECT_EQ(situation_for(4.0, sim(0.85, 0), t), 1);
}

TEST(PoolTable, NineBoundaryCombinations) {
  const Thresholds t{-2.5, 0.85};
  const double dets[] = {std::nextafter(-2.5, -10.0), -2.5, std::nextafter(-2.5, 10.0)};
  const double sims[] = {std::nextafter(0.85, 0.0), 0.85, std::nextafter(0.85, 1.0)};
  for (double d : dets) {
    for (double s : sims) {
      const auto want = oracle::table_action(d >= t.epsilon_det, s >= t.epsilon_sim);
      const auto got = pool_action_for(d, sim(s, 3), t);
      EXPECT_EQ(static_cast<int>(got.kind), static_cast<int>(want)) << d << " " << s;
      if (got.kind == PoolActionKind::Replace) EXPECT_EQ(got.index, 3u);
    }
  }
}

TEST(PoolTable, RandomPairsMatchLookup) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> det(-20, 20), s(-1, 1), e(0, 1);
  for (int i = 0; i < 10000; ++i) {
    const Thresholds t{det(rng), e(rng)};
    const double d = det(rng), c = s(rng);
    const auto want = oracle::table_action(d >= t.epsilon_det, c >= t.epsilon_sim);
    EXPECT_EQ(static_cast<int>(pool_action_for(d, sim(c, 0), t).kind), static_cast<int>(want));
  }
}

TEST(PoolTable, EmptyPoolNeverReplaces) {
  const Thresholds t{0.0, 0.0};
  const SimilarityResult empty{};
  EXPECT_EQ(situation_for(-1.0, empty, t), 4);
  EXPECT_EQ(situation_for(1.0, empty, t), 2);
}

TEST(Thresholds, RejectsSimilarityOutsideUnitInterval) {
  EXPECT_THROW((Thresholds{0.0, 1.5}.validate()), ConfigError);
  EXPECT_THROW((Thresholds{0.0, -0.1}.validate()), ConfigError);
  EXPECT_NO_THROW((Thresholds{0.0, 0.0}.validate()));
}

TEST(Pipeline, EmptyStream) {
  Pipeline p(trace_config(), pool_of({kO}));
  EXPECT_TRUE(p.run({}).empty());
  EXPECT_EQ(p.pool()->size(), 1u);
  EXPECT_EQ(p.pool()->stats().queries, 0u);
}

TEST(Pipeline, RecursiveParaphraseHandTrace) {
  Pipeline p(trace_config(), std::nullopt);
  const auto out = p.run(trace_stream());
  ASSERT_EQ(out.size(), 3u);

  EXPECT_EQ(out[0].pool_action.kind, PoolActionKind::Add);
  EXPECT_EQ(out[0].similarity, 0.0);
  EXPECT_NEAR(out[0].fused, 0.88581642453879013, 1e-15);

  EXPECT_EQ(out[1].situation, 3);
  EXPECT_EQ(out[1].pool_action, (PoolAction{PoolActionKind::Replace, 0}));
  EXPECT_NEAR(out[1].similarity, 0.93, 1e-15);
  EXPECT_NEAR(out[1].fused, 0.13435644777896267, 1e-14);
  EXPECT_EQ(out[1].decision, 1);

  EXPECT_NEAR(out[2].similarity, 0.93, 1e-12);
  EXPECT_EQ(out[2].pool_action, (PoolAction{PoolActionKind::Replace, 0}));
  EXPECT_EQ(out[2].decision, 1);

  EXPECT_EQ(p.pool()->size(), 1u);
  EXPECT_EQ(p.pool()->source_id_at(0), "p2");
}

TEST(Pipeline, FrozenPoolLetsSecondParaphraseEvade) {
  auto cfg = trace_config();
  cfg.update_pool = false;
  Pipeline p(cfg, pool_of({kO}));
  const auto out = p.run(trace_stream());
  EXPECT_EQ(out[0].situation, 1);
  EXPECT_NEAR(out[0].fused, 0.9 * std::pow(10.0, 1.0 / 6.0), 1e-12);
  EXPECT_EQ(out[1].situation, 3);
  EXPECT_EQ(out[1].pool_action.kind, PoolActionKind::None);
  EXPECT_NEAR(out[2].similarity, 0.8, 1e-15);
  EXPECT_EQ(out[2].situation, 4);
  EXPECT_NEAR(out[2].fused, 0.12222117583241136, 1e-14);
  EXPECT_EQ(out[2].decision, 0);
  EXPECT_EQ(p.pool()->source_id_at(0), "m0");
}

TEST(Pipeline, NoFusionDecidesOnNormalizedScore) {
  auto cfg = trace_config();
  cfg.use_fusion = false;
  Pipeline p(cfg, std::nullopt);
  const auto out = p.run(trace_stream());
  for (const auto& o : out) EXPECT_EQ(o.fused, o.normalized_score);
  EXPECT_EQ(out[1].decision, 0);
  EXPECT_EQ(out[2].decision, 0);
  // the pool still updates
  EXPECT_EQ(out[2].pool_action.kind, PoolActionKind::Replace);
}

TEST(Pipeline, DecisionAbsentWithoutEpsilon) {
  auto cfg = trace_config();
  cfg.fusion.decision_epsilon.reset();
  Pipeline p(cfg, std::nullopt);
  for (const auto& o : p.run(trace_stream())) EXPECT_FALSE(o.decision.has_value());
}

TEST(Pipeline, LowerOrientationUsesNegatedRawForThreshold) {
  PipelineConfig cfg;
  cfg.detector = {"id-mle", Orientation::LowerMeansLLM, 0.0, 20.0, -11.0};
  Pipeline p(cfg, std::nullopt);
  // raw 12 -> oriented -12 < -11: situation 4 on an empty pool
  auto a = p.step(text("a", 12.0, kO));
  EXPECT_EQ(a.situation, 4);
  // raw 5 -> oriented -5 >= -11: add
  auto b = p.step(text("b", 5.0, kP1));
  EXPECT_EQ(b.pool_action.kind, PoolActionKind::Add);
  EXPECT_DOUBLE_EQ(b.normalized_score, 0.75);
}

TEST(Pipeline, PoolSizeLawAndOutcomeInvariants) {
  std::mt19937_64 rng(8);
  const auto stream = random_stream(rng, 400, 6);
  Pipeline p(random_config(), pool_of({oracle::random_vector(rng, 6)}));
  const auto out = p.run(stream);
  std::size_t adds = 0, replaces = 0, prev = 1;
  std::array<int, 5> seen{};
  for (const auto& o : out) {
    seen[o.situation] = 1;
    if (o.pool_action.kind == PoolActionKind::Add) {
      ++adds;
      EXPECT_EQ(o.pool_size_after, prev + 1);
    } else {
      EXPECT_EQ(o.pool_size_after, prev);
    }
    if (o.pool_action.kind == PoolActionKind::Replace) ++replaces;
    prev = o.pool_size_after;
    EXPECT_GE(o.normalized_score, 0.0);
    EXPECT_LE(o.normalized_score, 1.0);
  }
  EXPECT_EQ(seen[1] + seen[2] + seen[3] + seen[4], 4) << "stream should exercise every row";
  EXPECT_EQ(p.pool()->size(), 1 + adds);
  EXPECT_EQ(p.pool()->stats().adds, adds);
  EXPECT_EQ(p.pool()->stats().replaces, replaces);
  EXPECT_EQ(p.pool()->stats().queries, stream.size());
}

TEST(Pipeline, Deterministic) {
  std::mt19937_64 rng(3);
  const auto stream = random_stream(rng, 200, 8);
  Pipeline a(random_config(), std::nullopt), b(random_config(), std::nullopt);
  const auto x = a.run(stream), y = b.run(stream);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(to_json(x[i]).dump(), to_json(y[i]).dump());
}

TEST(Pipeline, TruthLabelsAreIgnored) {
  std::mt19937_64 rng(12);
  auto stream = random_stream(rng, 200, 8);
  Pipeline a(random_config(), std::nullopt);
  const auto x = a.run(stream);
  std::vector<std::optional<TruthLabel>> labels;
  for (const auto& c : stream) labels.push_back(c.truth);
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    stream[i].truth = i % 3 == 0 ? std::nullopt : labels[i];
  }
  Pipeline b(random_config(), std::nullopt);
  const auto y = b.run(stream);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(to_json(x[i]).dump(), to_json(y[i]).dump());
}

TEST(Pipeline, PrefixCausality) {
  std::mt19937_64 rng(99);
  const auto stream = random_stream(rng, 150, 5);
  Pipeline full(random_config(), std::nullopt);
  const auto all = full.run(stream);
  for (std::size_t cut : {0, 1, 17, 75, 149}) {
    Pipeline part(random_config(), std::nullopt);
    const auto some = part.run(std::span(stream).first(cut));
    ASSERT_EQ(some.size(), cut);
    for (std::size_t i = 0; i < cut; ++i) EXPECT_EQ(to_json(some[i]).dump(), to_json(all[i]).dump());
  }
}

TEST(Pipeline, RunningMinMaxNormalization) {
  auto cfg = random_config();
  cfg.running_minmax = true;
  Pipeline p(cfg, std::nullopt);
  EXPECT_EQ(p.step(text("a", 1.0, kO)).normalized_score, 0.5);
  EXPECT_EQ(p.step(text("b", 3.0, kP1)).normalized_score, 1.0);
  EXPECT_EQ(p.step(text("c", 2.0, kP2)).normalized_score, 0.5);
  EXPECT_EQ(p.step(text("d", -1.0, kO)).normalized_score, 0.0);
}

TEST(Pipeline, MissingDataLeavesStateUntouched) {
  Pipeline p(trace_config(), std::nullopt);
  p.step(text("o", 1.8, kO));
  CandidateText no_score;
  no_score.id = "ns";
  no_score.embedding = kP1;
  EXPECT_THROW(p.step(no_score), MissingDataError);
  CandidateText no_emb;
  no_emb.id = "ne";
  no_emb.raw_score = 0.1;
  EXPECT_THROW(p.step(no_emb), MissingDataError);
  EXPECT_THROW(p.step(text("bad-dim", 0.1, {1.0, 2.0})), InputError);
  EXPECT_THROW(p.step(text("nan", NAN, kP1)), InputError);
  EXPECT_EQ(p.steps_completed(), 1u);
  EXPECT_EQ(p.pool()->size(), 1u);
  EXPECT_EQ(p.pool()->source_id_at(0), "o");
  EXPECT_EQ(p.step(text("p1", 0.2, kP1)).pool_action.kind, PoolActionKind::Replace);
}

TEST(Pipeline, StreamErrorCarriesIndex) {
  auto stream = trace_stream();
  stream[2].embedding.reset();
  Pipeline p(trace_config(), std::nullopt);
  try {
    p.run(stream);
    FAIL();
  } catch (const StreamError& e) {
    EXPECT_EQ(e.index(), 2u);
    EXPECT_EQ(e.id(), "p2");
    EXPECT_EQ(e.kind(), StreamError::Kind::MissingData);
  }
  EXPECT_EQ(p.steps_completed(), 2u);
  EXPECT_EQ(p.pool()->source_id_at(0), "p1");
}

namespace {

class CountingScores final : public ScoreProvider {
 public:
  double get_score(const CandidateText& t) override {
    ++calls;
    return t.id == "o" ? 1.8 : 0.2;
  }
  int calls = 0;
};

class MapEmbeddings final : public EmbeddingProvider {
 public:
  std::vector<double> embed(const CandidateText& t) override {
    if (t.id == "o") return kO;
    if (t.id == "p1") return kP1;
    if (t.id == "p2") return kP2;
    throw MissingDataError("no vector for " + t.id);
  }
  std::optional<std::size_t> dimension() const override { return 3; }
};

class WrongDim final : public EmbeddingProvider {
 public:
  std::vector<double> embed(const CandidateText&) override { return {1, 0}; }
  std::optional<std::size_t> dimension() const override { return 2; }
};

}  // namespace

TEST(Pipeline, ProvidersMatchInlineData) {
  CountingScores scores;
  MapEmbeddings emb;
  std::vector<CandidateText> bare(3);
  bare[0].id = "o";
  bare[1].id = "p1";
  bare[2].id = "p2";
  Pipeline a(trace_config(), std::nullopt, &scores, &emb);
  Pipeline b(trace_config(), std::nullopt);
  const auto x = a.run(bare), y = b.run(trace_stream());
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(to_json(x[i]).dump(), to_json(y[i]).dump());
  EXPECT_EQ(scores.calls, 3);
}

TEST(Pipeline, InlineValuesTakePrecedenceOverProviders) {
  CountingScores scores;
  Pipeline p(trace_config(), std::nullopt, &scores);
  p.step(text("p1", 1.5, kP1));
  EXPECT_EQ(scores.calls, 0);
}

TEST(Pipeline, EncoderDimensionMustMatchPool) {
  WrongDim emb;
  EXPECT_THROW(Pipeline(trace_config(), pool_of({kO}), nullptr, &emb), InputError);
}

TEST(Outcome, JsonRoundTrip) {
  Pipeline p(trace_config(), std::nullopt);
  for (const auto& o : p.run(trace_stream())) {
    const auto j = to_json(o);
    EXPECT_EQ(to_json(outcome_from_json(j)).dump(), j.dump());
  }
  StepOutcome none;
  none.id = "x";
  const auto j = to_json(none);
  EXPECT_TRUE(j["decision"].is_null());
  EXPECT_TRUE(j["argmax_index"].is_null());
  EXPECT_EQ(j["pool_action"], "none");
}
