#include <gtest/gtest.h>

#include <cmath>

#include "fsrec/decode.hpp"
#include "test_util.hpp"

using namespace fsrec;
using fsrec::num::Tensor;
using fsrec::test::random_frames;
using fsrec::test::tiny_params;

namespace {

double sequence_log_prob(const nn::ModelParams& params, const Tensor& frames,
                         const std::vector<int>& letters, bool finished, std::size_t max_len) {
    dec::SequenceScorer scorer(params, frames);
    Vocab vocab = params.config.vocab();
    nn::LstmState state = scorer.initial_state();
    int prev = vocab.start_id();
    double lp = 0.0;
    for (int id : letters) {
        auto out = scorer.step(prev, state);
        lp += out.log_probs[static_cast<std::size_t>(id)];
        state = out.state;
        prev = id;
    }
    if (finished && letters.size() < max_len) {
        auto out = scorer.step(prev, state);
        lp += out.log_probs[static_cast<std::size_t>(vocab.end_id())];
    }
    return lp;
}

}  // namespace

TEST(Greedy, ImmediateEndGivesEmptyWord) {
    nn::ModelParams params = tiny_params(nn::AeMode::None, 1);
    test::zero_params(params);
    params.out.b_o[static_cast<std::size_t>(params.config.vocab().end_id())] = 100.0;
    Tensor frames = random_frames(3, 16, 2);
    EXPECT_TRUE(dec::greedy_decode(params, frames, 10).empty());
}

TEST(Greedy, LengthNeverExceedsCap) {
    for (int trial = 0; trial < 10; ++trial) {
        nn::ModelParams params = tiny_params(nn::AeMode::None, 100 + trial);
        Tensor frames = random_frames(3, 16, 200 + trial);
        EXPECT_LE(dec::greedy_decode(params, frames, 4).size(), 4u);
    }
}

TEST(Greedy, RejectsZeroMaxLen) {
    nn::ModelParams params = tiny_params(nn::AeMode::None, 2);
    Tensor frames = random_frames(2, 16, 3);
    EXPECT_THROW(dec::greedy_decode(params, frames, 0), std::invalid_argument);
}

TEST(Beam, WidthOneEqualsGreedyOn200RandomModels) {
    for (int trial = 0; trial < 200; ++trial) {
        nn::ModelParams params = tiny_params(nn::AeMode::None, 1000 + trial);
        Tensor frames = random_frames(3, 16, 2000 + trial);
        std::vector<int> greedy = dec::greedy_decode(params, frames, 4);
        auto beam = dec::beam_decode(params, frames, 1, 4);
        ASSERT_FALSE(beam.empty());
        EXPECT_EQ(beam.front().letters, greedy);
    }
}

TEST(Beam, RejectsZeroWidth) {
    nn::ModelParams params = tiny_params(nn::AeMode::None, 3);
    Tensor frames = random_frames(2, 16, 4);
    EXPECT_THROW(dec::beam_decode(params, frames, 0, 4), std::invalid_argument);
}

TEST(Beam, RecoversOptimumGreedyMisses) {
    // random tiny models where the greedy first step is suboptimal; beam
    // width 2 recovers the exhaustive optimum (seeds found by scanning)
    int found = 0;
    for (int trial = 0; trial < 200 && found < 3; ++trial) {
        nn::ModelParams params = tiny_params(nn::AeMode::None, 5000 + trial);
        Tensor frames = random_frames(3, 16, 6000 + trial);
        std::vector<int> greedy = dec::greedy_decode(params, frames, 2);
        std::vector<int> best = dec::exhaustive_decode(params, frames, 2);
        if (greedy == best) continue;
        double greedy_lp = sequence_log_prob(params, frames, greedy, greedy.size() < 2, 2);
        double best_lp = sequence_log_prob(params, frames, best, best.size() < 2, 2);
        EXPECT_LT(greedy_lp, best_lp);
        auto beam = dec::beam_decode(params, frames, 2, 2);
        EXPECT_EQ(beam.front().letters, best);
        ++found;
    }
    EXPECT_GE(found, 1);
}

TEST(Beam, SaturatedWidthMatchesExhaustiveOn50Models) {
    for (int trial = 0; trial < 50; ++trial) {
        nn::ModelParams params = tiny_params(nn::AeMode::None, 3000 + trial);
        Tensor frames = random_frames(3, 16, 4000 + trial);
        auto beam = dec::beam_decode(params, frames, 64, 3);
        std::vector<int> best = dec::exhaustive_decode(params, frames, 3);
        EXPECT_EQ(beam.front().letters, best);
    }
}

TEST(Beam, TopScoreWeaklyMonotoneInWidth) {
    for (int trial = 0; trial < 20; ++trial) {
        nn::ModelParams params = tiny_params(nn::AeMode::None, 7000 + trial);
        Tensor frames = random_frames(4, 16, 8000 + trial);
        double prev = -std::numeric_limits<double>::infinity();
        for (std::size_t width : {1u, 2u, 3u, 5u, 8u}) {
            auto beam = dec::beam_decode(params, frames, width, 4);
            EXPECT_GE(beam.front().log_prob, prev - 1e-12);
            prev = beam.front().log_prob;
        }
    }
}

TEST(Beam, LogProbsNonPositiveAndRanked) {
    nn::ModelParams params = tiny_params(nn::AeMode::None, 4);
    Tensor frames = random_frames(3, 16, 5);
    auto beam = dec::beam_decode(params, frames, 5, 4);
    double prev = 0.0;
    for (const auto& hyp : beam) {
        EXPECT_LE(hyp.log_prob, 0.0);
        EXPECT_LE(hyp.log_prob, prev + 1e-15);
        prev = hyp.log_prob;
    }
}

TEST(Beam, HypothesisScoreIsSumOfStepLogProbs) {
    nn::ModelParams params = tiny_params(nn::AeMode::None, 5);
    Tensor frames = random_frames(3, 16, 6);
    auto beam = dec::beam_decode(params, frames, 3, 4);
    for (const auto& hyp : beam) {
        double lp = sequence_log_prob(params, frames, hyp.letters, hyp.finished, 4);
        EXPECT_NEAR(hyp.log_prob, lp, 1e-12);
    }
}

TEST(Beam, DeterministicRankingWithLexicographicTies) {
    // uniform distributions everywhere: the empty word scores best, then
    // single letters in alphabetical order
    nn::ModelParams params = tiny_params(nn::AeMode::None, 6);
    test::zero_params(params);
    Tensor frames = random_frames(2, 16, 7);
    auto beam = dec::beam_decode(params, frames, 4, 3);
    ASSERT_EQ(beam.size(), 4u);
    EXPECT_TRUE(beam[0].letters.empty());
    EXPECT_TRUE(beam[0].finished);
    EXPECT_EQ(beam[1].letters, std::vector<int>({0}));
    EXPECT_EQ(beam[2].letters, std::vector<int>({1}));
    EXPECT_EQ(beam[3].letters, std::vector<int>({2}));

    auto again = dec::beam_decode(params, frames, 4, 3);
    for (std::size_t i = 0; i < beam.size(); ++i) {
        EXPECT_EQ(beam[i].letters, again[i].letters);
        EXPECT_DOUBLE_EQ(beam[i].log_prob, again[i].log_prob);
    }
}

TEST(Beam, FinishedHypothesesCompeteWithoutExtension) {
    nn::ModelParams params = tiny_params(nn::AeMode::None, 7);
    Tensor frames = random_frames(3, 16, 8);
    auto beam = dec::beam_decode(params, frames, 6, 3);
    for (const auto& hyp : beam) {
        if (hyp.finished) {
            EXPECT_LE(hyp.letters.size(), 3u);
        } else {
            EXPECT_EQ(hyp.letters.size(), 3u);  // only cap-length hypotheses stay open
        }
    }
}

TEST(Exhaustive, BaseCaseArgmax) {
    nn::ModelParams params = tiny_params(nn::AeMode::None, 8, /*num_letters=*/2);
    Tensor frames = random_frames(2, 16, 9);
    std::vector<int> best = dec::exhaustive_decode(params, frames, 1);
    // candidates: "", "A", "B" (each scored with its end transition where
    // applicable); verify by direct enumeration
    double best_lp = -std::numeric_limits<double>::infinity();
    std::vector<int> expect;
    for (const std::vector<int>& cand :
         {std::vector<int>{}, std::vector<int>{0}, std::vector<int>{1}}) {
        double lp = sequence_log_prob(params, frames, cand, cand.empty(), 1);
        if (lp > best_lp) {
            best_lp = lp;
            expect = cand;
        }
    }
    EXPECT_EQ(best, expect);
}

TEST(Exhaustive, AtLeastGreedyProbability) {
    for (int trial = 0; trial < 20; ++trial) {
        nn::ModelParams params = tiny_params(nn::AeMode::None, 9000 + trial);
        Tensor frames = random_frames(3, 16, 9100 + trial);
        std::vector<int> greedy = dec::greedy_decode(params, frames, 3);
        std::vector<int> best = dec::exhaustive_decode(params, frames, 3);
        double glp = sequence_log_prob(params, frames, greedy, greedy.size() < 3, 3);
        double blp = sequence_log_prob(params, frames, best, best.size() < 3, 3);
        EXPECT_GE(blp, glp - 1e-12);
    }
}

TEST(Exhaustive, RejectsOversizedSearchSpace) {
    nn::ModelParams params = tiny_params(nn::AeMode::None, 9, /*num_letters=*/26);
    Tensor frames = random_frames(2, 16, 10);
    EXPECT_THROW(dec::exhaustive_decode(params, frames, 20), std::invalid_argument);
}
