#include <gtest/gtest.h>

#include <functional>
#include <sstream>

#include "fsrec/export.hpp"
#include "fsrec/metrics.hpp"
#include "fsrec/rng.hpp"
#include "fsrec/tensor.hpp"

using namespace fsrec;
using fsrec::num::Rng;
using fsrec::num::Tensor;

namespace {

// Independent oracle: memoized top-down recursion on the metric definition.
std::size_t edit_distance_oracle(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<long> memo((a.size() + 1) * (b.size() + 1), -1);
    std::function<std::size_t(std::size_t, std::size_t)> rec = [&](std::size_t i,
                                                                   std::size_t j) -> std::size_t {
        if (i == 0) return j;
        if (j == 0) return i;
        long& slot = memo[i * (b.size() + 1) + j];
        if (slot >= 0) return static_cast<std::size_t>(slot);
        std::size_t best = rec(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
        best = std::min(best, rec(i - 1, j) + 1);
        best = std::min(best, rec(i, j - 1) + 1);
        slot = static_cast<long>(best);
        return best;
    };
    return rec(a.size(), b.size());
}

std::vector<int> random_word(Rng& rng, std::size_t max_len, int alphabet) {
    std::size_t len = static_cast<std::size_t>(rng.below(max_len + 1));
    std::vector<int> w(len);
    for (auto& c : w) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(alphabet)));
    return w;
}

}  // namespace

TEST(EditDistance, IdenticalStringsCostZero) {
    auto ops = eval::edit_distance(std::string("FIREWIRE"), std::string("FIREWIRE"));
    EXPECT_EQ(ops.distance(), 0u);
    EXPECT_EQ(ops.substitutions, 0u);
    EXPECT_EQ(ops.aligned.size(), 8u);
}

TEST(EditDistance, BeamOutputExample) {
    auto ops = eval::edit_distance(std::string("FIRSWIUO"), std::string("FIREWIRE"));
    EXPECT_EQ(ops.distance(), 3u);
    EXPECT_EQ(ops.substitutions, 3u);
    EXPECT_EQ(ops.deletions, 0u);
    EXPECT_EQ(ops.insertions, 0u);
}

TEST(EditDistance, EmptyHypothesisNeedsInsertions) {
    auto ops = eval::edit_distance(std::string(""), std::string("ABC"));
    EXPECT_EQ(ops.distance(), 3u);
    EXPECT_EQ(ops.insertions, 3u);
    EXPECT_EQ(ops.deletions, 0u);
}

TEST(EditDistance, TieBreakPrefersSubstitution) {
    // "AB" vs "BA" can align as sub+sub or ins+del chains; preference keeps
    // two substitutions
    auto ops = eval::edit_distance(std::string("AB"), std::string("BA"));
    EXPECT_EQ(ops.distance(), 2u);
    EXPECT_EQ(ops.substitutions, 2u);
}

TEST(EditDistance, MatchesOracleOnShortAlphabetSweep) {
    // all pairs of words of length <= 3 over a 4-letter alphabet
    std::vector<std::vector<int>> words;
    words.push_back({});
    for (int a = 0; a < 4; ++a) {
        words.push_back({a});
        for (int b = 0; b < 4; ++b) {
            words.push_back({a, b});
            for (int c = 0; c < 4; ++c) words.push_back({a, b, c});
        }
    }
    for (const auto& h : words) {
        for (const auto& r : words) {
            EXPECT_EQ(eval::edit_distance(h, r).distance(), edit_distance_oracle(h, r));
        }
    }
}

TEST(EditDistance, MetricAxiomsOnRandomTriples) {
    Rng rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<int> a = random_word(rng, 6, 5);
        std::vector<int> b = random_word(rng, 6, 5);
        std::vector<int> c = random_word(rng, 6, 5);
        std::size_t ab = eval::edit_distance(a, b).distance();
        std::size_t ba = eval::edit_distance(b, a).distance();
        std::size_t ac = eval::edit_distance(a, c).distance();
        std::size_t cb = eval::edit_distance(c, b).distance();
        EXPECT_EQ(ab, ba);
        EXPECT_LE(ab, ac + cb);
        EXPECT_EQ(ab == 0, a == b);
    }
}

TEST(LetterErrorRate, AllCorrectIsZero) {
    std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs = {{{1, 2}, {1, 2}},
                                                                        {{3}, {3}}};
    EXPECT_DOUBLE_EQ(eval::letter_error_rate(pairs), 0.0);
}

TEST(LetterErrorRate, SinglePairFromEditExample) {
    Vocab vocab;
    std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs = {
        {vocab.to_ids("FIRSWIUO"), vocab.to_ids("FIREWIRE")}};
    EXPECT_DOUBLE_EQ(eval::letter_error_rate(pairs), 100.0 * 3.0 / 8.0);
}

TEST(LetterErrorRate, PooledEqualsLengthWeightedMean) {
    Rng rng(32);
    std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
    double edits = 0.0, ref_len = 0.0;
    for (int i = 0; i < 20; ++i) {
        std::vector<int> hyp = random_word(rng, 6, 4);
        std::vector<int> ref = random_word(rng, 6, 4);
        if (ref.empty()) ref.push_back(0);
        edits += static_cast<double>(eval::edit_distance(hyp, ref).distance());
        ref_len += static_cast<double>(ref.size());
        pairs.emplace_back(hyp, ref);
    }
    EXPECT_NEAR(eval::letter_error_rate(pairs), 100.0 * edits / ref_len, 1e-12);
}

TEST(LetterErrorRate, EmptyOutputSystemScoresHundredPercent) {
    std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs = {{{}, {0, 1, 2}},
                                                                        {{}, {3}}};
    EXPECT_DOUBLE_EQ(eval::letter_error_rate(pairs), 100.0);
}

TEST(LetterErrorRate, ZeroReferenceRejected) {
    std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs = {{{1}, {}}};
    EXPECT_THROW(eval::letter_error_rate(pairs), std::invalid_argument);
    EXPECT_THROW(eval::letter_error_rate({}), std::invalid_argument);
}

TEST(Confusion, PerfectPredictionsAreDiagonal) {
    std::vector<eval::EditOps> alignments = {eval::edit_distance(std::vector<int>{0, 1, 2},
                                                                 std::vector<int>{0, 1, 2})};
    eval::ConfusionMatrix m = eval::confusion_matrix(alignments, 4);
    EXPECT_EQ(m.total(), 3u);
    EXPECT_EQ(m.count(0, 0), 1u);
    EXPECT_EQ(m.count(1, 1), 1u);
    EXPECT_EQ(m.count(2, 2), 1u);
    EXPECT_EQ(m.count(0, 1), 0u);
}

TEST(Confusion, SingleSubstitutionLandsOffDiagonal) {
    Vocab vocab;
    // reference PET, hypothesis POT: E -> O substitution
    auto ops = eval::edit_distance(vocab.to_ids("POT"), vocab.to_ids("PET"));
    eval::ConfusionMatrix m = eval::confusion_matrix({ops});
    EXPECT_EQ(m.count(static_cast<std::size_t>(vocab.letter_id('E')),
                      static_cast<std::size_t>(vocab.letter_id('O'))),
              1u);
}

TEST(Confusion, TotalsAndRowNormalization) {
    Vocab vocab;
    std::vector<eval::EditOps> alignments = {
        eval::edit_distance(vocab.to_ids("AB"), vocab.to_ids("ABC")),  // one missing letter
        eval::edit_distance(vocab.to_ids("XAB"), vocab.to_ids("AB")),  // one spare letter
    };
    eval::ConfusionMatrix m = eval::confusion_matrix(alignments);
    std::size_t aligned = alignments[0].aligned.size() + alignments[1].aligned.size();
    EXPECT_EQ(m.total(), aligned);
    // ground-truth rows sum to one over letters plus the missing column
    auto row = m.row_normalized(static_cast<std::size_t>(vocab.letter_id('C')));
    double sum = 0.0;
    for (double v : row) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(row[m.gap_index()], 1.0);  // C was never hypothesized
}

TEST(AttentionExport, SingleFrameColumnOfOnes) {
    std::vector<Tensor> alphas = {Tensor::vector({1.0}), Tensor::vector({1.0})};
    std::ostringstream out;
    eval::write_attention_csv(out, {"A", "</w>"}, alphas);
    std::istringstream in(out.str());
    eval::AttentionTable table = eval::parse_attention_csv(in);
    ASSERT_EQ(table.rows.size(), 2u);
    EXPECT_DOUBLE_EQ(table.rows[0][0], 1.0);
    EXPECT_EQ(table.argmax[0], 1u);
}

TEST(AttentionExport, RowsReparseToUnitSums) {
    Rng rng(41);
    std::vector<Tensor> alphas;
    std::vector<std::string> labels;
    for (int r = 0; r < 4; ++r) {
        Tensor row({6});
        double z = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            row[i] = rng.uniform() + 1e-3;
            z += row[i];
        }
        for (std::size_t i = 0; i < 6; ++i) row[i] /= z;
        alphas.push_back(row);
        labels.emplace_back(1, static_cast<char>('A' + r));
    }
    std::ostringstream out;
    eval::write_attention_csv(out, labels, alphas);
    std::istringstream in(out.str());
    eval::AttentionTable table = eval::parse_attention_csv(in);
    ASSERT_EQ(table.rows.size(), 4u);
    for (std::size_t r = 0; r < 4; ++r) {
        double sum = 0.0;
        for (double v : table.rows[r]) sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-9);
        EXPECT_GE(table.argmax[r], 1u);
        EXPECT_LE(table.argmax[r], 6u);
    }
}

TEST(Heatmap, WritesWellFormedSvg) {
    std::vector<std::vector<double>> grid = {{0.0, 0.5}, {1.0, 0.25}};
    std::ostringstream out;
    eval::write_heatmap_svg(out, grid, {"r0", "r1"}, {"c0", "c1"});
    std::string svg = out.str();
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("rect"), std::string::npos);
}
