#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fsrec/vocab.hpp"

namespace fsrec::eval {

/// Result of one minimum-cost alignment.  Following the convention that
/// edits transform the hypothesis into the reference: a deletion removes an
/// extra hypothesis symbol, an insertion supplies a reference symbol the
/// hypothesis missed.  aligned holds (reference, hypothesis) pairs with -1
/// marking the missing side.
struct EditOps {
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    std::vector<std::pair<int, int>> aligned;

    std::size_t distance() const { return substitutions + deletions + insertions; }
};

/// Levenshtein alignment with unit costs.  Ties in the dynamic program are
/// broken preferring substitution, then deletion, then insertion, so the
/// returned alignment is deterministic.
inline EditOps edit_distance(const std::vector<int>& hypothesis, const std::vector<int>& reference) {
    std::size_t lh = hypothesis.size(), lr = reference.size();
    std::vector<std::size_t> dp((lh + 1) * (lr + 1));
    auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return dp[i * (lr + 1) + j]; };
    for (std::size_t i = 0; i <= lh; ++i) at(i, 0) = i;
    for (std::size_t j = 0; j <= lr; ++j) at(0, j) = j;
    for (std::size_t i = 1; i <= lh; ++i) {
        for (std::size_t j = 1; j <= lr; ++j) {
            std::size_t sub = at(i - 1, j - 1) + (hypothesis[i - 1] == reference[j - 1] ? 0 : 1);
            std::size_t del = at(i - 1, j) + 1;
            std::size_t ins = at(i, j - 1) + 1;
            at(i, j) = std::min({sub, del, ins});
        }
    }

    EditOps ops;
    std::size_t i = lh, j = lr;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 &&
            at(i, j) == at(i - 1, j - 1) + (hypothesis[i - 1] == reference[j - 1] ? 0 : 1)) {
            if (hypothesis[i - 1] != reference[j - 1]) ++ops.substitutions;
            ops.aligned.emplace_back(reference[j - 1], hypothesis[i - 1]);
            --i;
            --j;
        } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
            ++ops.deletions;
            ops.aligned.emplace_back(-1, hypothesis[i - 1]);
            --i;
        } else {
            ++ops.insertions;
            ops.aligned.emplace_back(reference[j - 1], -1);
            --j;
        }
    }
    std::reverse(ops.aligned.begin(), ops.aligned.end());
    return ops;
}

inline std::vector<int> to_symbols(const std::string& s) {
    std::vector<int> v;
    v.reserve(s.size());
    for (char c : s) v.push_back(static_cast<int>(static_cast<unsigned char>(c)));
    return v;
}

inline EditOps edit_distance(const std::string& hypothesis, const std::string& reference) {
    return edit_distance(to_symbols(hypothesis), to_symbols(reference));
}

/// Pooled letter error rate over (hypothesis, reference) pairs:
/// 100 * (total substitutions + deletions + insertions) / (total reference letters).
inline double letter_error_rate(const std::vector<std::pair<std::vector<int>, std::vector<int>>>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("letter_error_rate: empty pair list");
    std::size_t edits = 0, ref_len = 0;
    for (const auto& [hyp, ref] : pairs) {
        edits += edit_distance(hyp, ref).distance();
        ref_len += ref.size();
    }
    if (ref_len == 0) throw std::invalid_argument("letter_error_rate: total reference length is zero");
    return 100.0 * static_cast<double>(edits) / static_cast<double>(ref_len);
}

/// Letter confusion counts from alignments.  Rows are ground-truth letters
/// plus one row for hypothesis symbols with no reference counterpart
/// (deletions); columns are hypothesized letters plus one column for
/// reference letters the hypothesis missed (insertions).
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_letters = 26)
        : n_(num_letters), counts_((num_letters + 1) * (num_letters + 1), 0) {}

    std::size_t num_letters() const { return n_; }
    std::size_t gap_index() const { return n_; }

    void add(const EditOps& ops) {
        for (const auto& [ref, hyp] : ops.aligned) {
            std::size_t r = ref < 0 ? n_ : static_cast<std::size_t>(ref);
            std::size_t c = hyp < 0 ? n_ : static_cast<std::size_t>(hyp);
            if (r > n_ || c > n_) throw std::invalid_argument("confusion: symbol outside letter range");
            ++counts_[r * (n_ + 1) + c];
        }
    }

    std::size_t count(std::size_t row, std::size_t col) const { return counts_[row * (n_ + 1) + col]; }

    std::size_t total() const {
        std::size_t t = 0;
        for (std::size_t c : counts_) t += c;
        return t;
    }

    /// Empirical probability of each hypothesized outcome given a
    /// ground-truth letter; zero rows stay zero.
    std::vector<double> row_normalized(std::size_t row) const {
        std::vector<double> out(n_ + 1, 0.0);
        std::size_t row_total = 0;
        for (std::size_t c = 0; c <= n_; ++c) row_total += count(row, c);
        if (row_total == 0) return out;
        for (std::size_t c = 0; c <= n_; ++c) {
            out[c] = static_cast<double>(count(row, c)) / static_cast<double>(row_total);
        }
        return out;
    }

private:
    std::size_t n_;
    std::vector<std::size_t> counts_;
};

inline ConfusionMatrix confusion_matrix(const std::vector<EditOps>& alignments,
                                        std::size_t num_letters = 26) {
    ConfusionMatrix m(num_letters);
    for (const EditOps& ops : alignments) m.add(ops);
    return m;
}

}  // namespace fsrec::eval
