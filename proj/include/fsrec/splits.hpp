#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsrec/errors.hpp"
#include "fsrec/rng.hpp"

namespace fsrec::data {

enum class Protocol { SD, SI, SA };

inline const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::SD: return "sd";
        case Protocol::SI: return "si";
        case Protocol::SA: return "sa";
    }
    return "?";
}

/// Index lists into a dataset under one evaluation protocol.  The lists are
/// pairwise disjoint; adaptation is populated only for SA.
struct ExperimentSplit {
    Protocol protocol = Protocol::SD;
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
    std::vector<std::size_t> adaptation;
};

namespace detail {

// A signer's instances shuffled and cut into 10 folds.  Folds 0..7 serve as
// test/validation folds; folds 8 and 9 are the 20% reserved for adaptation.
inline std::vector<std::vector<std::size_t>> signer_folds(const std::vector<int>& signer_of, int signer,
                                                          std::uint64_t seed) {
    std::vector<std::size_t> mine;
    for (std::size_t i = 0; i < signer_of.size(); ++i) {
        if (signer_of[i] == signer) mine.push_back(i);
    }
    if (mine.size() < 10) {
        throw DataError("make_splits: signer " + std::to_string(signer) + " has " +
                        std::to_string(mine.size()) + " instances; at least 10 are needed");
    }
    Rng rng = Rng(seed).split("folds").split(static_cast<std::uint64_t>(signer));
    rng.shuffle(mine);
    std::vector<std::vector<std::size_t>> folds(10);
    for (std::size_t i = 0; i < mine.size(); ++i) folds[i % 10].push_back(mine[i]);
    return folds;
}

}  // namespace detail

/// Builds the train/validation/test/adaptation partition for one protocol.
///
/// SD: within the target signer, fold k (k in 0..7) is the test fold, fold
/// (k+1) mod 8 the validation fold, and the remaining eight folds (including
/// the two reserved for adaptation) form the 80% training set.
/// SI: train on all other signers with a held-out tenth as validation; test
/// on every instance of the target signer.
/// SA: the target signer's two reserved folds (20%) form the adaptation set,
/// fold 0 (10%) the tuning set, and folds 1..7 (70%) the test set.
inline ExperimentSplit make_splits(const std::vector<int>& signer_of, Protocol protocol, int fold,
                                   int target_signer, std::uint64_t seed) {
    ExperimentSplit split;
    split.protocol = protocol;
    bool target_exists = std::find(signer_of.begin(), signer_of.end(), target_signer) != signer_of.end();
    if (!target_exists) {
        throw DataError("make_splits: dataset has no instances of signer " + std::to_string(target_signer));
    }

    if (protocol == Protocol::SD) {
        if (fold < 0 || fold >= 8) {
            throw DataError("make_splits: SD fold must be in 0..7, got " + std::to_string(fold));
        }
        auto folds = detail::signer_folds(signer_of, target_signer, seed);
        std::size_t test_fold = static_cast<std::size_t>(fold);
        std::size_t val_fold = static_cast<std::size_t>((fold + 1) % 8);
        split.test = folds[test_fold];
        split.validation = folds[val_fold];
        for (std::size_t f = 0; f < 10; ++f) {
            if (f == test_fold || f == val_fold) continue;
            split.train.insert(split.train.end(), folds[f].begin(), folds[f].end());
        }
        std::sort(split.train.begin(), split.train.end());
        std::sort(split.validation.begin(), split.validation.end());
        std::sort(split.test.begin(), split.test.end());
        return split;
    }

    bool other_exists = std::any_of(signer_of.begin(), signer_of.end(),
                                    [&](int s) { return s != target_signer; });
    if (!other_exists) {
        throw DataError("make_splits: SI/SA needs at least two signers");
    }

    if (protocol == Protocol::SI) {
        std::vector<std::size_t> others;
        for (std::size_t i = 0; i < signer_of.size(); ++i) {
            if (signer_of[i] == target_signer) {
                split.test.push_back(i);
            } else {
                others.push_back(i);
            }
        }
        Rng rng = Rng(seed).split("si").split(static_cast<std::uint64_t>(target_signer));
        rng.shuffle(others);
        std::size_t n_val = std::max<std::size_t>(1, others.size() / 10);
        split.validation.assign(others.begin(), others.begin() + static_cast<long>(n_val));
        split.train.assign(others.begin() + static_cast<long>(n_val), others.end());
        std::sort(split.train.begin(), split.train.end());
        std::sort(split.validation.begin(), split.validation.end());
        return split;
    }

    // SA: adaptation and tuning slices of the target signer; test on the rest.
    auto folds = detail::signer_folds(signer_of, target_signer, seed);
    split.adaptation = folds[8];
    split.adaptation.insert(split.adaptation.end(), folds[9].begin(), folds[9].end());
    split.validation = folds[0];
    for (std::size_t f = 1; f < 8; ++f) {
        split.test.insert(split.test.end(), folds[f].begin(), folds[f].end());
    }
    std::sort(split.adaptation.begin(), split.adaptation.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

}  // namespace fsrec::data
