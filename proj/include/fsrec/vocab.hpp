#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsrec {

/// Output vocabulary: letters plus the start-of-word and end-of-word
/// symbols.  Letter ids are 0-based; start and end take the last two slots.
/// num_letters is 26 for real data and can be smaller for test models.
struct Vocab {
    std::size_t num_letters = 26;

    std::size_t size() const { return num_letters + 2; }
    int start_id() const { return static_cast<int>(num_letters); }
    int end_id() const { return static_cast<int>(num_letters) + 1; }
    bool is_letter(int id) const { return id >= 0 && id < static_cast<int>(num_letters); }

    char letter_char(int id) const {
        if (!is_letter(id)) throw std::invalid_argument("vocab: id is not a letter");
        return static_cast<char>('A' + id);
    }

    int letter_id(char c) const {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
        int id = c - 'A';
        if (id < 0 || id >= static_cast<int>(num_letters)) return -1;
        return id;
    }

    std::string to_string(const std::vector<int>& ids) const {
        std::string s;
        s.reserve(ids.size());
        for (int id : ids) s += letter_char(id);
        return s;
    }

    std::vector<int> to_ids(const std::string& word) const {
        std::vector<int> ids;
        ids.reserve(word.size());
        for (char c : word) {
            int id = letter_id(c);
            if (id < 0) throw std::invalid_argument("vocab: invalid character '" + std::string(1, c) + "'");
            ids.push_back(id);
        }
        return ids;
    }
};

}  // namespace fsrec
