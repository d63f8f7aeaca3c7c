#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace motcap {

// Lowercase, strip punctuation, split on whitespace.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        const unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (c == '\'' || std::ispunct(c)) {
            continue;  // drop punctuation, keep the word intact ("person's" -> "persons")
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

class Vocabulary {
public:
    static constexpr int pad_id = 0;
    static constexpr int bos_id = 1;
    static constexpr int eos_id = 2;
    static constexpr int unk_id = 3;

    Vocabulary() { words_ = {"<pad>", "<bos>", "<eos>", "<unk>"}; rebuild_index(); }

    // Word ids are assigned in sorted order after the specials, so the
    // mapping depends only on the vocabulary set, not insertion order.
    static Vocabulary build(const std::vector<std::vector<std::string>>& captions) {
        std::vector<std::string> unique;
        for (const auto& caption : captions)
            for (const auto& tok : caption) unique.push_back(tok);
        std::sort(unique.begin(), unique.end());
        unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
        Vocabulary v;
        for (auto& w : unique) v.words_.push_back(w);
        v.rebuild_index();
        return v;
    }

    static Vocabulary from_words(std::vector<std::string> words_after_specials) {
        Vocabulary v;
        for (auto& w : words_after_specials) v.words_.push_back(std::move(w));
        v.rebuild_index();
        return v;
    }

    int size() const { return static_cast<int>(words_.size()); }

    int id(const std::string& word) const {
        auto it = index_.find(word);
        return it == index_.end() ? unk_id : it->second;
    }

    const std::string& word(int id) const {
        if (id < 0 || id >= size()) {
            throw std::invalid_argument("vocabulary: id " + std::to_string(id) + " out of range [0," +
                                        std::to_string(size()) + ")");
        }
        return words_[id];
    }

    bool is_special(int id) const { return id >= 0 && id < 4; }

    std::vector<int> encode(const std::vector<std::string>& tokens) const {
        std::vector<int> ids;
        ids.reserve(tokens.size());
        for (const auto& t : tokens) ids.push_back(id(t));
        return ids;
    }

    std::vector<std::string> decode(const std::vector<int>& ids, bool strip_specials = true) const {
        std::vector<std::string> tokens;
        for (int i : ids) {
            if (strip_specials && is_special(i)) continue;
            tokens.push_back(word(i));
        }
        return tokens;
    }

    // Words after the 4 specials, for serialization.
    std::vector<std::string> regular_words() const {
        return std::vector<std::string>(words_.begin() + 4, words_.end());
    }

private:
    void rebuild_index() {
        index_.clear();
        for (int i = 0; i < size(); ++i) index_[words_[i]] = i;
    }

    std::vector<std::string> words_;
    std::map<std::string, int> index_;
};

}  // namespace motcap
