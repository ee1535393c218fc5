// SPDX-License-Identifier: Apache-2.0
//
// Porter, "An algorithm for suffix stripping", Program 14(3), 1980. Steps follow the
// original description; variable names track its m() / *v* / *d / *o conditions.
#include <string>
#include <string_view>

#include "calconf/quality.hpp"

namespace calconf {
namespace {

class Stemmer {
 public:
  explicit Stemmer(std::string_view word) : b_(word) {}

  std::string run() {
    if (b_.size() <= 2) return b_;
    step1ab();
    step1c();
    step2();
    step3();
    step4();
    step5();
    return b_;
  }

 private:
  bool is_consonant(std::size_t i) const {
    switch (b_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !is_consonant(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b_[0, stem_end).
  int measure(std::size_t stem_end) const {
    int n = 0;
    std::size_t i = 0;
    while (i < stem_end && is_consonant(i)) ++i;
    while (i < stem_end) {
      while (i < stem_end && !is_consonant(i)) ++i;
      if (i >= stem_end) break;
      while (i < stem_end && is_consonant(i)) ++i;
      ++n;
    }
    return n;
  }

  bool has_vowel(std::size_t stem_end) const {
    for (std::size_t i = 0; i < stem_end; ++i) {
      if (!is_consonant(i)) return true;
    }
    return false;
  }

  bool double_consonant(std::size_t end) const {
    return end >= 2 && b_[end - 1] == b_[end - 2] && is_consonant(end - 1);
  }

  // *o: stem ends cvc where the final c is not w, x or y.
  bool cvc(std::size_t end) const {
    if (end < 3) return false;
    if (!is_consonant(end - 1) || is_consonant(end - 2) || !is_consonant(end - 3)) return false;
    const char ch = b_[end - 1];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends_with(std::string_view suffix) const {
    return b_.size() >= suffix.size() &&
           std::string_view(b_).substr(b_.size() - suffix.size()) == suffix;
  }

  std::size_t stem_len(std::string_view suffix) const { return b_.size() - suffix.size(); }

  void replace_suffix(std::string_view suffix, std::string_view replacement) {
    b_.replace(b_.size() - suffix.size(), suffix.size(), replacement);
  }

  // Replace when m(stem) > min_measure. Returns true when the suffix matched at all.
  bool rule(std::string_view suffix, std::string_view replacement, int min_measure) {
    if (!ends_with(suffix)) return false;
    if (measure(stem_len(suffix)) > min_measure) replace_suffix(suffix, replacement);
    return true;
  }

  void step1ab() {
    if (ends_with("sses")) {
      replace_suffix("sses", "ss");
    } else if (ends_with("ies")) {
      replace_suffix("ies", "i");
    } else if (ends_with("ss")) {
      // unchanged
    } else if (ends_with("s")) {
      replace_suffix("s", "");
    }

    bool trailing = false;
    if (ends_with("eed")) {
      if (measure(stem_len("eed")) > 0) replace_suffix("eed", "ee");
    } else if (ends_with("ed") && has_vowel(stem_len("ed"))) {
      replace_suffix("ed", "");
      trailing = true;
    } else if (ends_with("ing") && has_vowel(stem_len("ing"))) {
      replace_suffix("ing", "");
      trailing = true;
    }
    if (!trailing) return;

    if (ends_with("at")) {
      replace_suffix("at", "ate");
    } else if (ends_with("bl")) {
      replace_suffix("bl", "ble");
    } else if (ends_with("iz")) {
      replace_suffix("iz", "ize");
    } else if (double_consonant(b_.size())) {
      const char ch = b_.back();
      if (ch != 'l' && ch != 's' && ch != 'z') b_.pop_back();
    } else if (measure(b_.size()) == 1 && cvc(b_.size())) {
      b_ += 'e';
    }
  }

  void step1c() {
    if (ends_with("y") && has_vowel(stem_len("y"))) b_.back() = 'i';
  }

  void step2() {
    static constexpr std::pair<std::string_view, std::string_view> kRules[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},  {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},    {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},  {"biliti", "ble"},
    };
    for (const auto& [suffix, replacement] : kRules) {
      if (rule(suffix, replacement, 0)) return;
    }
  }

  void step3() {
    static constexpr std::pair<std::string_view, std::string_view> kRules[] = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    };
    for (const auto& [suffix, replacement] : kRules) {
      if (rule(suffix, replacement, 0)) return;
    }
  }

  void step4() {
    static constexpr std::string_view kSuffixes[] = {
        "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
        "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
    };
    // Longest match first within shared endings ("ement" before "ment" before "ent").
    for (std::string_view suffix : kSuffixes) {
      if (!ends_with(suffix)) continue;
      const std::size_t stem = stem_len(suffix);
      if (suffix == "ion" && !(stem > 0 && (b_[stem - 1] == 's' || b_[stem - 1] == 't'))) return;
      if (measure(stem) > 1) b_.resize(stem);
      return;
    }
  }

  void step5() {
    if (ends_with("e")) {
      const int m = measure(stem_len("e"));
      if (m > 1 || (m == 1 && !cvc(stem_len("e")))) b_.pop_back();
    }
    if (measure(b_.size()) > 1 && double_consonant(b_.size()) && b_.back() == 'l') b_.pop_back();
  }

  std::string b_;
};

}  // namespace

std::string porter_stem(std::string_view word) { return Stemmer(word).run(); }

}  // namespace calconf
