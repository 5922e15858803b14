#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kneadlab/error.hpp"

namespace kneadlab {

/// Position of a point relative to the critical point: left, at, right.
enum class Symbol : std::uint8_t { zero = 0, crit = 1, one = 2 };

constexpr char to_char(Symbol s) {
  switch (s) {
    case Symbol::zero: return '0';
    case Symbol::crit: return 'c';
    case Symbol::one: return '1';
  }
  return '?';
}

/// Finite word over {0, c, 1}.
class SymbolWord {
 public:
  SymbolWord() = default;
  explicit SymbolWord(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}
  SymbolWord(std::initializer_list<Symbol> symbols) : symbols_(symbols) {}

  /// Parses "01c1"-style text; any other character is rejected.
  static SymbolWord parse(std::string_view text) {
    std::vector<Symbol> out;
    out.reserve(text.size());
    for (char ch : text) {
      switch (ch) {
        case '0': out.push_back(Symbol::zero); break;
        case '1': out.push_back(Symbol::one); break;
        case 'c':
        case 'C': out.push_back(Symbol::crit); break;
        default:
          throw Error(ErrorCode::InvalidWord, "unexpected character '" + std::string(1, ch) +
                                                  "' in word \"" + std::string(text) + "\"");
      }
    }
    return SymbolWord(std::move(out));
  }

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  const std::vector<Symbol>& symbols() const { return symbols_; }
  auto begin() const { return symbols_.begin(); }
  auto end() const { return symbols_.end(); }

  void push_back(Symbol s) { symbols_.push_back(s); }

  bool contains_critical() const {
    return std::find(symbols_.begin(), symbols_.end(), Symbol::crit) != symbols_.end();
  }

  std::size_t count_ones() const {
    return std::size_t(std::count(symbols_.begin(), symbols_.end(), Symbol::one));
  }

  /// Length of the shortest block whose repetition gives this word.
  std::size_t root_length() const {
    const std::size_t n = size();
    for (std::size_t d = 1; d < n; ++d) {
      if (n % d != 0) continue;
      bool periodic = true;
      for (std::size_t i = d; i < n && periodic; ++i) periodic = symbols_[i] == symbols_[i - d];
      if (periodic) return d;
    }
    return n;
  }

  bool is_irreducible() const { return !empty() && root_length() == size(); }

  SymbolWord root() const {
    return SymbolWord(std::vector<Symbol>(symbols_.begin(), symbols_.begin() + long(root_length())));
  }

  SymbolWord power(std::size_t k) const {
    std::vector<Symbol> out;
    out.reserve(size() * k);
    for (std::size_t i = 0; i < k; ++i) out.insert(out.end(), symbols_.begin(), symbols_.end());
    return SymbolWord(std::move(out));
  }

  SymbolWord rotated(std::size_t shift) const {
    if (empty()) return *this;
    std::vector<Symbol> out(symbols_);
    std::rotate(out.begin(), out.begin() + long(shift % size()), out.end());
    return SymbolWord(std::move(out));
  }

  /// Lexicographically least rotation; the canonical name of a necklace.
  SymbolWord least_rotation() const {
    SymbolWord best = *this;
    for (std::size_t s = 1; s < size(); ++s) {
      SymbolWord r = rotated(s);
      if (r.symbols_ < best.symbols_) best = std::move(r);
    }
    return best;
  }

  std::string str() const {
    std::string out;
    out.reserve(size());
    for (Symbol s : symbols_) out.push_back(to_char(s));
    return out;
  }

  friend bool operator==(const SymbolWord&, const SymbolWord&) = default;
  friend auto operator<=>(const SymbolWord& a, const SymbolWord& b) { return a.symbols_ <=> b.symbols_; }

 private:
  std::vector<Symbol> symbols_;
};

/// Binary Lyndon words of exact length n (aperiodic necklace representatives), in
/// lexicographic order. Duval's generation algorithm.
inline std::vector<SymbolWord> lyndon_words(std::size_t n) {
  std::vector<SymbolWord> out;
  if (n == 0) return out;
  std::vector<int> w{-1};
  while (!w.empty()) {
    ++w.back();
    if (w.size() == n) {
      std::vector<Symbol> symbols;
      for (int b : w) symbols.push_back(b ? Symbol::one : Symbol::zero);
      out.emplace_back(std::move(symbols));
    }
    const std::size_t m = w.size();
    while (w.size() < n) w.push_back(w[w.size() - m]);
    while (!w.empty() && w.back() == 1) w.pop_back();
  }
  return out;
}

}  // namespace kneadlab
