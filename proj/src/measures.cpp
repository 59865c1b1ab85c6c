#include "typedld/measures.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>

namespace typedld {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint32_t parse_count(std::string_view s) {
  std::uint32_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("invalid count '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

TypeAlphabet::TypeAlphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) throw PreconditionError("type alphabet must not be empty");
  for (const auto& s : symbols_) {
    if (!valid_label(s)) throw PreconditionError("invalid type label '" + s + "'");
  }
  std::sort(symbols_.begin(), symbols_.end());
  if (std::adjacent_find(symbols_.begin(), symbols_.end()) != symbols_.end()) {
    throw PreconditionError("type labels must be unique");
  }
}

bool TypeAlphabet::valid_label(std::string_view label) {
  if (label.empty()) return false;
  return std::all_of(label.begin(), label.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '.' || c == '-';
  });
}

const std::string& TypeAlphabet::label(TypeId t) const {
  if (index_of(t) >= symbols_.size()) throw PreconditionError("type id out of range");
  return symbols_[index_of(t)];
}

std::optional<TypeId> TypeAlphabet::find(std::string_view label) const {
  auto it = std::lower_bound(symbols_.begin(), symbols_.end(), label);
  if (it == symbols_.end() || *it != label) return std::nullopt;
  return TypeId(static_cast<std::uint32_t>(it - symbols_.begin()));
}

TypeId TypeAlphabet::id(std::string_view label) const {
  if (auto t = find(label)) return *t;
  throw ParseError("unknown type label '" + std::string(label) + "'");
}

CountingMeasure::CountingMeasure(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end());
  for (const auto& [t, c] : entries) {
    if (c == 0) continue;
    if (!counts_.empty() && counts_.back().first == t) {
      counts_.back().second += c;
    } else {
      counts_.emplace_back(t, c);
    }
  }
}

std::uint32_t CountingMeasure::count(TypeId t) const noexcept {
  auto it = std::lower_bound(counts_.begin(), counts_.end(), t,
                             [](const Entry& e, TypeId v) { return e.first < v; });
  return it != counts_.end() && it->first == t ? it->second : 0;
}

std::uint32_t CountingMeasure::total() const noexcept {
  std::uint32_t s = 0;
  for (const auto& [t, c] : counts_) s += c;
  return s;
}

std::string KeyCodec<TypeId>::encode(const TypeAlphabet& alph, TypeId k) { return alph.label(k); }

TypeId KeyCodec<TypeId>::decode(const TypeAlphabet& alph, std::string_view s) { return alph.id(s); }

void KeyCodec<TypeId>::labels(std::string_view s, std::set<std::string>& out) { out.emplace(s); }

std::string KeyCodec<TypePair>::encode(const TypeAlphabet& alph, const TypePair& k) {
  return alph.label(k.first) + ',' + alph.label(k.second);
}

TypePair KeyCodec<TypePair>::decode(const TypeAlphabet& alph, std::string_view s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw ParseError("type pair key must be 'a,b', got '" + std::string(s) + "'");
  return {alph.id(parts[0]), alph.id(parts[1])};
}

void KeyCodec<TypePair>::labels(std::string_view s, std::set<std::string>& out) {
  for (auto p : split(s, ',')) out.emplace(p);
}

std::string KeyCodec<CountingMeasure>::encode(const TypeAlphabet& alph, const CountingMeasure& k) {
  std::string out;
  for (const auto& [t, c] : k.entries()) {
    if (!out.empty()) out += ',';
    out += alph.label(t);
    out += ':';
    out += std::to_string(c);
  }
  return out;
}

CountingMeasure KeyCodec<CountingMeasure>::decode(const TypeAlphabet& alph, std::string_view s) {
  if (s.empty()) return {};
  std::vector<CountingMeasure::Entry> entries;
  TypeId prev{};
  for (auto item : split(s, ',')) {
    const auto colon = item.rfind(':');
    if (colon == std::string_view::npos) {
      throw ParseError("counting measure entry must be 'type:count', got '" + std::string(item) + "'");
    }
    const TypeId t = alph.id(item.substr(0, colon));
    const auto c = parse_count(item.substr(colon + 1));
    if (c == 0) throw ParseError("zero count in counting measure '" + std::string(s) + "'");
    if (!entries.empty() && !(prev < t)) {
      throw ParseError("counting measure '" + std::string(s) + "' is not in canonical order");
    }
    prev = t;
    entries.emplace_back(t, c);
  }
  return CountingMeasure(std::move(entries));
}

void KeyCodec<CountingMeasure>::labels(std::string_view s, std::set<std::string>& out) {
  if (s.empty()) return;
  for (auto item : split(s, ',')) {
    const auto colon = item.rfind(':');
    out.emplace(item.substr(0, colon));
  }
}

std::string KeyCodec<LocalityKey>::encode(const TypeAlphabet& alph, const LocalityKey& k) {
  return alph.label(k.type) + '|' + KeyCodec<CountingMeasure>::encode(alph, k.neighbors);
}

LocalityKey KeyCodec<LocalityKey>::decode(const TypeAlphabet& alph, std::string_view s) {
  const auto bar = s.find('|');
  if (bar == std::string_view::npos) {
    throw ParseError("locality key must be 'type|neighbours', got '" + std::string(s) + "'");
  }
  return {alph.id(s.substr(0, bar)), KeyCodec<CountingMeasure>::decode(alph, s.substr(bar + 1))};
}

void KeyCodec<LocalityKey>::labels(std::string_view s, std::set<std::string>& out) {
  const auto bar = s.find('|');
  out.emplace(s.substr(0, bar));
  if (bar != std::string_view::npos) KeyCodec<CountingMeasure>::labels(s.substr(bar + 1), out);
}

std::string KeyCodec<Degree>::encode(const TypeAlphabet&, Degree k) { return std::to_string(k); }

Degree KeyCodec<Degree>::decode(const TypeAlphabet&, std::string_view s) { return parse_count(s); }

std::string format_weight(double w) {
  if (std::isinf(w)) return w > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", w);
}

std::string format_weight(const Rational& w) {
  if (w.denominator() == 1) return std::to_string(w.numerator());
  return std::to_string(w.numerator()) + '/' + std::to_string(w.denominator());
}

Rational parse_rational(std::string_view s) {
  auto parse_int = [&](std::string_view t) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
      throw ParseError("invalid rational '" + std::string(s) + "'");
    }
    return v;
  };
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(s));
  const auto den = parse_int(s.substr(slash + 1));
  if (den == 0) throw ParseError("zero denominator in '" + std::string(s) + "'");
  return Rational(parse_int(s.substr(0, slash)), den);
}

namespace detail {

std::vector<std::pair<int, std::pair<std::string, std::string>>> split_tsv(std::string_view text) {
  std::vector<std::pair<int, std::pair<std::string, std::string>>> out;
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError("expected 'key<TAB>weight'", line_no);
    out.push_back({line_no, {std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))}});
  }
  return out;
}

double parse_weight(std::string_view s, int line) {
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size()) {
    throw ParseError("invalid weight '" + str + "'", line);
  }
  return v;
}

}  // namespace detail

}  // namespace typedld
