#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace sana::text {

bool is_valid_utf8(std::string_view bytes);

/// Unicode NFC. Throws Error(EncodingError) on ill-formed UTF-8.
std::string nfc(std::string_view text);

/// Replaces every run of Unicode white space with one U+0020 and trims both ends.
std::string collapse_whitespace(std::string_view text);

struct NormalizeOptions {
  bool normalize_alef = true;    // أ إ آ -> ا
  bool strip_diacritics = true;  // harakat, tanween, shadda, sukun, dagger alef
  bool strip_tatweel = true;     // U+0640
};

/// NFC, optional Arabic orthographic folding, whitespace collapse. Idempotent.
std::string normalize(std::string_view text, const NormalizeOptions& options = {});

struct Token {
  std::string surface;
  std::string stem;  // equals surface unless light stemming ran

  friend bool operator==(const Token&, const Token&) = default;
};

/// Splits on white space and on every code point that is not an Arabic or
/// Latin letter or a decimal digit. Combining marks stay attached to the
/// token they follow.
std::vector<Token> tokenize(std::string_view text);

/// Strips at most one prefix from {وال بال كال فال لل ال و} and then at most one
/// suffix from {ها ان ات ون ين ية ه ة ي}, longest candidate first. A candidate is
/// only removed if at least three letters remain.
std::string light_stem(std::string_view token);

using StopwordSet = std::unordered_set<std::string>;

/// Drops tokens whose stem or surface is in `stopwords`.
std::vector<Token> remove_stopwords(std::vector<Token> tokens, const StopwordSet& stopwords);

/// Built-in list of Arabic function words (prepositions, pronouns, particles).
std::vector<std::string> default_stopwords();

/// One entry per line, UTF-8; text after '#' is ignored, blank lines skipped.
std::vector<std::string> load_stopwords(const std::filesystem::path& path);

struct PipelineConfig {
  bool light_stem = false;
  NormalizeOptions normalize;
  std::vector<std::string> stopwords = default_stopwords();
};

/// normalize -> tokenize -> [light_stem] -> remove_stopwords.
///
/// Stop-word entries are normalized with the same options as documents when
/// the pipeline is built, so "إلى" in the list still matches "الى" in text
/// once alef folding is on.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  std::vector<Token> process(std::string_view text) const;

  /// Convenience: the stems of process(text).
  std::vector<std::string> stems(std::string_view text) const;

  const PipelineConfig& config() const { return config_; }
  const StopwordSet& stopwords() const { return stopwords_; }

 private:
  PipelineConfig config_;
  StopwordSet stopwords_;
};

}  // namespace sana::text
