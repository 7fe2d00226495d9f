#include "fpnn/ingest/manifest.hpp"

#include <filesystem>

#include "fpnn/common/binary_io.hpp"
#include "fpnn/common/error.hpp"
#include "fpnn/common/text.hpp"

namespace fpnn::ingest {

std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::string& base_dir) {
  std::vector<ManifestEntry> entries;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cols = split(lines[i], '\t');
    if (cols.size() != 2) throw ParseError(i + 1, "expected 'path<TAB>label'");
    const auto label = parse_int(trim(cols[1]));
    if (!label || *label < 0) throw ParseError(i + 1, "label must be a non-negative integer");
    const std::filesystem::path rel(std::string(trim(cols[0])));
    if (rel.empty()) throw ParseError(i + 1, "empty path");
    const auto full = rel.is_absolute() ? rel : std::filesystem::path(base_dir) / rel;
    entries.push_back({full.lexically_normal().string(), static_cast<int>(*label)});
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  const auto base = std::filesystem::path(path).parent_path().string();
  return parse_manifest(read_file_text(path), base.empty() ? "." : base);
}

std::string format_manifest(const std::vector<std::pair<std::string, int>>& rows) {
  std::string out;
  for (const auto& [p, label] : rows) out += p + "\t" + std::to_string(label) + "\n";
  return out;
}

}  // namespace fpnn::ingest
