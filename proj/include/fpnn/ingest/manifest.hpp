#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fpnn::ingest {

struct ManifestEntry {
  std::string path;  // resolved against the manifest's directory
  int label = 0;
};

/// "relative/path<TAB>label" per line. Blank lines are skipped; anything
/// else malformed is a ParseError.
std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::string& base_dir);

std::vector<ManifestEntry> load_manifest(const std::string& path);

std::string format_manifest(const std::vector<std::pair<std::string, int>>& rows);

}  // namespace fpnn::ingest
