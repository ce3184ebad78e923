#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "magnav/grid_field.hpp"

namespace magnav {

/// Flat key=value document: one pair per line, '#' starts a comment, blank
/// lines ignored. Repeated keys are preserved in order.
struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

std::vector<KvEntry> parse_kv(const std::string& text);

/// SynthSpec document: extent, spacing, base_field, seed, and repeatable
/// `anomaly=cx,cy,amplitude,length_scale` lines.
SynthSpec parse_synth_spec(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temporary file in the same directory followed by a rename,
/// so a failed write never leaves a partial output file.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace magnav
