#pragma once

#include <string>
#include <string_view>

namespace pullbound {

// Shortest round-trip decimal form (to_chars); "nan"/"inf" pass through.
// Used for every number written into an artifact so that reruns and
// different worker counts stay byte-identical.
std::string format_double(double v);

std::string format_u64(unsigned long long v);

// Whole-file helpers; writes are atomic-ish (temp file + rename) so a
// concurrent reader never sees a torn artifact.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace pullbound
