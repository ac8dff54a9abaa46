#pragma once

#include <string>

namespace vface {

// Writes content through a temp file + rename so readers never observe a
// partially written file. Throws IoError on failure.
void write_file_atomic(const std::string& path, const std::string& content);

// "%.9g" formatting used by all emitted CSVs.
std::string format_g9(double v);

}  // namespace vface
