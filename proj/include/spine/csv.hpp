#pragma once

#include <string>

namespace spine {

// Shortest decimal form that round-trips to the same double.
std::string csv_number(double v);

// Writes content to a temp file in the target directory and renames it into
// place, so readers never observe a truncated file.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace spine
