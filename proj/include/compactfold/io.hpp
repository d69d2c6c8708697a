#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>

namespace compactfold {

// Writes through a sibling temporary file and renames it into place, so
// readers never see a half-written file. Creates parent directories.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& write, bool binary = false);

// Opens a file for reading or throws UsageError naming the path.
std::ifstream open_input(const std::filesystem::path& path, bool binary = false);

}  // namespace compactfold
