#include "compactfold/io.hpp"

#include <fmt/format.h>

#include "compactfold/error.hpp"

namespace compactfold {

namespace fs = std::filesystem;

void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& write,
                      bool binary) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write {}", tmp.string()));
    write(out);
    out.flush();
    if (!out) throw Error(fmt::format("write to {} failed", tmp.string()));
  }
  fs::rename(tmp, path);
}

std::ifstream open_input(const fs::path& path, bool binary) {
  if (!fs::exists(path)) throw UsageError(fmt::format("file not found: {}", path.string()));
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw UsageError(fmt::format("cannot open {}", path.string()));
  return in;
}

}  // namespace compactfold
