#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "compactfold/enumeration.hpp"
#include "compactfold/lattice.hpp"

namespace compactfold {

// Little-endian: "HPTH", u16 version, u8 Lx Ly Lz, u16 N, u64 count; then
// count records of N site bytes.
inline constexpr std::uint16_t kArchiveVersion = 1;
inline constexpr std::size_t kArchiveHeaderSize = 19;

struct ArchiveHeader {
  std::array<int, 3> dims{};
  int record_width = 0;
  std::uint64_t count = 0;
};

std::array<std::uint8_t, kArchiveHeaderSize> encode_archive_header(const ArchiveHeader& header);

struct PathArchive {
  ArchiveHeader header;
  std::vector<std::uint8_t> bytes;  // count * record_width

  std::span<const Site> record(std::size_t i) const {
    return {bytes.data() + i * header.record_width, static_cast<std::size_t>(header.record_width)};
  }
};

// Throws DataError for a bad header, truncated record or invalid record; the
// message names the offending record index.
PathArchive read_archive(std::istream& in);
PathArchive read_archive(const std::filesystem::path& path);

void write_archive(std::ostream& out, const Lattice& lattice, std::span<const std::vector<Site>> paths);

// Streams records into `<path>.partial` and renames it to `path` on commit().
// The partial file is created on first use unless rewind() reopens it.
class ArchiveWriter {
 public:
  ArchiveWriter(std::filesystem::path path, const Lattice& lattice);
  ~ArchiveWriter() = default;

  ArchiveWriter(const ArchiveWriter&) = delete;
  ArchiveWriter& operator=(const ArchiveWriter&) = delete;

  void append(std::span<const Site> path);
  void append_bytes(std::span<const std::uint8_t> records);
  // Reopens an existing partial file, keeping its first `records` records.
  void rewind(std::uint64_t records);
  std::uint64_t count() const { return count_; }
  const std::filesystem::path& partial_path() const { return partial_; }
  void flush();
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path partial_;
  ArchiveHeader header_;
  std::ofstream out_;
  std::uint64_t count_ = 0;

  void ensure_open();
};

// Enumeration visitor that writes every structure to an archive, in seed order.
class ArchiveVisitor : public PathVisitor {
 public:
  explicit ArchiveVisitor(ArchiveWriter& writer, int record_width)
      : writer_(&writer), width_(record_width) {}

  std::string tag() const override { return "archive"; }
  std::unique_ptr<PathVisitor> fresh() const override;
  void visit(std::span<const Site> path) override;
  void merge(PathVisitor& other) override;
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

 private:
  explicit ArchiveVisitor(int record_width) : writer_(nullptr), width_(record_width) {}

  ArchiveWriter* writer_;  // null for per-seed buffers
  int width_;
  std::vector<std::uint8_t> buffer_;
};

}  // namespace compactfold
