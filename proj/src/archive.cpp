#include "compactfold/archive.hpp"

#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "compactfold/conformation.hpp"
#include "compactfold/error.hpp"

namespace compactfold {

namespace {

constexpr char kMagic[4] = {'H', 'P', 'T', 'H'};
constexpr std::size_t kCountOffset = 11;

void put_le(std::uint8_t* out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_le(const std::uint8_t* in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t{in[i]} << (8 * i);
  return v;
}

ArchiveHeader header_for(const Lattice& lattice) {
  return {lattice.dims(), lattice.site_count(), 0};
}

}  // namespace

std::array<std::uint8_t, kArchiveHeaderSize> encode_archive_header(const ArchiveHeader& header) {
  std::array<std::uint8_t, kArchiveHeaderSize> out{};
  std::memcpy(out.data(), kMagic, 4);
  put_le(out.data() + 4, kArchiveVersion, 2);
  for (int a = 0; a < 3; ++a) out[6 + a] = static_cast<std::uint8_t>(header.dims[a]);
  put_le(out.data() + 9, static_cast<std::uint64_t>(header.record_width), 2);
  put_le(out.data() + kCountOffset, header.count, 8);
  return out;
}

PathArchive read_archive(std::istream& in) {
  std::array<std::uint8_t, kArchiveHeaderSize> raw{};
  in.read(reinterpret_cast<char*>(raw.data()), raw.size());
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw DataError("archive header truncated");
  if (std::memcmp(raw.data(), kMagic, 4) != 0) throw DataError("not a path archive (bad magic)");
  const auto version = get_le(raw.data() + 4, 2);
  if (version != kArchiveVersion) throw DataError(fmt::format("unsupported archive version {}", version));

  PathArchive archive;
  auto& h = archive.header;
  for (int a = 0; a < 3; ++a) h.dims[a] = raw[6 + a];
  h.record_width = static_cast<int>(get_le(raw.data() + 9, 2));
  h.count = get_le(raw.data() + kCountOffset, 8);
  if (h.dims[0] < 1 || h.dims[1] < 1 || h.dims[2] < 1)
    throw DataError("archive header has a zero dimension");
  const Lattice lattice(h.dims[0], h.dims[1], h.dims[2]);
  if (h.record_width != lattice.site_count()) {
    throw DataError(fmt::format("archive record width {} does not match the {}-site lattice",
                                h.record_width, lattice.site_count()));
  }

  const auto width = static_cast<std::size_t>(h.record_width);
  std::vector<std::uint8_t> all;
  all.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(h.count, 1 << 20)) * width);
  for (std::uint64_t i = 0; i < h.count; ++i) {
    std::uint8_t record[kMaxSites];
    in.read(reinterpret_cast<char*>(record), static_cast<std::streamsize>(width));
    if (in.gcount() != static_cast<std::streamsize>(width))
      throw DataError(fmt::format("archive record {} truncated", i));
    for (std::size_t p = 0; p < width; ++p) {
      if (record[p] >= lattice.site_count()) {
        throw DataError(fmt::format("archive record {}: site byte {} at position {} out of range", i,
                                    record[p], p));
      }
    }
    const auto report = validate_conformation(std::span<const Site>(record, width), lattice);
    if (!report.valid())
      throw DataError(fmt::format("archive record {}: {}", i, report.violations.front().message));
    all.insert(all.end(), record, record + width);
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw DataError(fmt::format("archive has bytes past its {} records", h.count));
  archive.bytes = std::move(all);
  return archive;
}

PathArchive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot open archive {}", path.string()));
  return read_archive(in);
}

void write_archive(std::ostream& out, const Lattice& lattice, std::span<const std::vector<Site>> paths) {
  ArchiveHeader h = header_for(lattice);
  h.count = paths.size();
  const auto raw = encode_archive_header(h);
  out.write(reinterpret_cast<const char*>(raw.data()), raw.size());
  for (const auto& p : paths) {
    if (static_cast<int>(p.size()) != h.record_width)
      throw DataError(fmt::format("path of length {} in a {}-byte archive", p.size(), h.record_width));
    out.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size()));
  }
}

ArchiveWriter::ArchiveWriter(std::filesystem::path path, const Lattice& lattice)
    : path_(std::move(path)), header_(header_for(lattice)) {
  partial_ = path_;
  partial_ += ".partial";
}

void ArchiveWriter::ensure_open() {
  if (out_.is_open()) return;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(partial_, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(fmt::format("cannot write {}", partial_.string()));
  const auto raw = encode_archive_header(header_);
  out_.write(reinterpret_cast<const char*>(raw.data()), raw.size());
  count_ = 0;
}

void ArchiveWriter::rewind(std::uint64_t records) {
  const std::uint64_t size = kArchiveHeaderSize + records * header_.record_width;
  if (!std::filesystem::exists(partial_) || std::filesystem::file_size(partial_) < size) {
    throw DataError(fmt::format("cannot resume archive: {} is missing or shorter than {} records",
                                partial_.string(), records));
  }
  out_.close();
  std::filesystem::resize_file(partial_, size);
  out_.open(partial_, std::ios::binary | std::ios::in | std::ios::out);
  if (!out_) throw Error(fmt::format("cannot reopen {}", partial_.string()));
  out_.seekp(0, std::ios::end);
  count_ = records;
}

void ArchiveWriter::append(std::span<const Site> path) {
  if (static_cast<int>(path.size()) != header_.record_width)
    throw DataError(fmt::format("path of length {} in a {}-byte archive", path.size(), header_.record_width));
  append_bytes(path);
}

void ArchiveWriter::append_bytes(std::span<const std::uint8_t> records) {
  ensure_open();
  out_.write(reinterpret_cast<const char*>(records.data()), static_cast<std::streamsize>(records.size()));
  count_ += records.size() / header_.record_width;
}

void ArchiveWriter::flush() {
  ensure_open();
  out_.flush();
  if (!out_) throw Error(fmt::format("write to {} failed", partial_.string()));
}

void ArchiveWriter::commit() {
  ensure_open();
  std::uint8_t raw[8];
  put_le(raw, count_, 8);
  out_.seekp(kCountOffset);
  out_.write(reinterpret_cast<const char*>(raw), 8);
  out_.close();
  if (!out_) throw Error(fmt::format("write to {} failed", partial_.string()));
  std::filesystem::rename(partial_, path_);
}

std::unique_ptr<PathVisitor> ArchiveVisitor::fresh() const {
  return std::unique_ptr<PathVisitor>(new ArchiveVisitor(width_));
}

void ArchiveVisitor::visit(std::span<const Site> path) {
  if (writer_) {
    writer_->append(path);
  } else {
    buffer_.insert(buffer_.end(), path.begin(), path.end());
  }
}

void ArchiveVisitor::merge(PathVisitor& other) {
  auto* o = dynamic_cast<ArchiveVisitor*>(&other);
  if (!o) throw std::logic_error("merging visitors of different kinds");
  if (writer_) {
    writer_->append_bytes(o->buffer_);
  } else {
    buffer_.insert(buffer_.end(), o->buffer_.begin(), o->buffer_.end());
  }
  o->buffer_.clear();
}

void ArchiveVisitor::save(std::ostream& out) const {
  if (writer_) writer_->flush();
  fmt::print(out, "records {}\n", writer_ ? writer_->count() : 0);
}

void ArchiveVisitor::load(std::istream& in) {
  std::string word;
  std::uint64_t records = 0;
  if (!(in >> word >> records) || word != "records") throw DataError("checkpoint: malformed archive section");
  if (writer_) writer_->rewind(records);
}

}  // namespace compactfold
