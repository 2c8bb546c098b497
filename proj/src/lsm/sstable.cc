// Copyright 2026 The dlsm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lsm/sstable.h"

#include <algorithm>

#include "common/coding.h"

namespace dlsm {

namespace {

constexpr size_t kIndexEntryFixed = 4 + 8 + 4;
constexpr size_t kSectionFixed = 12;  // bloom: probes+bits+crc; index: n+crc+maxlen

size_t BloomSectionSize(size_t n, int bits_per_key) {
  return kSectionFixed + BloomFilter::BitsFor(n, bits_per_key) / 8;
}

void AppendEntry(std::string* dst, const Entry& e) {
  PutBytes(dst, e.key);
  PutFixed64(dst, e.seq);
  PutFixed8(dst, static_cast<uint8_t>(e.type));
  PutBytes(dst, e.is_tombstone() ? std::string_view() : e.value);
}

Status CheckCrc(std::string_view covered, uint32_t stored, const char* what) {
  if (Crc32(covered) != stored) {
    return Status(Code::kChecksumMismatch,
                  std::string(what) + " checksum mismatch");
  }
  return Status::OK();
}

Result<BloomFilter> DecodeBloomSection(std::string_view s) {
  if (s.size() < kSectionFixed) return CorruptionError("short bloom section");
  uint32_t stored = DecodeFixed32(s.data() + s.size() - 4);
  DLSM_RETURN_IF_ERROR(CheckCrc(s.substr(0, s.size() - 4), stored, "bloom"));
  Decoder d(s.substr(0, s.size() - 4));
  uint32_t probes = 0, nbits = 0;
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&probes));
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&nbits));
  if (nbits % 8 != 0 || d.remaining() != nbits / 8) {
    return CorruptionError("bloom size mismatch");
  }
  return BloomFilter(nbits, probes, std::string(d.rest()));
}

struct IndexSection {
  std::vector<BlockHandle> blocks;
  std::string max_key;
};

Result<IndexSection> DecodeIndexSection(std::string_view s) {
  if (s.size() < kSectionFixed) return CorruptionError("short index section");
  uint32_t stored = DecodeFixed32(s.data() + s.size() - 4);
  DLSM_RETURN_IF_ERROR(CheckCrc(s.substr(0, s.size() - 4), stored, "index"));
  Decoder d(s.substr(0, s.size() - 4));
  uint32_t n = 0;
  DLSM_RETURN_IF_ERROR(d.GetFixed32(&n));
  IndexSection out;
  if (n == 0) return CorruptionError("table has no blocks");
  out.blocks.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    BlockHandle h;
    DLSM_RETURN_IF_ERROR(d.GetBytes(&h.first_key));
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&h.offset));
    DLSM_RETURN_IF_ERROR(d.GetFixed32(&h.length));
    out.blocks.push_back(std::move(h));
  }
  DLSM_RETURN_IF_ERROR(d.GetBytes(&out.max_key));
  if (!d.empty()) return CorruptionError("trailing bytes in index");
  return out;
}

}  // namespace

size_t EncodedEntrySize(const Entry& e) {
  return 4 + e.key.size() + 8 + 1 + 4 +
         (e.is_tombstone() ? 0 : e.value.size());
}

SstSummary SstContents::Summary(uint64_t file_size) const {
  return SstSummary{index.empty() ? std::string() : index.front().first_key,
                    max_key,
                    footer.min_seq,
                    footer.max_seq,
                    footer.entry_count,
                    file_size};
}

std::string EncodeFooter(const SstFooter& f) {
  std::string out;
  out.reserve(kSstFooterSize);
  PutFixed64(&out, f.index_offset);
  PutFixed32(&out, f.index_len);
  PutFixed64(&out, f.bloom_offset);
  PutFixed32(&out, f.bloom_len);
  PutFixed64(&out, f.min_seq);
  PutFixed64(&out, f.max_seq);
  PutFixed64(&out, f.entry_count);
  PutFixed32(&out, f.format_version);
  PutFixed32(&out, 0);  // reserved
  PutFixed32(&out, Crc32(out));
  PutFixed32(&out, kSstMagic);
  return out;
}

Result<SstFooter> DecodeFooter(std::string_view b) {
  if (b.size() != kSstFooterSize) return CorruptionError("bad footer size");
  if (DecodeFixed32(b.data() + 60) != kSstMagic) {
    return CorruptionError("bad table magic");
  }
  DLSM_RETURN_IF_ERROR(
      CheckCrc(b.substr(0, 56), DecodeFixed32(b.data() + 56), "footer"));
  SstFooter f;
  f.index_offset = DecodeFixed64(b.data());
  f.index_len = DecodeFixed32(b.data() + 8);
  f.bloom_offset = DecodeFixed64(b.data() + 12);
  f.bloom_len = DecodeFixed32(b.data() + 20);
  f.min_seq = DecodeFixed64(b.data() + 24);
  f.max_seq = DecodeFixed64(b.data() + 32);
  f.entry_count = DecodeFixed64(b.data() + 40);
  f.format_version = DecodeFixed32(b.data() + 48);
  if (f.format_version != kSstFormatVersion) {
    return CorruptionError("unsupported table format version");
  }
  return f;
}

// ---------------------------------------------------------------------------
// SstBuilder

size_t SstBuilder::FinalSize(size_t data_bytes, size_t index_entry_bytes,
                             size_t max_key_len, size_t n) const {
  return data_bytes + BloomSectionSize(n, options_.bloom_bits_per_key) +
         kSectionFixed + index_entry_bytes + max_key_len + kSstFooterSize;
}

size_t SstBuilder::CurrentSize() const {
  size_t data = data_.size();
  size_t idx = index_entry_bytes_;
  if (!block_.empty()) {
    data += block_.size() + kBlockTrailerSize;
    idx += kIndexEntryFixed + block_first_key_.size();
  }
  return FinalSize(data, idx, last_key_.size(), keys_.size());
}

size_t SstBuilder::SizeIfAdded(const Entry& e) const {
  const size_t esz = EncodedEntrySize(e);
  size_t data = data_.size();
  size_t idx = index_entry_bytes_;
  if (!block_.empty() && block_.size() + esz > options_.block_size_bytes) {
    data += block_.size() + kBlockTrailerSize;
    idx += kIndexEntryFixed + block_first_key_.size();
    data += esz + kBlockTrailerSize;
    idx += kIndexEntryFixed + e.key.size();
  } else if (!block_.empty()) {
    data += block_.size() + esz + kBlockTrailerSize;
    idx += kIndexEntryFixed + block_first_key_.size();
  } else {
    data += esz + kBlockTrailerSize;
    idx += kIndexEntryFixed + e.key.size();
  }
  const bool new_key = num_entries_ == 0 || e.key != last_key_;
  return FinalSize(data, idx, e.key.size(), keys_.size() + (new_key ? 1 : 0));
}

Status SstBuilder::Add(const Entry& e) {
  if (finished_) return InternalError("builder already finished");
  DLSM_RETURN_IF_ERROR(ValidateKey(e.key));
  if (num_entries_ > 0) {
    if (e.key == last_key_ && e.seq == last_seq_) {
      return CorruptionError("duplicate (key, seq) in table input");
    }
    if (!EntryBefore(last_key_, last_seq_, e.key, e.seq)) {
      return InvalidArgumentError("table entries out of order");
    }
  }
  const size_t esz = EncodedEntrySize(e);
  if (!block_.empty() && block_.size() + esz > options_.block_size_bytes) {
    CloseBlock();
  }
  if (block_.empty()) block_first_key_ = e.key;
  AppendEntry(&block_, e);
  ++block_entries_;
  if (keys_.empty() || keys_.back() != e.key) keys_.push_back(e.key);
  last_key_ = e.key;
  last_seq_ = e.seq;
  min_seq_ = num_entries_ == 0 ? e.seq : std::min(min_seq_, e.seq);
  max_seq_ = std::max(max_seq_, e.seq);
  ++num_entries_;
  return Status::OK();
}

void SstBuilder::CloseBlock() {
  PutFixed32(&block_, block_entries_);
  PutFixed32(&block_, Crc32(block_));
  BlockHandle h{block_first_key_, data_.size(),
                static_cast<uint32_t>(block_.size())};
  index_entry_bytes_ += kIndexEntryFixed + h.first_key.size();
  index_.push_back(std::move(h));
  data_ += block_;
  block_.clear();
  block_entries_ = 0;
}

Result<EncodedSst> SstBuilder::Finish() {
  if (finished_) return InternalError("builder already finished");
  if (num_entries_ == 0) return InvalidArgumentError("empty table");
  if (!block_.empty()) CloseBlock();
  finished_ = true;

  std::vector<std::string_view> key_views(keys_.begin(), keys_.end());
  BloomFilter bloom =
      BloomFilter::Build(key_views, options_.bloom_bits_per_key);

  SstFooter footer;
  footer.bloom_offset = data_.size();
  std::string bloom_section;
  PutFixed32(&bloom_section, bloom.num_probes());
  PutFixed32(&bloom_section, bloom.num_bits());
  bloom_section += bloom.bits();
  PutFixed32(&bloom_section, Crc32(bloom_section));
  footer.bloom_len = static_cast<uint32_t>(bloom_section.size());

  std::string index_section;
  PutFixed32(&index_section, static_cast<uint32_t>(index_.size()));
  for (const auto& h : index_) {
    PutBytes(&index_section, h.first_key);
    PutFixed64(&index_section, h.offset);
    PutFixed32(&index_section, h.length);
  }
  PutBytes(&index_section, last_key_);
  PutFixed32(&index_section, Crc32(index_section));
  footer.index_offset = footer.bloom_offset + footer.bloom_len;
  footer.index_len = static_cast<uint32_t>(index_section.size());
  footer.min_seq = min_seq_;
  footer.max_seq = max_seq_;
  footer.entry_count = num_entries_;

  EncodedSst out;
  out.bytes = std::move(data_);
  out.bytes += bloom_section;
  out.bytes += index_section;
  out.bytes += EncodeFooter(footer);
  out.summary = SstSummary{index_.front().first_key, last_key_, min_seq_,
                           max_seq_, num_entries_, out.bytes.size()};
  return out;
}

Result<EncodedSst> EncodeSst(std::span<const Entry> entries,
                             const SstOptions& options) {
  SstBuilder b(options);
  for (const auto& e : entries) DLSM_RETURN_IF_ERROR(b.Add(e));
  return b.Finish();
}

// ---------------------------------------------------------------------------
// Decoding

Result<std::vector<Entry>> DecodeBlock(std::string_view block) {
  if (block.size() < kBlockTrailerSize) return CorruptionError("short block");
  uint32_t stored = DecodeFixed32(block.data() + block.size() - 4);
  std::string_view covered = block.substr(0, block.size() - 4);
  DLSM_RETURN_IF_ERROR(CheckCrc(covered, stored, "block"));
  uint32_t count = DecodeFixed32(covered.data() + covered.size() - 4);
  Decoder d(covered.substr(0, covered.size() - 4));
  std::vector<Entry> out;
  out.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    Entry e;
    uint8_t type = 0;
    DLSM_RETURN_IF_ERROR(d.GetBytes(&e.key));
    DLSM_RETURN_IF_ERROR(d.GetFixed64(&e.seq));
    DLSM_RETURN_IF_ERROR(d.GetFixed8(&type));
    if (type > 1) return CorruptionError("bad value type");
    e.type = static_cast<ValueType>(type);
    DLSM_RETURN_IF_ERROR(d.GetBytes(&e.value));
    out.push_back(std::move(e));
  }
  if (!d.empty()) return CorruptionError("trailing bytes in block");
  return out;
}

Result<SstContents> DecodeSst(std::string_view bytes) {
  if (bytes.size() < kSstFooterSize) return CorruptionError("table too small");
  SstContents c;
  DLSM_ASSIGN_OR_RETURN(c.footer,
                        DecodeFooter(bytes.substr(bytes.size() - kSstFooterSize)));
  const SstFooter& f = c.footer;
  if (f.bloom_offset + f.bloom_len != f.index_offset ||
      f.index_offset + f.index_len != bytes.size() - kSstFooterSize) {
    return CorruptionError("inconsistent section offsets");
  }
  DLSM_ASSIGN_OR_RETURN(c.bloom,
                        DecodeBloomSection(bytes.substr(f.bloom_offset, f.bloom_len)));
  DLSM_ASSIGN_OR_RETURN(IndexSection idx,
                        DecodeIndexSection(bytes.substr(f.index_offset, f.index_len)));
  c.index = std::move(idx.blocks);
  c.max_key = std::move(idx.max_key);

  uint64_t expect_offset = 0;
  for (const auto& h : c.index) {
    if (h.offset != expect_offset || h.offset + h.length > f.bloom_offset) {
      return CorruptionError("block index does not tile the data region");
    }
    DLSM_ASSIGN_OR_RETURN(std::vector<Entry> block,
                          DecodeBlock(bytes.substr(h.offset, h.length)));
    if (block.empty() || block.front().key != h.first_key) {
      return CorruptionError("block first key mismatch");
    }
    for (auto& e : block) {
      if (!c.entries.empty()) {
        const Entry& prev = c.entries.back();
        if (!EntryBefore(prev, e)) return CorruptionError("entries out of order");
      }
      c.entries.push_back(std::move(e));
    }
    expect_offset = h.offset + h.length;
  }
  if (expect_offset != f.bloom_offset) {
    return CorruptionError("data region length mismatch");
  }
  if (c.entries.size() != f.entry_count) {
    return CorruptionError("entry count mismatch");
  }
  if (c.entries.back().key != c.max_key) {
    return CorruptionError("max key mismatch");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Sources and readers

Result<std::string> StringSource::Read(uint64_t offset, uint64_t len) const {
  if (offset > bytes_->size() || len > bytes_->size() - offset) {
    return OutOfRangeError("read past end of object");
  }
  return bytes_->substr(offset, len);
}

Result<std::shared_ptr<TableReader>> TableReader::Open(
    std::shared_ptr<const RandomAccessSource> source) {
  const uint64_t size = source->size();
  if (size < kSstFooterSize) return CorruptionError("table too small");
  DLSM_ASSIGN_OR_RETURN(std::string footer_bytes,
                        source->Read(size - kSstFooterSize, kSstFooterSize));
  DLSM_ASSIGN_OR_RETURN(SstFooter f, DecodeFooter(footer_bytes));
  if (f.bloom_offset + f.bloom_len != f.index_offset ||
      f.index_offset + f.index_len != size - kSstFooterSize) {
    return CorruptionError("inconsistent section offsets");
  }
  DLSM_ASSIGN_OR_RETURN(
      std::string meta,
      source->Read(f.bloom_offset, uint64_t{f.bloom_len} + f.index_len));
  std::shared_ptr<TableReader> t(new TableReader());
  DLSM_ASSIGN_OR_RETURN(t->bloom_, DecodeBloomSection(std::string_view(meta).substr(0, f.bloom_len)));
  DLSM_ASSIGN_OR_RETURN(IndexSection idx,
                        DecodeIndexSection(std::string_view(meta).substr(f.bloom_len)));
  t->index_ = std::move(idx.blocks);
  t->max_key_ = std::move(idx.max_key);
  t->footer_ = f;
  t->source_ = std::move(source);
  return t;
}

Result<std::vector<Entry>> TableReader::ReadBlock(size_t block) const {
  const BlockHandle& h = index_.at(block);
  block_reads_.fetch_add(1, std::memory_order_relaxed);
  DLSM_ASSIGN_OR_RETURN(std::string bytes, source_->Read(h.offset, h.length));
  return DecodeBlock(bytes);
}

Result<std::optional<VersionedValue>> TableReader::Get(
    std::string_view key) const {
  if (key < min_key() || key > max_key_) return std::optional<VersionedValue>();
  if (!bloom_.MayContain(key)) return std::optional<VersionedValue>();
  // First block whose first key is >= key; the previous block may hold the
  // newest versions of key at its tail.
  auto it = std::lower_bound(
      index_.begin(), index_.end(), key,
      [](const BlockHandle& h, std::string_view k) { return h.first_key < k; });
  size_t b = static_cast<size_t>(it - index_.begin());
  if (b > 0) --b;
  for (; b < index_.size(); ++b) {
    if (index_[b].first_key > key) break;
    DLSM_ASSIGN_OR_RETURN(std::vector<Entry> entries, ReadBlock(b));
    for (auto& e : entries) {
      if (e.key == key) {
        return std::optional<VersionedValue>(
            VersionedValue{e.seq, e.type, std::move(e.value)});
      }
      if (e.key > key) return std::optional<VersionedValue>();
    }
  }
  return std::optional<VersionedValue>();
}

std::unique_ptr<TableIterator> TableReader::NewIterator() const {
  return std::make_unique<TableIterator>(shared_from_this());
}

TableIterator::TableIterator(std::shared_ptr<const TableReader> table)
    : table_(std::move(table)) {
  block_ = table_->index().size();
}

void TableIterator::LoadBlock(size_t block) {
  block_ = block;
  pos_ = 0;
  block_entries_.clear();
  if (block >= table_->index().size()) return;
  auto r = table_->ReadBlock(block);
  if (!r.ok()) {
    status_ = r.status();
    return;
  }
  block_entries_ = std::move(r).value();
}

void TableIterator::SkipEmpty() {
  while (status_.ok() && pos_ >= block_entries_.size() &&
         block_ + 1 < table_->index().size()) {
    LoadBlock(block_ + 1);
  }
}

void TableIterator::SeekToFirst() {
  LoadBlock(0);
  SkipEmpty();
}

void TableIterator::Seek(std::string_view target) {
  const auto& index = table_->index();
  auto it = std::lower_bound(
      index.begin(), index.end(), target,
      [](const BlockHandle& h, std::string_view k) { return h.first_key < k; });
  size_t b = static_cast<size_t>(it - index.begin());
  if (b > 0) --b;
  LoadBlock(b);
  while (status_.ok()) {
    while (pos_ < block_entries_.size() &&
           std::string_view(block_entries_[pos_].key) < target) {
      ++pos_;
    }
    if (pos_ < block_entries_.size() || block_ + 1 >= index.size()) break;
    LoadBlock(block_ + 1);
  }
}

void TableIterator::Next() {
  ++pos_;
  SkipEmpty();
}

}  // namespace dlsm
