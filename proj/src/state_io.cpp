#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "erld/detail/checksum.hpp"
#include "erld/error.hpp"
#include "erld/pipeline.hpp"

namespace erld {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kMagic = "ERLDST01";
constexpr std::string_view kManifest = "manifest.json";

[[noreturn]] void corrupt(const std::string& what) {
  throw StateError(StateError::Reason::corruption, what);
}

class Writer {
 public:
  explicit Writer(std::string_view section) {
    buf_.append(kMagic);
    u32(ResolutionState::kFormatVersion);
    str(section);
  }

  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void str(std::string_view s) {
    u64(s.size());
    buf_.append(s);
  }
  template <typename Set>
  void strings(const Set& set) {
    u64(set.size());
    for (const auto& s : set) str(s);
  }
  void doc(const Document& d) {
    str(d.id);
    strings(d.types);
    u64(d.attrs.size());
    for (const auto& [name, values] : d.attrs) {
      str(name);
      strings(values);
    }
  }

  [[nodiscard]] const std::string& bytes() const noexcept { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string bytes, std::string_view section, std::string name)
      : buf_(std::move(bytes)), name_(std::move(name)) {
    if (buf_.compare(0, kMagic.size(), kMagic) != 0) corrupt(name_ + ": bad magic");
    pos_ = kMagic.size();
    const auto version = u32();
    if (version != ResolutionState::kFormatVersion) {
      throw StateError(StateError::Reason::version,
                       name_ + ": format version " + std::to_string(version) + ", expected " +
                           std::to_string(ResolutionState::kFormatVersion));
    }
    if (str() != section) corrupt(name_ + ": unexpected section");
  }

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(buf_[pos_++])} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(buf_[pos_++])} << (8 * i);
    return v;
  }
  std::uint64_t count() {
    const auto n = u64();
    // Every element takes at least one length prefix.
    if (n > (buf_.size() - pos_)) corrupt(name_ + ": implausible element count");
    return n;
  }
  std::string str() {
    const auto n = u64();
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  IdSet strings() {
    IdSet out;
    for (auto n = count(); n > 0; --n) out.insert(out.end(), str());
    return out;
  }
  Document doc() {
    Document d;
    d.id = str();
    d.types = strings();
    for (auto n = count(); n > 0; --n) {
      auto name = str();
      d.attrs.emplace(std::move(name), strings());
    }
    return d;
  }
  void finish() const {
    if (pos_ != buf_.size()) corrupt(name_ + ": trailing bytes");
  }

 private:
  void need(std::uint64_t n) const {
    if (n > buf_.size() - pos_) corrupt(name_ + ": truncated");
  }

  std::string buf_;
  std::size_t pos_ = 0;
  std::string name_;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StateError(StateError::Reason::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StateError(StateError::Reason::io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StateError(StateError::Reason::io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw StateError(StateError::Reason::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

template <typename Map>
void write_string_map(Writer& w, const Map& m) {
  w.u64(m.size());
  for (const auto& [k, v] : m) {
    w.str(k);
    w.str(v);
  }
}

template <typename Map>
void write_set_map(Writer& w, const Map& m) {
  w.u64(m.size());
  for (const auto& [k, v] : m) {
    w.str(k);
    w.strings(v);
  }
}

std::map<std::string, std::string, std::less<>> read_string_map(Reader& r) {
  std::map<std::string, std::string, std::less<>> m;
  for (auto n = r.count(); n > 0; --n) {
    auto k = r.str();
    m.emplace(std::move(k), r.str());
  }
  return m;
}

std::map<std::string, IdSet, std::less<>> read_set_map(Reader& r) {
  std::map<std::string, IdSet, std::less<>> m;
  for (auto n = r.count(); n > 0; --n) {
    auto k = r.str();
    m.emplace(std::move(k), r.strings());
  }
  return m;
}

}  // namespace

void save_state(const ResolutionState& st, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StateError(StateError::Reason::io, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::pair<std::string, std::string>> files;

  {
    Writer w("documents");
    w.u64(st.indexes.store.size());
    for (const auto& [id, d] : st.indexes.store) w.doc(d);
    files.emplace_back("documents.bin", w.bytes());
  }
  {
    Writer w("inverted");
    write_set_map(w, st.indexes.inverted);
    files.emplace_back("inverted.bin", w.bytes());
  }
  {
    Writer w("lsh");
    write_set_map(w, st.lsh);
    files.emplace_back("lsh.bin", w.bytes());
  }
  {
    Writer w("tokens");
    w.strings(st.dictionary.words());
    files.emplace_back("tokens.bin", w.bytes());
  }
  {
    Writer w("entities");
    w.u64(st.entities.size());
    for (const auto& [id, e] : st.entities) {
      w.str(e.id);
      w.strings(e.members);
      w.doc(e.merged);
    }
    files.emplace_back("entities.bin", w.bytes());
  }
  {
    Writer w("doc_entity");
    write_string_map(w, st.doc_entity);
    files.emplace_back("doc_entity.bin", w.bytes());
  }
  {
    Writer w("traversal");
    write_set_map(w, st.traversal);
    files.emplace_back("traversal.bin", w.bytes());
  }
  {
    Writer w("tombstones");
    write_string_map(w, st.tombstones);
    files.emplace_back("tombstones.bin", w.bytes());
  }
  {
    Writer w("pair_cache");
    auto entries = st.cache.entries();
    w.u64(st.cache.capacity());
    w.u64(entries.size());
    for (const auto& e : entries) {
      w.str(e.pair_key);
      w.u8(e.matched ? 1 : 0);
    }
    files.emplace_back("pair_cache.bin", w.bytes());
  }

  nlohmann::json manifest;
  manifest["format"] = "erld-state";
  manifest["version"] = ResolutionState::kFormatVersion;
  manifest["schema"] = st.schema.to_json();
  manifest["match"] = st.match_spec;
  manifest["traversal"] = to_json(st.traversal_config);
  manifest["lsh"] = to_json(st.lsh_params);
  manifest["schema_hash"] = st.schema_hash;
  manifest["match_hash"] = st.match_hash;
  manifest["files"] = nlohmann::json::object();
  for (const auto& [name, bytes] : files) {
    write_file(dir / name, bytes);
    manifest["files"][name] = {{"bytes", bytes.size()},
                               {"crc32", detail::hex32(detail::crc32_of(bytes))}};
  }
  // The manifest goes last: a crash before this point leaves the old
  // manifest, whose checksums no longer match, so the load fails loudly.
  write_file(dir / kManifest, manifest.dump(2) + "\n");
}

ResolutionState load_state(const fs::path& dir) {
  if (!fs::exists(dir / kManifest)) {
    throw StateError(StateError::Reason::io, "no state manifest in " + dir.string());
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / kManifest));
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("manifest: ") + e.what());
  }

  ResolutionState st;
  std::map<std::string, std::string, std::less<>> files;
  try {
    if (manifest.value("format", std::string()) != "erld-state") corrupt("manifest: not an erld state");
    const auto version = manifest.at("version").get<std::uint32_t>();
    if (version != ResolutionState::kFormatVersion) {
      throw StateError(StateError::Reason::version,
                       "state format version " + std::to_string(version) + ", expected " +
                           std::to_string(ResolutionState::kFormatVersion));
    }
    st.schema = SchemaConfig::from_json(manifest.at("schema"));
    st.match_spec = manifest.at("match");
    st.traversal_config = traversal_config_from_json(manifest.at("traversal"));
    st.lsh_params = lsh_params_from_json(manifest.at("lsh"));
    st.schema_hash = manifest.at("schema_hash").get<std::string>();
    st.match_hash = manifest.at("match_hash").get<std::string>();
    for (const auto& [name, meta] : manifest.at("files").items()) {
      if (!fs::exists(dir / name)) corrupt(name + ": listed in the manifest but missing");
      auto bytes = read_file(dir / name);
      if (bytes.size() != meta.at("bytes").get<std::size_t>()) corrupt(name + ": size mismatch");
      if (detail::hex32(detail::crc32_of(bytes)) != meta.at("crc32").get<std::string>()) {
        corrupt(name + ": checksum mismatch");
      }
      files.emplace(name, std::move(bytes));
    }
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("manifest: ") + e.what());
  } catch (const ConfigError& e) {
    corrupt(std::string("manifest: ") + e.what());
  }
  if (st.schema.fingerprint() != st.schema_hash) corrupt("manifest: schema hash mismatch");
  if (st.config().match_fingerprint() != st.match_hash) corrupt("manifest: match hash mismatch");

  auto open = [&](const std::string& name, std::string_view section) {
    auto it = files.find(name);
    if (it == files.end()) corrupt("manifest does not list " + name);
    return Reader(std::move(it->second), section, name);
  };

  {
    auto r = open("documents.bin", "documents");
    for (auto n = r.count(); n > 0; --n) {
      try {
        st.indexes.store.add(r.doc());
      } catch (const InputError& e) {
        corrupt(std::string("documents.bin: ") + e.what());
      }
    }
    r.finish();
  }
  {
    auto r = open("inverted.bin", "inverted");
    for (auto& [token, ids] : read_set_map(r)) {
      for (const auto& id : ids) st.indexes.inverted.add_posting(token, id);
    }
    r.finish();
  }
  {
    auto r = open("lsh.bin", "lsh");
    for (const auto& [bucket, ids] : read_set_map(r)) st.lsh.add(bucket, ids);
    r.finish();
  }
  {
    auto r = open("tokens.bin", "tokens");
    std::vector<std::string> words;
    for (auto n = r.count(); n > 0; --n) words.push_back(r.str());
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (st.dictionary.intern(words[i]) != i) corrupt("tokens.bin: duplicate word");
    }
    r.finish();
  }
  {
    auto r = open("entities.bin", "entities");
    for (auto n = r.count(); n > 0; --n) {
      Entity e;
      e.id = r.str();
      e.members = r.strings();
      e.merged = r.doc();
      auto id = e.id;
      st.entities.emplace(std::move(id), std::move(e));
    }
    r.finish();
  }
  {
    auto r = open("doc_entity.bin", "doc_entity");
    st.doc_entity = read_string_map(r);
    r.finish();
  }
  {
    auto r = open("traversal.bin", "traversal");
    st.traversal = read_set_map(r);
    r.finish();
  }
  {
    auto r = open("tombstones.bin", "tombstones");
    st.tombstones = read_string_map(r);
    r.finish();
  }
  {
    auto r = open("pair_cache.bin", "pair_cache");
    const auto capacity = r.u64();
    std::vector<PairCache::Entry> entries;
    for (auto n = r.count(); n > 0; --n) {
      PairCache::Entry e;
      e.pair_key = r.str();
      e.matched = r.u8() != 0;
      entries.push_back(std::move(e));
    }
    r.finish();
    if (capacity == 0) corrupt("pair_cache.bin: zero capacity");
    st.cache.assign(capacity, std::move(entries));
  }

  st.check_invariants();
  return st;
}

StateLock::StateLock(fs::path dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StateError(StateError::Reason::io, "cannot create " + dir.string() + ": " + ec.message());
  file_ = dir / "LOCK";
  const int fd = ::open(file_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw StateError(StateError::Reason::locked,
                       "state " + dir.string() + " is locked by another run (remove " +
                           file_.string() + " if no run is active)");
    }
    throw StateError(StateError::Reason::io, "cannot create " + file_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

StateLock::~StateLock() {
  std::error_code ec;
  fs::remove(file_, ec);
}

}  // namespace erld
