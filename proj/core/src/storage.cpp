#include "voxmix/storage.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>

#include "voxmix/checksum.hpp"
#include "voxmix/error.hpp"

namespace voxmix {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::byte> encode_f32(std::span<const float> values) {
  std::vector<std::byte> out(values.size() * 4);
  std::memcpy(out.data(), values.data(), out.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < out.size(); i += 4) {
      std::swap(out[i], out[i + 3]);
      std::swap(out[i + 1], out[i + 2]);
    }
  }
  return out;
}

std::vector<float> decode_f32(std::span<const std::byte> bytes) {
  std::vector<std::byte> tmp(bytes.begin(), bytes.end());
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < tmp.size(); i += 4) {
      std::swap(tmp[i], tmp[i + 3]);
      std::swap(tmp[i + 1], tmp[i + 2]);
    }
  }
  std::vector<float> out(tmp.size() / 4);
  std::memcpy(out.data(), tmp.data(), out.size() * 4);
  return out;
}

FileEntry write_blob(const fs::path& dir, const std::string& name, const std::string& file,
                     std::span<const std::byte> bytes) {
  const auto path = dir / file;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw DataError("write failed for " + path.string());
  return {name, file, sha256_hex(bytes), bytes.size()};
}

std::vector<std::byte> read_blob(const fs::path& dir, const FileEntry& entry) {
  const auto path = dir / entry.file;
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size != entry.bytes) {
    throw FormatError(path.string() + ": size " + std::to_string(size) + " but manifest says " +
                      std::to_string(entry.bytes));
  }
  std::vector<std::byte> bytes(size);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw DataError("read failed for " + path.string());
  if (sha256_hex(bytes) != entry.sha256) {
    throw ChecksumError("checksum mismatch for " + path.string());
  }
  return bytes;
}

void commit_manifest(const fs::path& dir, const CaseManifest& m) {
  const auto tmp = dir / (std::string(kManifestName) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw DataError("cannot write manifest in " + dir.string());
    out << to_json(m).dump(2) << '\n';
    if (!out) throw DataError("manifest write failed in " + dir.string());
  }
  fs::rename(tmp, dir / kManifestName);
}

json dims_json(const Dims& d) { return json::array({d.x, d.y, d.z}); }
json index_json(const Index3& d) { return json::array({d.x, d.y, d.z}); }

Dims dims_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected a 3-element array");
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>()};
}

json entry_json(const FileEntry& e) {
  return {{"name", e.name}, {"file", e.file}, {"sha256", e.sha256}, {"bytes", e.bytes}};
}

FileEntry entry_from(const json& j) {
  FileEntry e;
  e.name = j.value("name", "");
  e.file = j.at("file").get<std::string>();
  e.sha256 = j.at("sha256").get<std::string>();
  e.bytes = j.at("bytes").get<std::uint64_t>();
  if (e.file.find('/') != std::string::npos || e.file.find("..") != std::string::npos) {
    throw FormatError("manifest file name escapes the case directory: " + e.file);
  }
  return e;
}

json provenance_json(const PatchProvenance& p) {
  return {{"case_id", p.case_id},
          {"source_shape", dims_json(p.source_shape)},
          {"bbox", {{"lo", index_json(p.bbox.lo)}, {"hi", index_json(p.bbox.hi)}}},
          {"pad_low", dims_json(p.pad.low)},
          {"pad_high", dims_json(p.pad.high)},
          {"crop_offset", index_json(p.crop_offset)}};
}

}  // namespace

json scheme_to_json(const LabelScheme& s) {
  json regions = json::array();
  for (const auto& r : s.regions()) regions.push_back({{"name", r.name}, {"codes", r.codes}});
  return {{"class_codes", s.class_codes()}, {"class_names", s.class_names()}, {"regions", regions}};
}

LabelScheme scheme_from_json(const json& j) {
  std::vector<LabelRegion> regions;
  for (const auto& r : j.at("regions")) {
    regions.push_back({r.at("name").get<std::string>(), r.at("codes").get<std::vector<std::uint8_t>>()});
  }
  return LabelScheme(j.at("class_codes").get<std::vector<std::uint8_t>>(),
                     j.at("class_names").get<std::vector<std::string>>(), std::move(regions));
}

json lineage_to_json(const Lineage& l) {
  json j{{"method", std::string(to_string(l.method))}, {"source_i", l.case_i}, {"source_j", l.case_j}};
  if (l.alpha) j["alpha"] = *l.alpha;
  if (l.lambda) j["lambda"] = *l.lambda;
  if (l.source_i) j["patch_i"] = provenance_json(*l.source_i);
  if (l.source_j) j["patch_j"] = provenance_json(*l.source_j);
  if (l.window_origin) j["window_origin"] = *l.window_origin;
  if (l.cutmix_box) {
    j["cutmix_box"] = {{"lo", index_json(l.cutmix_box->lo)}, {"hi", index_json(l.cutmix_box->hi)}};
  }
  return j;
}

json to_json(const CaseManifest& m) {
  json mods = json::array();
  for (const auto& e : m.modalities) mods.push_back(entry_json(e));
  json j{{"format_version", m.format_version},
         {"case_id", m.case_id},
         {"shape", dims_json(m.shape)},
         {"spacing", {m.spacing.x, m.spacing.y, m.spacing.z}},
         {"scheme", scheme_to_json(m.scheme)},
         {"modalities", mods},
         {"lineage", m.lineage},
         {"notes", m.notes}};
  j["label"] = m.label ? entry_json(*m.label) : json(nullptr);
  j["soft_label"] = m.soft_label ? entry_json(*m.soft_label) : json(nullptr);
  return j;
}

CaseManifest manifest_from_json(const json& j) {
  try {
    CaseManifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kCaseFormatVersion) {
      throw FormatError("unknown case format version " + std::to_string(m.format_version));
    }
    m.case_id = j.at("case_id").get<std::string>();
    validate_case_id(m.case_id);
    m.shape = dims_from(j.at("shape"));
    const auto& sp = j.at("spacing");
    m.spacing = {sp.at(0).get<double>(), sp.at(1).get<double>(), sp.at(2).get<double>()};
    m.scheme = scheme_from_json(j.at("scheme"));
    for (const auto& e : j.at("modalities")) m.modalities.push_back(entry_from(e));
    if (j.contains("label") && !j["label"].is_null()) m.label = entry_from(j["label"]);
    if (j.contains("soft_label") && !j["soft_label"].is_null()) {
      m.soft_label = entry_from(j["soft_label"]);
    }
    m.lineage = j.value("lineage", json(nullptr));
    m.notes = j.value("notes", std::vector<std::string>{});
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

void validate_case_id(const std::string& id) {
  const bool ok = !id.empty() && id != "." && id != ".." &&
                  std::all_of(id.begin(), id.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' ||
                           c == '-';
                  });
  if (!ok) throw ConfigError("invalid case id '" + id + "'");
}

CaseManifest write_case(const CaseBundle& c, const fs::path& dir, const json& lineage,
                        const std::vector<std::string>& notes) {
  validate_case_id(c.case_id());
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  fs::remove(dir / kManifestName, ec);

  CaseManifest m;
  m.case_id = c.case_id();
  m.shape = c.shape();
  m.spacing = c.spacing();
  m.scheme = c.label().scheme();
  m.lineage = lineage;
  m.notes = notes;
  for (const auto& mod : c.modalities()) {
    validate_case_id(mod.name);
    m.modalities.push_back(write_blob(dir, mod.name, mod.name + ".f32", encode_f32(mod.volume.data())));
  }
  auto codes = c.label().data();
  m.label = write_blob(dir, "label", "label.u8", std::as_bytes(codes));
  if (c.soft_label()) {
    const auto& soft = *c.soft_label();
    const auto n = soft.rows(), k = soft.cols();
    std::vector<float> planes(n * k);
    auto rows = soft.data();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t cls = 0; cls < k; ++cls) planes[cls * n + i] = rows[i * k + cls];
    }
    m.soft_label = write_blob(dir, "soft_label", "soft_label.f32", encode_f32(planes));
  }
  commit_manifest(dir, m);
  return m;
}

CaseManifest write_case(const SyntheticCase& s, const std::string& case_id, const fs::path& dir,
                        const json& extra_lineage) {
  auto hard = decode_argmax(s.soft_label, s.scheme, s.shape());
  CaseBundle bundle(case_id, s.modalities, std::move(hard), s.soft_label);
  json lineage = lineage_to_json(s.lineage);
  if (extra_lineage.is_object()) lineage.update(extra_lineage);
  return write_case(bundle, dir, lineage, {"label.u8 is the argmax of soft_label.f32"});
}

CaseManifest read_manifest(const fs::path& dir) {
  const auto path = dir / kManifestName;
  std::ifstream in(path);
  if (!in) throw DataError("no manifest at " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

namespace {

SegLabel load_label(const fs::path& dir, const CaseManifest& m) {
  if (!m.label) throw FormatError(dir.string() + ": manifest lists no label");
  auto bytes = read_blob(dir, *m.label);
  if (bytes.size() != m.shape.count()) throw FormatError(dir.string() + ": label size mismatch");
  std::vector<std::uint8_t> codes(bytes.size());
  std::memcpy(codes.data(), bytes.data(), bytes.size());
  return SegLabel(m.shape, std::move(codes), m.scheme);
}

}  // namespace

CaseBundle read_case(const fs::path& dir) {
  const auto m = read_manifest(dir);
  std::vector<NamedVolume> mods;
  for (const auto& e : m.modalities) {
    auto bytes = read_blob(dir, e);
    if (bytes.size() != m.shape.count() * 4) {
      throw FormatError(dir.string() + ": " + e.file + " size does not match the shape");
    }
    mods.push_back({e.name, Volume(m.shape, m.spacing, decode_f32(bytes))});
  }
  auto label = load_label(dir, m);
  std::optional<OneHotMatrix> soft;
  if (m.soft_label) {
    const auto n = m.shape.count(), k = m.scheme.class_count();
    auto bytes = read_blob(dir, *m.soft_label);
    if (bytes.size() != n * k * 4) throw FormatError(dir.string() + ": soft label size mismatch");
    auto planes = decode_f32(bytes);
    std::vector<float> rows(n * k);
    for (std::size_t cls = 0; cls < k; ++cls) {
      for (std::size_t i = 0; i < n; ++i) rows[i * k + cls] = planes[cls * n + i];
    }
    soft = OneHotMatrix(n, k, std::move(rows));
  }
  return CaseBundle(m.case_id, std::move(mods), std::move(label), std::move(soft));
}

LabelRecord read_case_label(const fs::path& dir) {
  const auto m = read_manifest(dir);
  return {m.case_id, load_label(dir, m), m.spacing};
}

std::vector<fs::path> list_case_dirs(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw DataError("not a directory: " + root.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / kManifestName)) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace voxmix
