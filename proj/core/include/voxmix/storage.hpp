#pragma once

// On-disk case store and NIfTI-1 ingestion.
//
// One directory per case:
//   meta.json        manifest (written last; its presence marks a complete case)
//   <modality>.f32   little-endian IEEE-754 float32, canonical voxel order
//   label.u8         one unsigned byte per voxel (class code)
//   soft_label.f32   optional; k float32 planes, one per class, channel-major

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "voxmix/core_types.hpp"
#include "voxmix/mixers.hpp"

namespace voxmix {

inline constexpr int kCaseFormatVersion = 1;
inline constexpr const char* kManifestName = "meta.json";

struct FileEntry {
  std::string name;
  std::string file;
  std::string sha256;
  std::uint64_t bytes = 0;

  friend bool operator==(const FileEntry&, const FileEntry&) = default;
};

struct CaseManifest {
  int format_version = kCaseFormatVersion;
  std::string case_id;
  Dims shape{};
  Spacing spacing{};
  LabelScheme scheme;
  std::vector<FileEntry> modalities;
  std::optional<FileEntry> label;
  std::optional<FileEntry> soft_label;
  nlohmann::json lineage;  // null for original cases
  std::vector<std::string> notes;
};

nlohmann::json to_json(const CaseManifest& m);
/// Throws FormatError on a malformed or unknown-version manifest.
CaseManifest manifest_from_json(const nlohmann::json& j);

nlohmann::json scheme_to_json(const LabelScheme& s);
LabelScheme scheme_from_json(const nlohmann::json& j);
nlohmann::json lineage_to_json(const Lineage& l);

/// Case ids become directory names: [A-Za-z0-9._-]+, not "." or "..".
void validate_case_id(const std::string& id);

/// Writes `c` into `dir` (created if needed). Throws DataError on I/O failure.
CaseManifest write_case(const CaseBundle& c, const std::filesystem::path& dir,
                        const nlohmann::json& lineage = nullptr,
                        const std::vector<std::string>& notes = {});

/// Writes a synthetic case: mixed modalities, its argmax hard label and the
/// soft label. `extra_lineage` is merged over the mixer's lineage record.
CaseManifest write_case(const SyntheticCase& s, const std::string& case_id,
                        const std::filesystem::path& dir,
                        const nlohmann::json& extra_lineage = nullptr);

CaseManifest read_manifest(const std::filesystem::path& dir);

/// Fully validated case. Throws ChecksumError, FormatError, InvalidLabelCode.
CaseBundle read_case(const std::filesystem::path& dir);

struct LabelRecord {
  std::string case_id;
  SegLabel label;
  Spacing spacing;
};

/// Only the manifest and label file; enough for evaluation.
LabelRecord read_case_label(const std::filesystem::path& dir);

/// Sub-directories of `root` holding a manifest, sorted by name.
std::vector<std::filesystem::path> list_case_dirs(const std::filesystem::path& root);

struct NiftiHeader {
  Dims shape{};
  Spacing spacing{};
  int datatype = 0;
  double vox_offset = 352.0;
  double scl_slope = 0.0;
  double scl_inter = 0.0;
  bool byte_swapped = false;
};

/// Reads the 348-byte NIfTI-1 header of a .nii or .nii.gz file.
/// Throws FormatError on bad magic, unsupported datatype or dimensions.
NiftiHeader read_nifti_header(const std::filesystem::path& path);

/// uint8, int16, uint16 and float32 data; scl_slope/scl_inter applied when
/// set to anything but the identity.
Volume import_nifti_volume(const std::filesystem::path& path);

/// Integral voxel values taken as class codes under `scheme`.
SegLabel import_nifti_label(const std::filesystem::path& path,
                            const LabelScheme& scheme = LabelScheme::brats());

}  // namespace voxmix
