#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "test_support.hpp"
#include "voxmix/checksum.hpp"
#include "voxmix/error.hpp"
#include "voxmix/report_io.hpp"
#include "voxmix/storage.hpp"

using namespace voxmix;
using namespace voxmix::testing;
namespace fs = std::filesystem;

namespace {

void expect_same_case(const CaseBundle& a, const CaseBundle& b) {
  EXPECT_EQ(a.case_id(), b.case_id());
  ASSERT_EQ(a.modalities().size(), b.modalities().size());
  for (std::size_t m = 0; m < a.modalities().size(); ++m) {
    EXPECT_EQ(a.modalities()[m].name, b.modalities()[m].name);
    const auto x = a.modalities()[m].volume.data(), y = b.modalities()[m].volume.data();
    ASSERT_EQ(x.size(), y.size());
    EXPECT_EQ(std::memcmp(x.data(), y.data(), x.size_bytes()), 0);
    EXPECT_EQ(a.modalities()[m].volume.spacing().z, b.modalities()[m].volume.spacing().z);
  }
  EXPECT_EQ(a.label(), b.label());
  EXPECT_EQ(a.soft_label(), b.soft_label());
}

void flip_byte(const fs::path& p, std::size_t offset) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char c;
  f.get(c);
  f.seekp(static_cast<std::streamoff>(offset));
  f.put(static_cast<char>(c ^ 0x5a));
}

}  // namespace

TEST(Checksum, KnownVector) {
  const std::string abc = "abc";
  EXPECT_EQ(sha256_hex(std::as_bytes(std::span(abc.data(), abc.size()))),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(CaseStore, RoundTripIsBitIdentical) {
  TempDir tmp;
  std::mt19937_64 g(1);
  const auto c = random_case("case_01", random_seg({7, 6, 5}, g), g, {1.0, 0.5, 2.5});
  write_case(c, tmp / "case_01", nlohmann::json{{"k", 1}});
  expect_same_case(c, read_case(tmp / "case_01"));
  const auto m = read_manifest(tmp / "case_01");
  EXPECT_EQ(m.lineage["k"], 1);
  EXPECT_EQ(manifest_from_json(to_json(m)).modalities.size(), 4u);
  const auto lab = read_case_label(tmp / "case_01");
  EXPECT_EQ(lab.label, c.label());
  EXPECT_EQ(lab.spacing.y, 0.5);
}

TEST(CaseStore, SoftLabelsRoundTrip) {
  TempDir tmp;
  std::mt19937_64 g(2);
  const auto p1 = random_patch({4, 3, 5}, g, "a"), p2 = random_patch({4, 3, 5}, g, "b");
  const auto s = tensormixup(p1, p2, random_tensor({4, 3, 5}, g));
  write_case(s, "mix-0001", tmp / "mix-0001", nlohmann::json{{"seed", 3}});
  const auto back = read_case(tmp / "mix-0001");
  ASSERT_TRUE(back.soft_label().has_value());
  EXPECT_EQ(*back.soft_label(), s.soft_label);
  EXPECT_EQ(back.label(), decode_argmax(s.soft_label, s.scheme, s.shape()));
  const auto m = read_manifest(tmp / "mix-0001");
  EXPECT_EQ(m.lineage["method"], "tensormixup");
  EXPECT_EQ(m.lineage["source_i"], "a");
  EXPECT_EQ(m.lineage["seed"], 3);
}

TEST(CaseStore, DetectsCorruption) {
  TempDir tmp;
  std::mt19937_64 g(3);
  const auto c = random_case("c", random_seg({4, 4, 4}, g), g);
  write_case(c, tmp / "c");
  flip_byte(tmp / "c" / "T2.f32", 17);
  EXPECT_THROW(read_case(tmp / "c"), ChecksumError);

  write_case(c, tmp / "d");
  fs::resize_file(tmp / "d" / "label.u8", 10);
  EXPECT_THROW(read_case(tmp / "d"), FormatError);

  write_case(c, tmp / "e");
  auto j = to_json(read_manifest(tmp / "e"));
  j["format_version"] = 99;
  std::ofstream(tmp / "e" / kManifestName) << j.dump();
  EXPECT_THROW(read_case(tmp / "e"), FormatError);

  fs::create_directories(tmp / "f");
  std::ofstream(tmp / "f" / kManifestName) << "{not json";
  EXPECT_THROW(read_manifest(tmp / "f"), FormatError);
}

TEST(CaseStore, ListsOnlyCommittedCases) {
  TempDir tmp;
  std::mt19937_64 g(4);
  write_case(random_case("b", random_seg({2, 2, 2}, g), g), tmp / "b");
  write_case(random_case("a", random_seg({2, 2, 2}, g), g), tmp / "a");
  fs::create_directories(tmp / "partial");
  const auto dirs = list_case_dirs(tmp.path());
  ASSERT_EQ(dirs.size(), 2u);
  EXPECT_EQ(dirs[0].filename(), "a");
}

TEST(CaseStore, CaseIdValidation) {
  EXPECT_NO_THROW(validate_case_id("BraTS19_2013_0_1"));
  EXPECT_THROW(validate_case_id(""), ConfigError);
  EXPECT_THROW(validate_case_id(".."), ConfigError);
  EXPECT_THROW(validate_case_id("a/b"), ConfigError);
}

TEST(Nifti, ImportsEachDatatypeAndCompression) {
  TempDir tmp;
  const Dims d{5, 4, 3};
  std::vector<std::uint8_t> u8(d.count());
  std::vector<std::int16_t> i16(d.count());
  std::vector<std::uint16_t> u16(d.count());
  std::vector<float> f32(d.count());
  for (std::size_t i = 0; i < d.count(); ++i) {
    u8[i] = static_cast<std::uint8_t>(i);
    i16[i] = static_cast<std::int16_t>(int(i) * 37 - 1000);
    u16[i] = static_cast<std::uint16_t>(i * 1000);
    f32[i] = 0.1f * float(i) - 2.0f;
  }
  write_nifti(tmp / "u8.nii", d, u8, 2, {1.0, 2.0, 3.0});
  write_nifti(tmp / "i16.nii.gz", d, i16, 4);
  write_nifti(tmp / "u16.nii", d, u16, 512);
  write_nifti(tmp / "f32.nii.gz", d, f32, 16);
  write_nifti(tmp / "scaled.nii", d, i16, 4, {}, 2.0f, 1.0f);

  const auto h = read_nifti_header(tmp / "u8.nii");
  EXPECT_EQ(h.shape, d);
  EXPECT_EQ(h.spacing.y, 2.0);
  EXPECT_EQ(h.datatype, 2);
  const auto a = import_nifti_volume(tmp / "u8.nii");
  const auto b = import_nifti_volume(tmp / "i16.nii.gz");
  const auto c = import_nifti_volume(tmp / "u16.nii");
  const auto f = import_nifti_volume(tmp / "f32.nii.gz");
  const auto s = import_nifti_volume(tmp / "scaled.nii");
  for (std::size_t i = 0; i < d.count(); ++i) {
    EXPECT_EQ(a[i], float(u8[i]));
    EXPECT_EQ(b[i], float(i16[i]));
    EXPECT_EQ(c[i], float(u16[i]));
    EXPECT_EQ(std::memcmp(&f.data()[i], &f32[i], 4), 0);
    EXPECT_EQ(s[i], 2.0f * float(i16[i]) + 1.0f);
  }
}

TEST(Nifti, LabelsAndErrors) {
  TempDir tmp;
  const Dims d{3, 2, 2};
  std::vector<std::uint8_t> codes{0, 1, 2, 4, 0, 0, 1, 1, 2, 2, 4, 4};
  write_nifti(tmp / "seg.nii.gz", d, codes, 2);
  const auto seg = import_nifti_label(tmp / "seg.nii.gz");
  EXPECT_EQ(std::vector<std::uint8_t>(seg.data().begin(), seg.data().end()), codes);

  codes[5] = 3;
  write_nifti(tmp / "bad.nii", d, codes, 2);
  EXPECT_THROW(import_nifti_label(tmp / "bad.nii"), InvalidLabelCode);

  std::vector<double> f64(d.count());
  write_nifti(tmp / "f64.nii", d, f64, 64);
  EXPECT_THROW(import_nifti_volume(tmp / "f64.nii"), FormatError);

  write_nifti(tmp / "magic.nii", d, codes, 2);
  flip_byte(tmp / "magic.nii", 345);
  EXPECT_THROW(read_nifti_header(tmp / "magic.nii"), FormatError);

  std::ofstream(tmp / "short.nii") << "tiny";
  EXPECT_THROW(read_nifti_header(tmp / "short.nii"), FormatError);
}

TEST(Nifti, ImportThenStoreIsExact) {
  TempDir tmp;
  std::mt19937_64 g(5);
  const Dims d{6, 5, 4};
  std::vector<float> f32(d.count());
  std::uniform_real_distribution<float> u(-1e3f, 1e3f);
  for (auto& v : f32) v = u(g);
  std::vector<std::uint8_t> codes(d.count(), 0);
  codes[7] = 4;
  write_nifti(tmp / "img.nii.gz", d, f32, 16);
  write_nifti(tmp / "seg.nii.gz", d, codes, 2);
  const CaseBundle c("n", {{"T1", import_nifti_volume(tmp / "img.nii.gz")}},
                     import_nifti_label(tmp / "seg.nii.gz"));
  write_case(c, tmp / "store" / "n");
  const auto back = read_case(tmp / "store" / "n");
  EXPECT_EQ(std::memcmp(back.modalities()[0].volume.data().data(), f32.data(), f32.size() * 4), 0);
  EXPECT_EQ(back.label()[7], 4);
}

TEST(Report, CsvRoundTripAndJson) {
  std::mt19937_64 g(6);
  const auto gt = random_seg({6, 6, 6}, g, 0.3);
  auto pred = random_seg({6, 6, 6}, g, 0.3);
  std::vector<MetricsReport> reports{evaluate_case(pred, gt, {}, "c1"),
                                     evaluate_case(SegLabel::background({6, 6, 6}, LabelScheme::brats()), gt, {}, "c2")};
  const auto csv = format_report_csv(reports);
  EXPECT_EQ(csv.substr(0, kReportCsvHeader.size()), kReportCsvHeader);
  const auto back = parse_report_csv(csv);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].regions[0].flags, reports[1].regions[0].flags);
  EXPECT_EQ(format_report_csv(back), csv);
  EXPECT_THROW(parse_report_csv("bad,header\n"), FormatError);
  const auto j = report_to_json(reports);
  EXPECT_EQ(j.size(), 6u);
  const auto sj = summary_to_json(aggregate_reports(reports));
  EXPECT_EQ(sj["cases"], 2);
}
