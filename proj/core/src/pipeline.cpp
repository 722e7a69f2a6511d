#include "voxmix/pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "voxmix/checksum.hpp"
#include "voxmix/error.hpp"
#include "voxmix/log.hpp"
#include "voxmix/mixers.hpp"
#include "voxmix/report_io.hpp"
#include "voxmix/roi_patch.hpp"
#include "voxmix/seg_metrics.hpp"
#include "voxmix/storage.hpp"

namespace voxmix {

namespace fs = std::filesystem;
using nlohmann::json;

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    loop();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

std::string numbered(std::string_view prefix, std::size_t i, int width = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return std::string(prefix) + buf;
}

void write_json_file(const fs::path& path, const json& j) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

void prepare_output(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory " + out.string() + ": " + ec.message());
}

std::vector<fs::path> require_cases(const fs::path& root) {
  if (!fs::is_directory(root)) throw DataError("input directory not found: " + root.string());
  auto dirs = list_case_dirs(root);
  if (dirs.empty()) throw DataError("no cases under " + root.string());
  return dirs;
}

struct Skip {
  std::string case_ref;
  std::string reason;
};

void log_skip(const Skip& s) {
  log::event(log::Level::Warn, "case_skipped", {{"case", s.case_ref}, {"reason", s.reason}});
}

json skips_json(const std::vector<Skip>& skips) {
  json a = json::array();
  for (const auto& s : skips) a.push_back({{"case", s.case_ref}, {"reason", s.reason}});
  return a;
}

// Loads every case in parallel; unreadable ones are reported, not fatal.
struct LoadedSet {
  std::vector<std::optional<CaseBundle>> cases;
  std::vector<fs::path> dirs;
  std::vector<Skip> skipped;
};

LoadedSet load_all(const fs::path& root, std::size_t workers) {
  LoadedSet s;
  s.dirs = require_cases(root);
  s.cases.resize(s.dirs.size());
  std::vector<std::optional<Skip>> errors(s.dirs.size());
  parallel_for(s.dirs.size(), workers, [&](std::size_t i) {
    try {
      s.cases[i] = read_case(s.dirs[i]);
    } catch (const DataError& e) {
      errors[i] = Skip{s.dirs[i].filename().string(), e.what()};
    }
  });
  for (auto& e : errors) {
    if (e) {
      log_skip(*e);
      s.skipped.push_back(std::move(*e));
    }
  }
  return s;
}

std::string_view crop_name(CropMode m) { return m == CropMode::Center ? "center" : "random"; }

}  // namespace

RunSummary run_preprocess(const PipelineConfig& cfg) {
  cfg.validate(Command::Preprocess);
  const auto dirs = require_cases(cfg.input);
  prepare_output(cfg.output);
  std::vector<std::optional<Skip>> errors(dirs.size());
  std::vector<std::string> ids(dirs.size());
  parallel_for(dirs.size(), cfg.workers, [&](std::size_t i) {
    try {
      const auto c = read_case(dirs[i]);
      std::vector<NamedVolume> mods;
      json degenerate = json::array();
      for (const auto& m : c.modalities()) {
        auto z = zscore_normalize(m.volume);
        if (z.degenerate) {
          degenerate.push_back(m.name);
          log::event(log::Level::Warn, "degenerate_modality", {{"case", c.case_id()}, {"modality", m.name}});
        }
        mods.push_back({m.name, std::move(z.volume)});
      }
      CaseBundle out(c.case_id(), std::move(mods), c.label(), c.soft_label());
      write_case(out, cfg.output / c.case_id(),
                 {{"preprocess", "zscore"}, {"source_case", c.case_id()}, {"degenerate_modalities", degenerate}});
      ids[i] = c.case_id();
    } catch (const DataError& e) {
      errors[i] = Skip{dirs[i].filename().string(), e.what()};
    }
  });
  RunSummary r;
  std::vector<Skip> skipped;
  json done = json::array();
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (errors[i]) {
      log_skip(*errors[i]);
      skipped.push_back(*errors[i]);
    } else {
      done.push_back(ids[i]);
    }
  }
  r.processed = done.size();
  r.skipped = skipped.size();
  write_json_file(cfg.output / "preprocess.json",
                  {{"command", "preprocess"}, {"cases", done}, {"skipped", skips_json(skipped)}});
  if (r.processed == 0) throw DataError("preprocess: every case failed");
  return r;
}

RunSummary run_mix_batch(const PipelineConfig& cfg_in) {
  PipelineConfig cfg = cfg_in;
  cfg.mix.seed = cfg.seed;
  cfg.validate(Command::Mix);
  auto loaded = load_all(cfg.input, cfg.workers);

  std::vector<const CaseBundle*> eligible;
  std::vector<fs::path> eligible_dirs;
  for (std::size_t i = 0; i < loaded.cases.size(); ++i) {
    if (!loaded.cases[i]) continue;
    if (!foreground_bbox(loaded.cases[i]->label())) {
      Skip s{loaded.cases[i]->case_id(), "no tumor voxels"};
      log_skip(s);
      loaded.skipped.push_back(s);
      continue;
    }
    eligible.push_back(&*loaded.cases[i]);
    eligible_dirs.push_back(loaded.dirs[i]);
  }
  if (eligible.size() < 2) {
    throw DataError("mix needs at least two readable cases with tumor, found " +
                    std::to_string(eligible.size()));
  }
  prepare_output(cfg.output);

  auto pair_rng = derive_case_rng(cfg.seed, "pairs");
  std::vector<std::pair<std::size_t, std::size_t>> pairs(cfg.pairs);
  for (auto& p : pairs) p = sample_pair_indices(eligible.size(), pair_rng);

  const double alpha = cfg.mix.alpha;
  std::vector<json> records(pairs.size());
  parallel_for(pairs.size(), cfg.workers, [&](std::size_t k) {
    const std::string base = numbered("pair-", k + 1);
    const std::string id = numbered("mix-", k + 1);
    const CaseBundle& ci = *eligible[pairs[k].first];
    const CaseBundle& cj = *eligible[pairs[k].second];
    json streams = json::object();
    auto stream = [&](const char* name) {
      const std::string label = base + "/" + name;
      streams[name] = label;
      return derive_case_rng(cfg.seed, label);
    };

    SyntheticCase s = [&] {
      if (cfg.mix.method == MixMethod::Mixup) {
        auto rw = stream("weights");
        const double lambda = sample_beta(alpha, rw);
        try {
          return mixup_patch(ci, cj, lambda, cfg.mix.patch_size);
        } catch (const ConfigError& e) {
          throw DataError(id + ": " + e.what());
        }
      }
      auto ri = stream("crop-i");
      auto rj = stream("crop-j");
      const auto p1 = extract_tumor_patch(ci, cfg.mix, ri);
      const auto p2 = extract_tumor_patch(cj, cfg.mix, rj);
      auto rw = stream("weights");
      switch (cfg.mix.method) {
        case MixMethod::TensorMixup:
          return tensormixup(p1, p2, sample_mix_tensor(p1.shape(), alpha, rw));
        case MixMethod::ScalarRoi:
          return scalar_roi_mix(p1, p2, sample_beta(alpha, rw));
        default: {
          const double lambda = sample_beta(alpha, rw);
          auto rb = stream("box");
          return cutmix3d(p1, p2, lambda, rb);
        }
      }
    }();
    s.lineage.alpha = alpha;

    json extra{{"seed", cfg.seed}, {"rng_algorithm", SeededRng::kAlgorithm}, {"streams", streams}};
    const auto manifest = write_case(s, id, cfg.output / id, extra);
    records[k] = {{"id", id},
                  {"source_i", ci.case_id()},
                  {"source_j", cj.case_id()},
                  {"streams", streams},
                  {"meta_sha256", sha256_file(cfg.output / id / kManifestName)}};
    log::event(log::Level::Info, "pair_done", {{"id", id}, {"i", ci.case_id()}, {"j", cj.case_id()}});
  });

  json inputs = json::array();
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    inputs.push_back({{"case_id", eligible[i]->case_id()},
                      {"meta_sha256", sha256_file(eligible_dirs[i] / kManifestName)}});
  }
  const auto& ps = cfg.mix.patch_size;
  write_json_file(cfg.output / "batch.json",
                  {{"command", "mix"},
                   {"method", to_string(cfg.mix.method)},
                   {"alpha", alpha},
                   {"seed", cfg.seed},
                   {"rng_algorithm", SeededRng::kAlgorithm},
                   {"patch_size", {ps.x, ps.y, ps.z}},
                   {"margin", cfg.mix.margin},
                   {"crop", crop_name(cfg.mix.crop)},
                   {"inputs", inputs},
                   {"pairs", records},
                   {"skipped", skips_json(loaded.skipped)}});
  return {pairs.size(), loaded.skipped.size()};
}

RunSummary run_augment(const PipelineConfig& cfg) {
  cfg.validate(Command::Augment);
  const auto dirs = require_cases(cfg.input);
  prepare_output(cfg.output);
  std::vector<std::optional<Skip>> errors(dirs.size());
  std::vector<std::vector<json>> made(dirs.size());
  json ops = config_to_json(cfg)["augment"]["ops"];
  parallel_for(dirs.size(), cfg.workers, [&](std::size_t i) {
    try {
      const auto c = read_case(dirs[i]);
      for (std::size_t copy = 0; copy < cfg.augment_copies; ++copy) {
        const std::string label = cfg.augment.stream_label + "/" + c.case_id() + "/" + std::to_string(copy);
        auto rng = derive_case_rng(cfg.seed, label);
        const auto out = apply_augmentations(c, cfg.augment, rng);
        const std::string id = c.case_id() + "_aug" + std::to_string(copy);
        CaseBundle renamed(id, out.modalities(), out.label(), out.soft_label());
        write_case(renamed, cfg.output / id,
                   {{"augment", ops},
                    {"source_case", c.case_id()},
                    {"seed", cfg.seed},
                    {"rng_algorithm", SeededRng::kAlgorithm},
                    {"stream", label}});
        made[i].push_back({{"id", id}, {"source", c.case_id()}, {"stream", label}});
      }
    } catch (const DataError& e) {
      errors[i] = Skip{dirs[i].filename().string(), e.what()};
    }
  });
  RunSummary r;
  std::vector<Skip> skipped;
  json outputs = json::array();
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (errors[i]) {
      log_skip(*errors[i]);
      skipped.push_back(*errors[i]);
    }
    for (auto& m : made[i]) outputs.push_back(std::move(m));
  }
  r.processed = outputs.size();
  r.skipped = skipped.size();
  write_json_file(cfg.output / "augment.json",
                  {{"command", "augment"},
                   {"seed", cfg.seed},
                   {"rng_algorithm", SeededRng::kAlgorithm},
                   {"ops", ops},
                   {"outputs", outputs},
                   {"skipped", skips_json(skipped)}});
  if (r.processed == 0) throw DataError("augment: every case failed");
  return r;
}

namespace {

std::map<std::string, fs::path> index_by_case_id(const fs::path& root) {
  std::map<std::string, fs::path> out;
  for (const auto& d : require_cases(root)) {
    const auto m = read_manifest(d);
    if (!out.emplace(m.case_id, d).second) {
      throw DataError("duplicate case id " + m.case_id + " under " + root.string());
    }
  }
  return out;
}

}  // namespace

RunSummary run_eval(const PipelineConfig& cfg) {
  cfg.validate(Command::Eval);
  const auto preds = index_by_case_id(cfg.pred);
  const auto gts = index_by_case_id(cfg.gt);

  std::vector<std::string> ids;
  std::vector<std::string> missing;
  for (const auto& [id, _] : gts) {
    if (preds.count(id)) ids.push_back(id);
    else missing.push_back("prediction missing for " + id);
  }
  for (const auto& [id, _] : preds) {
    if (!gts.count(id)) missing.push_back("ground truth missing for " + id);
  }
  if (!missing.empty()) {
    if (!cfg.allow_partial) {
      std::string msg = "prediction and ground-truth sets differ:";
      for (const auto& m : missing) msg += "\n  " + m;
      throw DataError(msg);
    }
    for (const auto& m : missing) log::event(log::Level::Warn, "case_unmatched", {{"detail", m}});
  }
  if (ids.empty()) throw DataError("no case present in both prediction and ground truth");
  prepare_output(cfg.output);

  std::vector<MetricsReport> reports(ids.size());
  parallel_for(ids.size(), cfg.workers, [&](std::size_t i) {
    const auto gt = read_case_label(gts.at(ids[i]));
    const auto pred = read_case_label(preds.at(ids[i]));
    if (!(pred.label.shape() == gt.label.shape())) {
      throw DataError(ids[i] + ": prediction shape " + to_string(pred.label.shape()) +
                      " differs from ground truth " + to_string(gt.label.shape()));
    }
    try {
      reports[i] = evaluate_case(pred.label, gt.label, gt.spacing, ids[i]);
    } catch (const ConfigError& e) {
      throw DataError(ids[i] + ": " + e.what());
    }
  });
  write_report(reports, cfg.output / "report.csv", ReportFormat::Csv);
  write_report(reports, cfg.output / "report.json", ReportFormat::Json);
  write_json_file(cfg.output / "summary.json", summary_to_json(aggregate_reports(reports)));
  return {ids.size(), missing.size()};
}

RunSummary run_split(const PipelineConfig& cfg) {
  cfg.validate(Command::Split);
  std::vector<std::string> ids;
  for (const auto& [id, _] : index_by_case_id(cfg.input)) ids.push_back(id);
  const auto folds = kfold_split(ids, cfg.kfold, cfg.seed);
  prepare_output(cfg.output);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::string text;
    for (const auto& id : folds[f]) text += id + "\n";
    write_text_file(cfg.output / ("fold-" + std::to_string(f + 1) + ".txt"), text);
  }
  write_json_file(cfg.output / "folds.json", {{"k", cfg.kfold},
                                              {"seed", cfg.seed},
                                              {"rng_algorithm", SeededRng::kAlgorithm},
                                              {"folds", folds}});
  return {ids.size(), 0};
}

RunSummary run_phantom(const PipelineConfig& cfg) {
  cfg.validate(Command::Phantom);
  prepare_output(cfg.output);
  parallel_for(cfg.phantom_count, cfg.workers, [&](std::size_t i) {
    const std::string id = numbered("phantom-", i + 1, 3);
    PhantomParams p = cfg.phantom;
    p.seed = derive_seed(cfg.seed, id);
    write_case(generate_phantom(p, id), cfg.output / id,
               {{"generator", "phantom"},
                {"seed", cfg.seed},
                {"rng_algorithm", SeededRng::kAlgorithm},
                {"stream", id}});
  });
  return {cfg.phantom_count, 0};
}

namespace {

std::optional<fs::path> find_nifti(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".nii.gz", ".nii"}) {
    const auto p = dir / (stem + ext);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

}  // namespace

RunSummary run_import(const PipelineConfig& cfg) {
  cfg.validate(Command::Import);
  if (!fs::is_directory(cfg.input)) throw DataError("input directory not found: " + cfg.input.string());
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(cfg.input)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw DataError("no case folders under " + cfg.input.string());
  prepare_output(cfg.output);

  static const std::pair<const char*, const char*> kSuffixes[] = {
      {"t1", "T1"}, {"t1ce", "T1ce"}, {"t2", "T2"}, {"flair", "Flair"}};
  std::vector<std::optional<Skip>> errors(dirs.size());
  parallel_for(dirs.size(), cfg.workers, [&](std::size_t i) {
    const std::string id = dirs[i].filename().string();
    try {
      validate_case_id(id);
      std::vector<NamedVolume> mods;
      for (const auto& [suffix, name] : kSuffixes) {
        const auto p = find_nifti(dirs[i], id + "_" + suffix);
        if (!p) throw DataError("missing " + id + "_" + suffix + ".nii(.gz)");
        mods.push_back({name, import_nifti_volume(*p)});
      }
      const auto seg = find_nifti(dirs[i], id + "_seg");
      if (!seg) throw DataError("missing " + id + "_seg.nii(.gz)");
      CaseBundle c(id, std::move(mods), import_nifti_label(*seg, cfg.scheme));
      write_case(c, cfg.output / id, {{"import", "nifti"}, {"source", dirs[i].string()}});
    } catch (const DataError& e) {
      errors[i] = Skip{id, e.what()};
    } catch (const ConfigError& e) {
      errors[i] = Skip{id, e.what()};
    }
  });
  RunSummary r;
  for (auto& e : errors) {
    if (e) {
      log_skip(*e);
      ++r.skipped;
    }
  }
  r.processed = dirs.size() - r.skipped;
  if (r.processed == 0) throw DataError("import: every case failed");
  return r;
}

}  // namespace voxmix
