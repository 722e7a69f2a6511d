#include <fstream>
#include <set>

#include "voxmix/error.hpp"
#include "voxmix/pipeline.hpp"
#include "voxmix/storage.hpp"

namespace voxmix {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::string_view where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, _] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(std::string(where) + ": unknown key '" + k + "'");
  }
}

template <typename T>
T get_as(const json& j, std::string_view key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + std::string(key) + "' has the wrong type");
  }
}

std::size_t get_count(const json& j, std::string_view key) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    throw ConfigError("config key '" + std::string(key) + "' must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

Dims get_dims(const json& j, std::string_view key) {
  if (j.is_number_integer()) {
    const auto n = get_count(j, key);
    return {n, n, n};
  }
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError("config key '" + std::string(key) + "' must be an integer or [x,y,z]");
  }
  return {get_count(j[0], key), get_count(j[1], key), get_count(j[2], key)};
}

std::array<double, 3> get_triple(const json& j, std::string_view key) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError("config key '" + std::string(key) + "' must be [x,y,z]");
  }
  return {get_as<double>(j[0], key), get_as<double>(j[1], key), get_as<double>(j[2], key)};
}

std::string_view crop_name(CropMode m) { return m == CropMode::Center ? "center" : "random"; }

CropMode parse_crop(const std::string& s) {
  if (s == "random") return CropMode::Random;
  if (s == "center") return CropMode::Center;
  throw ConfigError("unknown crop mode '" + s + "' (expected random or center)");
}

AugOp parse_op(const json& j) {
  if (!j.is_object() || !j.contains("op")) throw ConfigError("augment op needs an 'op' field");
  const auto name = get_as<std::string>(j.at("op"), "op");
  const double prob = j.contains("probability") ? get_as<double>(j["probability"], "probability") : 1.0;
  if (name == "flip") {
    reject_unknown(j, "flip", {"op", "axis", "probability"});
    return FlipOp{parse_axis(get_as<std::string>(j.value("axis", json("x")), "axis")), prob};
  }
  if (name == "rotate90") {
    reject_unknown(j, "rotate90", {"op", "axes", "quarter_turns", "probability"});
    Rotate90Op op;
    op.probability = prob;
    if (j.contains("axes")) {
      const auto axes = get_as<std::vector<std::string>>(j["axes"], "axes");
      if (axes.size() != 2) throw ConfigError("rotate90 axes must name two axes");
      op.from = parse_axis(axes[0]);
      op.to = parse_axis(axes[1]);
    }
    if (j.contains("quarter_turns")) op.quarter_turns = get_as<std::vector<int>>(j["quarter_turns"], "quarter_turns");
    return op;
  }
  if (name == "gaussian_noise") {
    reject_unknown(j, "gaussian_noise", {"op", "sigma", "probability"});
    return GaussianNoiseOp{get_as<double>(j.value("sigma", json(0.1)), "sigma"), prob};
  }
  if (name == "brightness") {
    reject_unknown(j, "brightness", {"op", "scale_range", "probability"});
    BrightnessOp op;
    op.probability = prob;
    if (j.contains("scale_range")) {
      const auto r = get_as<std::vector<double>>(j["scale_range"], "scale_range");
      if (r.size() != 2) throw ConfigError("brightness scale_range must be [min,max]");
      op.min_scale = r[0];
      op.max_scale = r[1];
    }
    return op;
  }
  if (name == "elastic") {
    reject_unknown(j, "elastic",
                   {"op", "grid_spacing", "max_displacement", "smoothing_sigma", "probability"});
    ElasticOp op;
    op.probability = prob;
    if (j.contains("grid_spacing")) op.params.grid_spacing = get_as<double>(j["grid_spacing"], "grid_spacing");
    if (j.contains("max_displacement")) op.params.max_displacement = get_as<double>(j["max_displacement"], "max_displacement");
    if (j.contains("smoothing_sigma")) op.params.smoothing_sigma = get_as<double>(j["smoothing_sigma"], "smoothing_sigma");
    return op;
  }
  throw ConfigError("unknown augment op '" + name + "'");
}

json op_to_json(const AugOp& op) {
  return std::visit(
      [](const auto& o) -> json {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, FlipOp>) {
          return {{"op", "flip"}, {"axis", to_string(o.axis)}, {"probability", o.probability}};
        } else if constexpr (std::is_same_v<T, Rotate90Op>) {
          return {{"op", "rotate90"},
                  {"axes", {to_string(o.from), to_string(o.to)}},
                  {"quarter_turns", o.quarter_turns},
                  {"probability", o.probability}};
        } else if constexpr (std::is_same_v<T, GaussianNoiseOp>) {
          return {{"op", "gaussian_noise"}, {"sigma", o.sigma}, {"probability", o.probability}};
        } else if constexpr (std::is_same_v<T, BrightnessOp>) {
          return {{"op", "brightness"},
                  {"scale_range", {o.min_scale, o.max_scale}},
                  {"probability", o.probability}};
        } else {
          return {{"op", "elastic"},
                  {"grid_spacing", o.params.grid_spacing},
                  {"max_displacement", o.params.max_displacement},
                  {"smoothing_sigma", o.params.smoothing_sigma},
                  {"probability", o.probability}};
        }
      },
      op);
}

void parse_phantom(const json& j, PipelineConfig& c) {
  reject_unknown(j, "phantom",
                 {"count", "shape", "spacing", "brain_radii", "edema_radius", "core_radius",
                  "necrosis_radius", "radius_jitter", "noise_sigma", "modalities"});
  auto& p = c.phantom;
  if (j.contains("count")) c.phantom_count = get_count(j["count"], "phantom.count");
  if (j.contains("shape")) p.shape = get_dims(j["shape"], "phantom.shape");
  if (j.contains("spacing")) {
    const auto s = get_triple(j["spacing"], "phantom.spacing");
    p.spacing = {s[0], s[1], s[2]};
  }
  if (j.contains("brain_radii")) p.brain_radii = get_triple(j["brain_radii"], "phantom.brain_radii");
  if (j.contains("edema_radius")) p.edema_radius = get_as<double>(j["edema_radius"], "edema_radius");
  if (j.contains("core_radius")) p.core_radius = get_as<double>(j["core_radius"], "core_radius");
  if (j.contains("necrosis_radius")) p.necrosis_radius = get_as<double>(j["necrosis_radius"], "necrosis_radius");
  if (j.contains("radius_jitter")) p.radius_jitter = get_as<double>(j["radius_jitter"], "radius_jitter");
  if (j.contains("noise_sigma")) p.noise_sigma = get_as<double>(j["noise_sigma"], "noise_sigma");
  if (j.contains("modalities")) {
    const auto& m = j["modalities"];
    if (!m.is_array() || m.empty()) throw ConfigError("phantom.modalities must be a non-empty array");
    p.modalities.clear();
    for (const auto& e : m) {
      reject_unknown(e, "phantom.modalities[]", {"name", "brain", "edema", "necrosis", "enhancing"});
      TissueIntensities t;
      t.brain = get_as<double>(e.value("brain", json(0.0)), "brain");
      t.edema = get_as<double>(e.value("edema", json(0.0)), "edema");
      t.necrosis = get_as<double>(e.value("necrosis", json(0.0)), "necrosis");
      t.enhancing = get_as<double>(e.value("enhancing", json(0.0)), "enhancing");
      p.modalities.emplace_back(get_as<std::string>(e.at("name"), "name"), t);
    }
  }
}

bool same_or_nested(const fs::path& a, const fs::path& b) {
  const auto ca = fs::weakly_canonical(a);
  const auto cb = fs::weakly_canonical(b);
  auto ia = ca.begin();
  auto ib = cb.begin();
  for (; ia != ca.end() && ib != cb.end(); ++ia, ++ib) {
    if (ia->empty() || ib->empty()) break;
    if (*ia != *ib) return false;
  }
  return true;
}

}  // namespace

void PipelineConfig::validate(Command cmd) const {
  if (output.empty()) throw ConfigError("an output directory is required (--out)");
  if (workers == 0) throw ConfigError("workers must be >= 1");
  auto require_input = [&](const fs::path& p, std::string_view what) {
    if (p.empty()) throw ConfigError(std::string(what) + " directory is required");
    if (same_or_nested(p, output)) {
      throw ConfigError(std::string(what) + " and output directories must be distinct and not nested");
    }
  };
  switch (cmd) {
    case Command::Preprocess:
    case Command::Import:
      require_input(input, "input");
      break;
    case Command::Mix:
      require_input(input, "input");
      mix.validate();
      break;
    case Command::Augment:
      require_input(input, "input");
      augment.validate();
      if (augment_copies == 0) throw ConfigError("augment copies must be >= 1");
      break;
    case Command::Eval:
      require_input(pred, "prediction");
      require_input(gt, "ground-truth");
      break;
    case Command::Split:
      require_input(input, "input");
      if (kfold < 2) throw ConfigError("k-fold split needs k >= 2");
      break;
    case Command::Phantom:
      phantom.validate();
      if (phantom_count == 0) throw ConfigError("phantom count must be >= 1");
      break;
  }
}

PipelineConfig config_from_json(const json& j) {
  reject_unknown(j, "config",
                 {"input", "output", "seed", "workers", "mix", "augment", "kfold", "phantom",
                  "eval", "scheme"});
  PipelineConfig c;
  if (j.contains("input")) c.input = get_as<std::string>(j["input"], "input");
  if (j.contains("output")) c.output = get_as<std::string>(j["output"], "output");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("workers")) c.workers = get_count(j["workers"], "workers");
  if (j.contains("mix")) {
    const auto& m = j["mix"];
    reject_unknown(m, "mix", {"method", "alpha", "patch_size", "margin", "crop", "pairs"});
    if (m.contains("method")) c.mix.method = parse_mix_method(get_as<std::string>(m["method"], "mix.method"));
    if (m.contains("alpha")) c.mix.alpha = get_as<double>(m["alpha"], "mix.alpha");
    if (m.contains("patch_size")) c.mix.patch_size = get_dims(m["patch_size"], "mix.patch_size");
    if (m.contains("margin")) c.mix.margin = get_count(m["margin"], "mix.margin");
    if (m.contains("crop")) c.mix.crop = parse_crop(get_as<std::string>(m["crop"], "mix.crop"));
    if (m.contains("pairs")) c.pairs = get_count(m["pairs"], "mix.pairs");
  }
  if (j.contains("augment")) {
    const auto& a = j["augment"];
    reject_unknown(a, "augment", {"ops", "copies", "stream_label"});
    if (a.contains("ops")) {
      if (!a["ops"].is_array()) throw ConfigError("augment.ops must be an array");
      c.augment.ops.clear();
      for (const auto& op : a["ops"]) c.augment.ops.push_back(parse_op(op));
    }
    if (a.contains("copies")) c.augment_copies = get_count(a["copies"], "augment.copies");
    if (a.contains("stream_label")) c.augment.stream_label = get_as<std::string>(a["stream_label"], "augment.stream_label");
  }
  if (j.contains("kfold")) {
    const auto& k = j["kfold"];
    reject_unknown(k, "kfold", {"k"});
    if (k.contains("k")) c.kfold = get_count(k["k"], "kfold.k");
  }
  if (j.contains("phantom")) parse_phantom(j["phantom"], c);
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    reject_unknown(e, "eval", {"pred", "gt", "allow_partial"});
    if (e.contains("pred")) c.pred = get_as<std::string>(e["pred"], "eval.pred");
    if (e.contains("gt")) c.gt = get_as<std::string>(e["gt"], "eval.gt");
    if (e.contains("allow_partial")) c.allow_partial = get_as<bool>(e["allow_partial"], "eval.allow_partial");
  }
  if (j.contains("scheme")) {
    try {
      c.scheme = scheme_from_json(j["scheme"]);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("scheme: ") + e.what());
    }
  }
  c.mix.seed = c.seed;
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const PipelineConfig& c) {
  json ops = json::array();
  for (const auto& op : c.augment.ops) ops.push_back(op_to_json(op));
  json mods = json::array();
  for (const auto& [name, t] : c.phantom.modalities) {
    mods.push_back({{"name", name},
                    {"brain", t.brain},
                    {"edema", t.edema},
                    {"necrosis", t.necrosis},
                    {"enhancing", t.enhancing}});
  }
  const auto& p = c.phantom;
  return {
      {"input", c.input.string()},
      {"output", c.output.string()},
      {"seed", c.seed},
      {"workers", c.workers},
      {"mix",
       {{"method", to_string(c.mix.method)},
        {"alpha", c.mix.alpha},
        {"patch_size", {c.mix.patch_size.x, c.mix.patch_size.y, c.mix.patch_size.z}},
        {"margin", c.mix.margin},
        {"crop", crop_name(c.mix.crop)},
        {"pairs", c.pairs}}},
      {"augment", {{"ops", ops}, {"copies", c.augment_copies}, {"stream_label", c.augment.stream_label}}},
      {"kfold", {{"k", c.kfold}}},
      {"phantom",
       {{"count", c.phantom_count},
        {"shape", {p.shape.x, p.shape.y, p.shape.z}},
        {"spacing", {p.spacing.x, p.spacing.y, p.spacing.z}},
        {"brain_radii", p.brain_radii},
        {"edema_radius", p.edema_radius},
        {"core_radius", p.core_radius},
        {"necrosis_radius", p.necrosis_radius},
        {"radius_jitter", p.radius_jitter},
        {"noise_sigma", p.noise_sigma},
        {"modalities", mods}}},
      {"eval", {{"pred", c.pred.string()}, {"gt", c.gt.string()}, {"allow_partial", c.allow_partial}}},
      {"scheme", scheme_to_json(c.scheme)},
  };
}

}  // namespace voxmix
