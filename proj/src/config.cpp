#include "wsol/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace wsol {

namespace {

using json = nlohmann::ordered_json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (allowed.find(key) == allowed.end())
      throw std::invalid_argument("config: unknown key " + where + key);
}

std::string ap_style_name(ApStyle s) {
  return s == ApStyle::voc07_11pt ? "voc07-11pt" : "all-points";
}

ApStyle ap_style_from_name(const std::string& name) {
  if (name == "voc07-11pt") return ApStyle::voc07_11pt;
  if (name == "all-points") return ApStyle::all_points;
  throw std::invalid_argument("config: unknown ap_style " + name);
}

std::string kernel_kind_name(KernelKind k) { return k == KernelKind::rbf ? "rbf" : "linear"; }

KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "rbf") return KernelKind::rbf;
  if (name == "linear") return KernelKind::linear;
  throw std::invalid_argument("config: unknown kernel " + name);
}

std::string weight_space_name(WeightSpace s) { return s == WeightSpace::root ? "root" : "raw"; }

WeightSpace weight_space_from_name(const std::string& name) {
  if (name == "root") return WeightSpace::root;
  if (name == "raw") return WeightSpace::raw;
  throw std::invalid_argument("config: unknown weight_space " + name);
}

json synthetic_to_json(const SyntheticConfig& c) {
  json j;
  j["num_regressor_images"] = c.num_regressor_images;
  j["num_wsol_images"] = c.num_wsol_images;
  j["num_test_images"] = c.num_test_images;
  j["classes"] = c.classes;
  j["feature_dim"] = c.feature_dim;
  j["proposals_per_image"] = c.proposals_per_image;
  json law = json::array();
  for (const auto& comp : c.size_law.components)
    law.push_back({{"lo", comp.lo}, {"hi", comp.hi}, {"weight", comp.weight}});
  j["size_law"] = law;
  j["snr"] = {{"feature_noise_base", c.snr_law.feature_noise_base},
              {"feature_noise_slope", c.snr_law.feature_noise_slope},
              {"objectness_noise", c.snr_law.objectness_noise},
              {"whole_image_noise", c.snr_law.whole_image_noise}};
  j["clutter"] = c.clutter;
  return j;
}

void synthetic_from_json(const json& j, SyntheticConfig& c) {
  reject_unknown_keys(j,
                      {"num_regressor_images", "num_wsol_images", "num_test_images", "classes",
                       "feature_dim", "proposals_per_image", "size_law", "snr", "clutter"},
                      "synthetic.");
  if (j.contains("num_regressor_images")) c.num_regressor_images = j["num_regressor_images"];
  if (j.contains("num_wsol_images")) c.num_wsol_images = j["num_wsol_images"];
  if (j.contains("num_test_images")) c.num_test_images = j["num_test_images"];
  if (j.contains("classes")) c.classes = j["classes"].get<std::vector<std::string>>();
  if (j.contains("feature_dim")) c.feature_dim = j["feature_dim"];
  if (j.contains("proposals_per_image")) c.proposals_per_image = j["proposals_per_image"];
  if (j.contains("size_law")) {
    c.size_law.components.clear();
    for (const auto& comp : j["size_law"]) {
      reject_unknown_keys(comp, {"lo", "hi", "weight"}, "synthetic.size_law[].");
      SizeLawComponent out;
      if (comp.contains("lo")) out.lo = comp["lo"];
      if (comp.contains("hi")) out.hi = comp["hi"];
      if (comp.contains("weight")) out.weight = comp["weight"];
      c.size_law.components.push_back(out);
    }
  }
  if (j.contains("snr")) {
    const json& s = j["snr"];
    reject_unknown_keys(
        s, {"feature_noise_base", "feature_noise_slope", "objectness_noise", "whole_image_noise"},
        "synthetic.snr.");
    if (s.contains("feature_noise_base")) c.snr_law.feature_noise_base = s["feature_noise_base"];
    if (s.contains("feature_noise_slope")) c.snr_law.feature_noise_slope = s["feature_noise_slope"];
    if (s.contains("objectness_noise")) c.snr_law.objectness_noise = s["objectness_noise"];
    if (s.contains("whole_image_noise")) c.snr_law.whole_image_noise = s["whole_image_noise"];
  }
  if (j.contains("clutter")) c.clutter = j["clutter"];
}

json regressor_to_json(const RegressorConfig& c) {
  json j;
  j["mode"] = regressor_mode_name(c.mode);
  j["kernel"] = kernel_kind_name(c.kernel);
  j["folds"] = c.folds;
  j["root"] = c.root;
  j["lambda_grid"] = c.lambda_grid.empty() ? default_lambda_grid() : c.lambda_grid;
  j["bandwidth_factors"] = c.bandwidth_factors;
  json groups = json::object();
  for (const auto& [name, classes] : c.groups) groups[name] = classes;
  j["groups"] = groups;
  return j;
}

void regressor_from_json(const json& j, RegressorConfig& c) {
  reject_unknown_keys(
      j, {"mode", "kernel", "folds", "root", "lambda_grid", "bandwidth_factors", "groups"},
      "regressor.");
  if (j.contains("mode")) c.mode = regressor_mode_from_name(j["mode"]);
  if (j.contains("kernel")) c.kernel = kernel_kind_from_name(j["kernel"]);
  if (j.contains("folds")) c.folds = j["folds"];
  if (j.contains("root")) c.root = j["root"];
  if (j.contains("lambda_grid")) c.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
  if (j.contains("bandwidth_factors"))
    c.bandwidth_factors = j["bandwidth_factors"].get<std::vector<double>>();
  if (j.contains("groups")) {
    c.groups.clear();
    for (const auto& [name, classes] : j["groups"].items())
      c.groups[name] = classes.get<std::vector<std::string>>();
  }
}

json curriculum_to_json(const CurriculumConfig& c) {
  json j;
  j["batches"] = c.batches;
  j["iterations"] = c.iterations;
  j["ordering"] = ordering_name(c.ordering);
  j["use_size_weighting"] = c.use_size_weighting;
  j["use_objectness"] = c.use_objectness;
  j["svm_c"] = c.svm_c;
  j["weight_delta"] = c.weight_delta;
  j["weight_space"] = weight_space_name(c.weight_space);
  j["negatives_per_image"] = c.negatives_per_image;
  j["hard_negative_cap"] = c.hard_negative_cap;
  j["hard_negative_threshold"] = c.hard_negative_threshold;
  return j;
}

void curriculum_from_json(const json& j, CurriculumConfig& c) {
  reject_unknown_keys(j,
                      {"batches", "iterations", "ordering", "use_size_weighting", "use_objectness",
                       "svm_c", "weight_delta", "weight_space", "negatives_per_image",
                       "hard_negative_cap", "hard_negative_threshold"},
                      "curriculum.");
  if (j.contains("batches")) c.batches = j["batches"];
  if (j.contains("iterations")) c.iterations = j["iterations"];
  if (j.contains("ordering")) c.ordering = ordering_from_name(j["ordering"]);
  if (j.contains("use_size_weighting")) c.use_size_weighting = j["use_size_weighting"];
  if (j.contains("use_objectness")) c.use_objectness = j["use_objectness"];
  if (j.contains("svm_c")) c.svm_c = j["svm_c"];
  if (j.contains("weight_delta")) c.weight_delta = j["weight_delta"];
  if (j.contains("weight_space")) c.weight_space = weight_space_from_name(j["weight_space"]);
  if (j.contains("negatives_per_image")) c.negatives_per_image = j["negatives_per_image"];
  if (j.contains("hard_negative_cap")) c.hard_negative_cap = j["hard_negative_cap"];
  if (j.contains("hard_negative_threshold")) c.hard_negative_threshold = j["hard_negative_threshold"];
}

json eval_to_json(const EvalSettings& c) {
  json j;
  j["nms_iou"] = c.nms_iou;
  j["top_n"] = c.top_n;
  j["ap_style"] = ap_style_name(c.ap_style);
  j["iou_threshold"] = c.iou_threshold;
  return j;
}

void eval_from_json(const json& j, EvalSettings& c) {
  reject_unknown_keys(j, {"nms_iou", "top_n", "ap_style", "iou_threshold"}, "eval.");
  if (j.contains("nms_iou")) c.nms_iou = j["nms_iou"];
  if (j.contains("top_n")) c.top_n = j["top_n"];
  if (j.contains("ap_style")) c.ap_style = ap_style_from_name(j["ap_style"]);
  if (j.contains("iou_threshold")) c.iou_threshold = j["iou_threshold"];
}

json sweep_to_json(const SweepConfig& c) {
  json j;
  j["seeds"] = c.seeds;
  j["variants"] = c.variants;
  json ladder = json::array();
  for (std::size_t n : c.n_ladder) {
    if (n == 0)
      ladder.push_back("all");
    else
      ladder.push_back(n);
  }
  j["n_ladder"] = ladder;
  return j;
}

void sweep_from_json(const json& j, SweepConfig& c) {
  reject_unknown_keys(j, {"seeds", "variants", "n_ladder"}, "sweep.");
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("variants")) c.variants = j["variants"].get<std::vector<std::string>>();
  if (j.contains("n_ladder")) {
    c.n_ladder.clear();
    for (const auto& entry : j["n_ladder"]) {
      if (entry.is_string()) {
        if (entry.get<std::string>() != "all")
          throw std::invalid_argument("config: n_ladder entries are counts or \"all\"");
        c.n_ladder.push_back(0);
      } else {
        std::size_t n = entry;
        if (n == 0) throw std::invalid_argument("config: n_ladder counts must be positive");
        c.n_ladder.push_back(n);
      }
    }
  }
}

}  // namespace

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["synthetic"] = synthetic_to_json(cfg.synthetic);
  j["regressor"] = regressor_to_json(cfg.regressor);
  j["curriculum"] = curriculum_to_json(cfg.curriculum);
  j["eval"] = eval_to_json(cfg.eval);
  j["sweep"] = sweep_to_json(cfg.sweep);
  return j;
}

RunConfig config_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: document must be a JSON object");
  reject_unknown_keys(j, {"seed", "out_dir", "synthetic", "regressor", "curriculum", "eval", "sweep"},
                      "");
  RunConfig cfg;
  if (j.contains("seed")) cfg.seed = j["seed"];
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"];
  if (j.contains("synthetic")) synthetic_from_json(j["synthetic"], cfg.synthetic);
  if (j.contains("regressor")) regressor_from_json(j["regressor"], cfg.regressor);
  if (j.contains("curriculum")) curriculum_from_json(j["curriculum"], cfg.curriculum);
  if (j.contains("eval")) eval_from_json(j["eval"], cfg.eval);
  if (j.contains("sweep")) sweep_from_json(j["sweep"], cfg.sweep);

  cfg.synthetic.validate();
  cfg.curriculum.validate();
  if (cfg.regressor.folds < 2) throw std::invalid_argument("config: regressor.folds must be >= 2");
  if (cfg.regressor.root < 1) throw std::invalid_argument("config: regressor.root must be >= 1");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << config_to_json(cfg).dump(2) << "\n";
}

}  // namespace wsol
