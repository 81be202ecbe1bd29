#include "wsol/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "wsol/rng.hpp"
#include "wsol/synthetic.hpp"
#include "wsol/weighting.hpp"

namespace wsol {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::uint64_t fnv1a_bytes(const char* data, std::size_t len, std::uint64_t h) {
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<std::uint8_t>(data[i]);
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

// Shortest round-trip decimal form, the same one the JSON files use.
std::string fmt(double v) { return json(v).dump(); }

Dataset load_dataset(const std::string& path) {
  Dataset ds = load_jsonl(path);
  canonicalize(ds);
  return ds;
}

struct CsvRow {
  std::string run_id, cls, metric, k, m, value;
};

std::string csv_join(const std::vector<CsvRow>& rows) {
  std::ostringstream out;
  out << "run_id,class,metric,k,m,value\n";
  for (const CsvRow& r : rows)
    out << r.run_id << ',' << r.cls << ',' << r.metric << ',' << r.k << ',' << r.m << ','
        << r.value << '\n';
  return out.str();
}

std::string run_label(const CurriculumConfig& cc, std::uint64_t seed) {
  std::string label = ordering_name(cc.ordering);
  label += cc.use_size_weighting ? "-w1" : "-w0";
  label += cc.use_objectness ? "-o1" : "-o0";
  label += "-s" + std::to_string(seed);
  return label;
}

json manifest_skeleton(const std::string& command, const RunConfig& cfg) {
  json m;
  m["format_version"] = 1;
  m["command"] = command;
  m["seed"] = cfg.seed;
  m["config"] = config_to_json(cfg);
  return m;
}

void add_hashes(json& manifest, const char* field, const std::string& dir,
                const std::vector<std::string>& names) {
  json h = json::object();
  for (const std::string& name : names) h[name] = file_hash_hex((fs::path(dir) / name).string());
  manifest[field] = h;
}

// Training rows of one regressor: whole-image features and root-space size
// targets.
struct RegressionRows {
  std::vector<double> features;
  std::vector<double> targets;
  std::size_t n = 0;
};

RegressionRows collect_rows(const Dataset& ds, const std::vector<std::string>& classes, int root) {
  std::set<std::string> wanted(classes.begin(), classes.end());
  RegressionRows rows;
  for (const ImageBag& img : ds.images) {
    double best = 0.0;
    bool found = false;
    for (const std::string& cls : wanted) {
      double s = 0.0;
      if (true_size_of(img, cls, &s)) {
        best = std::max(best, s);
        found = true;
      }
    }
    if (!found) continue;
    rows.features.insert(rows.features.end(), img.whole_image_feature.begin(),
                         img.whole_image_feature.end());
    rows.targets.push_back(root_transform(best, root));
    ++rows.n;
  }
  return rows;
}

SizeRegressor fit_one(const RegressionRows& rows, std::size_t d, const RegressorConfig& rc,
                      RegressorMode mode, std::uint64_t seed, const std::string& key) {
  if (rows.n == 0) throw std::invalid_argument("train-size: no training images for " + key);
  std::vector<double> bandwidths;
  if (rc.kernel == KernelKind::rbf) {
    double med = median_heuristic(rows.features, rows.n, d, seed);
    for (double f : rc.bandwidth_factors) bandwidths.push_back(f * med);
  } else {
    bandwidths.push_back(0.0);
  }
  const std::vector<double> lambdas =
      rc.lambda_grid.empty() ? default_lambda_grid() : rc.lambda_grid;
  CrossValidationResult cv =
      cross_validate(rows.features, rows.n, d, rows.targets, rc.folds, lambdas, bandwidths,
                     rc.kernel, rc.root, substream_seed(seed, "train-size-" + key));
  cv.model.training_mode = mode;
  return cv.model;
}

}  // namespace

std::string file_hash_hex(const std::string& path) {
  std::string bytes = read_file(path);
  return hash_hex(fnv1a_bytes(bytes.data(), bytes.size(), 1469598103934665603ull));
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

bool true_size_of(const ImageBag& image, const std::string& cls, double* out) {
  double best = 0.0;
  bool found = false;
  auto scan = [&](const std::vector<Box>& boxes) {
    for (const Box& b : boxes) {
      best = std::max(best, normalized_size(b, image.width, image.height));
      found = true;
    }
  };
  if (cls.empty()) {
    for (const auto& [name, boxes] : image.gt_boxes) scan(boxes);
  } else {
    auto it = image.gt_boxes.find(cls);
    if (it != image.gt_boxes.end()) scan(it->second);
  }
  if (found) *out = best;
  return found;
}

SizeModelSet train_size_models(const Dataset& regressor_set, const RegressorConfig& rc,
                               std::uint64_t seed) {
  const std::size_t d = regressor_set.feature_dim;
  SizeModelSet out;
  out.mode = rc.mode;

  if (rc.mode == RegressorMode::class_specific) {
    for (const std::string& cls : regressor_set.classes) {
      RegressionRows rows = collect_rows(regressor_set, {cls}, rc.root);
      out.by_class[cls] = fit_one(rows, d, rc, rc.mode, seed, cls);
      out.model_key_of_class[cls] = cls;
    }
    return out;
  }

  if (rc.mode == RegressorMode::class_generic) {
    RegressionRows rows = collect_rows(regressor_set, regressor_set.classes, rc.root);
    SizeRegressor model = fit_one(rows, d, rc, rc.mode, seed, "generic");
    for (const std::string& cls : regressor_set.classes) {
      out.by_class[cls] = model;
      out.model_key_of_class[cls] = "generic";
    }
    return out;
  }

  // across-class: two disjoint groups covering all classes; the model fit on
  // one group serves the classes of the other.
  if (rc.groups.size() != 2)
    throw std::invalid_argument("train-size: across-class mode needs exactly two groups");
  std::map<std::string, std::string> group_of;
  for (const auto& [name, classes] : rc.groups) {
    if (classes.empty()) throw std::invalid_argument("train-size: group " + name + " is empty");
    for (const std::string& cls : classes) {
      if (!group_of.emplace(cls, name).second)
        throw std::invalid_argument("train-size: class " + cls + " appears in both groups");
      if (std::find(regressor_set.classes.begin(), regressor_set.classes.end(), cls) ==
          regressor_set.classes.end())
        throw std::invalid_argument("train-size: group class " + cls + " not in dataset");
    }
  }
  for (const std::string& cls : regressor_set.classes)
    if (group_of.find(cls) == group_of.end())
      throw std::invalid_argument("train-size: class " + cls + " not covered by any group");

  std::map<std::string, SizeRegressor> group_models;
  for (const auto& [name, classes] : rc.groups) {
    RegressionRows rows = collect_rows(regressor_set, classes, rc.root);
    group_models[name] = fit_one(rows, d, rc, rc.mode, seed, "group-" + name);
  }
  auto other_group = [&](const std::string& name) {
    for (const auto& [candidate, classes] : rc.groups)
      if (candidate != name) return candidate;
    throw std::logic_error("train-size: group lookup");
  };
  for (const std::string& cls : regressor_set.classes) {
    const std::string serving = other_group(group_of.at(cls));
    out.by_class[cls] = group_models.at(serving);
    out.model_key_of_class[cls] = "group-" + serving;
  }
  return out;
}

std::map<std::string, SizeEstimates> estimate_sizes(const SizeModelSet& models,
                                                    const Dataset& wsol_set) {
  std::map<std::string, SizeEstimates> out;
  for (const std::string& cls : wsol_set.classes) {
    auto it = models.by_class.find(cls);
    if (it == models.by_class.end())
      throw std::invalid_argument("estimate: no size model for class " + cls);
    const SizeRegressor& model = it->second;
    SizeEstimates est;
    est.root = model.root;
    est.sigma = model.sigma;
    for (const ImageBag& img : wsol_set.images)
      if (img.positive_for(cls))
        est.s_e_root[img.id] = predict(model, img.whole_image_feature).s_e_root;
    out[cls] = std::move(est);
  }
  return out;
}

CurriculumConfig variant_config(const CurriculumConfig& base, const std::string& variant) {
  CurriculumConfig cc = base;
  if (variant == "baseline") {
    cc.ordering = Ordering::random;
    cc.use_size_weighting = false;
  } else if (variant == "order") {
    cc.ordering = Ordering::estimated_size;
    cc.use_size_weighting = false;
  } else if (variant == "order-weight") {
    cc.ordering = Ordering::estimated_size;
    cc.use_size_weighting = true;
  } else {
    throw std::invalid_argument("unknown variant: " + variant);
  }
  return cc;
}

json model_to_json(const SizeRegressor& reg, const std::string& train_hash) {
  json j;
  j["format_version"] = 1;
  j["kind"] = reg.kernel.kind == KernelKind::rbf ? "rbf" : "linear";
  j["bandwidth"] = reg.kernel.bandwidth;
  j["n"] = reg.n;
  j["d"] = reg.d;
  j["support_features"] = reg.support_features;
  j["dual_weights"] = reg.dual_weights;
  j["ridge"] = reg.ridge;
  j["root"] = reg.root;
  j["sigma"] = reg.sigma;
  j["training_mode"] = regressor_mode_name(reg.training_mode);
  j["training_set_hash"] = train_hash;
  return j;
}

SizeRegressor model_from_json(const json& j) {
  SizeRegressor reg;
  const std::string kind = j.at("kind");
  if (kind == "rbf")
    reg.kernel.kind = KernelKind::rbf;
  else if (kind == "linear")
    reg.kernel.kind = KernelKind::linear;
  else
    throw std::invalid_argument("model file: unknown kernel " + kind);
  reg.kernel.bandwidth = j.at("bandwidth");
  reg.n = j.at("n");
  reg.d = j.at("d");
  reg.support_features = j.at("support_features").get<std::vector<double>>();
  reg.dual_weights = j.at("dual_weights").get<std::vector<double>>();
  reg.ridge = j.at("ridge");
  reg.root = j.at("root");
  reg.sigma = j.at("sigma");
  reg.training_mode = regressor_mode_from_name(j.at("training_mode"));
  if (reg.support_features.size() != reg.n * reg.d)
    throw std::invalid_argument("model file: support feature shape mismatch");
  if (reg.dual_weights.size() != reg.n)
    throw std::invalid_argument("model file: dual weight count mismatch");
  return reg;
}

json trace_to_json(const RunTrace& trace) {
  json j;
  j["format_version"] = 1;
  j["class"] = trace.cls;
  j["batches"] = trace.batch_ids;
  json rounds = json::array();
  for (const IterationRecord& rec : trace.rounds) {
    json r;
    r["batch"] = rec.batch;
    r["iteration"] = rec.iteration;
    r["working_set"] = rec.working_set;
    r["positive_training_count"] = rec.positive_training_count;
    r["negative_cache"] = rec.negative_cache;
    r["corloc"] = rec.corloc;
    r["model_hash"] = hash_hex(rec.model_hash);
    json sel = json::object();
    for (const auto& [id, idx] : rec.selection) sel[id] = idx;
    r["selection"] = sel;
    rounds.push_back(std::move(r));
  }
  j["rounds"] = rounds;
  json fsel = json::object();
  for (const auto& [id, idx] : trace.final_selection) fsel[id] = idx;
  j["final_selection"] = fsel;
  j["final_corloc"] = trace.final_corloc;
  json mined = json::array();
  for (const auto& [id, idx] : trace.mined_sources) mined.push_back(json::array({id, idx}));
  j["mined_sources"] = mined;
  j["model"] = {{"weights", trace.final_model.model.weights},
                {"bias", trace.final_model.model.bias},
                {"reg_c", trace.final_model.model.reg_c},
                {"platt", {{"a_cal", trace.final_model.platt.a_cal},
                           {"b_cal", trace.final_model.platt.b_cal}}}};
  return j;
}

RunTrace trace_from_json(const json& j) {
  RunTrace trace;
  trace.cls = j.at("class");
  trace.batch_ids = j.at("batches").get<std::vector<std::vector<std::string>>>();
  for (const json& r : j.at("rounds")) {
    IterationRecord rec;
    rec.batch = r.at("batch");
    rec.iteration = r.at("iteration");
    rec.working_set = r.at("working_set");
    rec.positive_training_count = r.at("positive_training_count");
    rec.negative_cache = r.at("negative_cache");
    rec.corloc = r.at("corloc");
    rec.model_hash = std::stoull(r.at("model_hash").get<std::string>(), nullptr, 16);
    for (const auto& [id, idx] : r.at("selection").items()) rec.selection[id] = idx;
    trace.rounds.push_back(std::move(rec));
  }
  for (const auto& [id, idx] : j.at("final_selection").items()) trace.final_selection[id] = idx;
  trace.final_corloc = j.at("final_corloc");
  for (const json& entry : j.at("mined_sources"))
    trace.mined_sources.emplace_back(entry.at(0).get<std::string>(), entry.at(1).get<std::size_t>());
  const json& m = j.at("model");
  trace.final_model.model.weights = m.at("weights").get<std::vector<double>>();
  trace.final_model.model.bias = m.at("bias");
  trace.final_model.model.reg_c = m.at("reg_c");
  trace.final_model.platt.a_cal = m.at("platt").at("a_cal");
  trace.final_model.platt.b_cal = m.at("platt").at("b_cal");
  return trace;
}

void cmd_gen(const RunConfig& cfg) {
  SyntheticConfig sc = cfg.synthetic;
  sc.seed = cfg.seed;
  SyntheticWorld world = generate_synthetic(sc);
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  save_jsonl(world.regressor_set, (dir / "regressor.jsonl").string());
  save_jsonl(world.wsol_set, (dir / "wsol.jsonl").string());
  save_jsonl(world.test_set, (dir / "test.jsonl").string());

  json manifest = manifest_skeleton("gen", cfg);
  add_hashes(manifest, "outputs", cfg.out_dir, {"regressor.jsonl", "wsol.jsonl", "test.jsonl"});
  write_file_atomic((dir / "gen-manifest.json").string(), manifest.dump(2) + "\n");
}

void cmd_train_size(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  const std::string input = (dir / "regressor.jsonl").string();
  Dataset regressor_set = load_dataset(input);
  const std::string train_hash = file_hash_hex(input);

  SizeModelSet models = train_size_models(regressor_set, cfg.regressor, cfg.seed);

  // One file per distinct model identity.
  std::map<std::string, std::string> file_of_key;
  std::vector<std::string> outputs;
  for (const auto& [cls, key] : models.model_key_of_class) {
    if (file_of_key.count(key)) continue;
    const std::string name = "size-model-" + key + ".json";
    write_file_atomic((dir / name).string(),
                      model_to_json(models.by_class.at(cls), train_hash).dump(2) + "\n");
    file_of_key[key] = name;
    outputs.push_back(name);
  }

  json manifest = manifest_skeleton("train-size", cfg);
  manifest["inputs"] = {{"regressor.jsonl", train_hash}};
  json serving = json::object();
  for (const auto& [cls, key] : models.model_key_of_class) serving[cls] = file_of_key.at(key);
  manifest["models"] = serving;
  add_hashes(manifest, "outputs", cfg.out_dir, outputs);
  write_file_atomic((dir / "train-size-manifest.json").string(), manifest.dump(2) + "\n");
}

namespace {

SizeModelSet load_size_models(const std::string& out_dir) {
  const fs::path dir(out_dir);
  json manifest = read_json((dir / "train-size-manifest.json").string());
  SizeModelSet models;
  std::map<std::string, SizeRegressor> by_file;
  for (const auto& [cls, file] : manifest.at("models").items()) {
    const std::string name = file.get<std::string>();
    auto it = by_file.find(name);
    if (it == by_file.end())
      it = by_file.emplace(name, model_from_json(read_json((dir / name).string()))).first;
    models.by_class[cls] = it->second;
    std::string key = name;
    if (key.rfind("size-model-", 0) == 0) key = key.substr(11);
    if (key.size() > 5 && key.rfind(".json") == key.size() - 5) key = key.substr(0, key.size() - 5);
    models.model_key_of_class[cls] = key;
    models.mode = it->second.training_mode;
  }
  return models;
}

std::map<std::string, SizeEstimates> load_estimates(const std::string& path) {
  json j = read_json(path);
  std::map<std::string, SizeEstimates> out;
  for (const auto& [cls, entry] : j.at("classes").items()) {
    SizeEstimates est;
    est.root = entry.at("root");
    est.sigma = entry.at("sigma");
    for (const auto& [id, rec] : entry.at("estimates").items())
      est.s_e_root[id] = rec.at("s_e_root");
    out[cls] = std::move(est);
  }
  return out;
}

}  // namespace

void cmd_estimate(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  Dataset wsol_set = load_dataset((dir / "wsol.jsonl").string());
  SizeModelSet models = load_size_models(cfg.out_dir);
  std::map<std::string, SizeEstimates> estimates = estimate_sizes(models, wsol_set);

  json doc;
  doc["format_version"] = 1;
  json classes = json::object();
  for (const auto& [cls, est] : estimates) {
    json entry;
    entry["root"] = est.root;
    entry["sigma"] = est.sigma;
    entry["model"] = "size-model-" + models.model_key_of_class.at(cls) + ".json";
    json recs = json::object();
    for (const auto& [id, s_root] : est.s_e_root) {
      double s_e = std::pow(s_root, static_cast<double>(est.root));
      recs[id] = {{"s_e", s_e}, {"s_e_root", s_root}};
    }
    entry["estimates"] = recs;
    classes[cls] = std::move(entry);
  }
  doc["classes"] = classes;
  write_file_atomic((dir / "estimates.json").string(), doc.dump(2) + "\n");

  // Estimation quality against gt, recorded as diagnostics.
  json quality = json::object();
  for (const auto& [cls, est] : estimates) {
    std::vector<double> est_raw, truth_raw;
    for (const ImageBag& img : wsol_set.images) {
      auto it = est.s_e_root.find(img.id);
      if (it == est.s_e_root.end()) continue;
      double truth = 0.0;
      if (!true_size_of(img, cls, &truth)) continue;
      est_raw.push_back(std::pow(it->second, static_cast<double>(est.root)));
      truth_raw.push_back(truth);
    }
    json q;
    q["images"] = est_raw.size();
    if (est_raw.size() >= 2) {
      q["kendall_tau"] = kendall_tau(est_raw, truth_raw);
      q["mse_root"] = mse_root_space(est_raw, truth_raw, est.root);
    }
    quality[cls] = q;
  }
  json manifest = manifest_skeleton("estimate", cfg);
  add_hashes(manifest, "inputs", cfg.out_dir, {"wsol.jsonl", "train-size-manifest.json"});
  manifest["quality"] = quality;
  add_hashes(manifest, "outputs", cfg.out_dir, {"estimates.json"});
  write_file_atomic((dir / "estimate-manifest.json").string(), manifest.dump(2) + "\n");
}

void cmd_wsol(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  Dataset wsol_set = load_dataset((dir / "wsol.jsonl").string());

  CurriculumConfig cc = cfg.curriculum;
  cc.seed = cfg.seed;
  const bool needs_estimates =
      cc.ordering == Ordering::estimated_size || cc.use_size_weighting;
  std::map<std::string, SizeEstimates> estimates;
  if (needs_estimates) estimates = load_estimates((dir / "estimates.json").string());

  json per_class = json::object();
  std::vector<std::string> outputs;
  for (const std::string& cls : wsol_set.classes) {
    SizeEstimates est;
    if (needs_estimates) est = estimates.at(cls);
    RunTrace trace = run_curriculum(wsol_set, cls, est, cc);
    const std::string name = "trace-" + cls + ".json";
    write_file_atomic((dir / name).string(), trace_to_json(trace).dump(2) + "\n");
    outputs.push_back(name);
    per_class[cls] = {{"trace", name},
                      {"final_corloc", trace.final_corloc},
                      {"model_hash", hash_hex(model_hash(trace.final_model.model))}};
  }

  json manifest = manifest_skeleton("wsol", cfg);
  manifest["run_id"] = run_label(cc, cfg.seed);
  std::vector<std::string> inputs = {"wsol.jsonl"};
  if (needs_estimates) inputs.push_back("estimates.json");
  add_hashes(manifest, "inputs", cfg.out_dir, inputs);
  manifest["classes"] = per_class;
  add_hashes(manifest, "outputs", cfg.out_dir, outputs);
  write_file_atomic((dir / "wsol-manifest.json").string(), manifest.dump(2) + "\n");
}

void cmd_eval(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  json run_manifest = read_json((dir / "wsol-manifest.json").string());
  RunConfig run_cfg = config_from_json(run_manifest.at("config"));
  CurriculumConfig cc = run_cfg.curriculum;
  cc.seed = run_cfg.seed;
  const std::string run_id = run_manifest.at("run_id");

  Dataset wsol_set = load_dataset((dir / "wsol.jsonl").string());
  Dataset test_set = load_dataset((dir / "test.jsonl").string());
  SizeModelSet models = load_size_models(cfg.out_dir);

  std::vector<CsvRow> rows;
  double corloc_sum = 0.0;
  std::map<std::string, double> per_class_ap;

  for (const std::string& cls : wsol_set.classes) {
    const std::string trace_file =
        run_manifest.at("classes").at(cls).at("trace").get<std::string>();
    RunTrace trace = trace_from_json(read_json((dir / trace_file).string()));

    for (const IterationRecord& rec : trace.rounds)
      rows.push_back({run_id, cls, "corloc", std::to_string(rec.batch),
                      std::to_string(rec.iteration), fmt(rec.corloc)});
    rows.push_back({run_id, cls, "corloc_final", "", "", fmt(trace.final_corloc)});
    corloc_sum += trace.final_corloc;

    // Test-time size estimates come from the same regressor, applied to the
    // test images' whole-image features.
    SizeEstimates est_x;
    const SizeRegressor& size_model = models.by_class.at(cls);
    est_x.root = size_model.root;
    est_x.sigma = size_model.sigma;
    if (cc.use_size_weighting)
      for (const ImageBag& img : test_set.images)
        est_x.s_e_root[img.id] = predict(size_model, img.whole_image_feature).s_e_root;

    std::vector<ImageDetections> detections;
    std::map<std::string, std::vector<Box>> gt;
    for (const ImageBag& img : test_set.images) {
      std::vector<double> scores = score_proposals(img, trace.final_model, est_x, cc);
      detections.push_back({img.id, detect(img, scores, cfg.eval.nms_iou, cfg.eval.top_n)});
      auto it = img.gt_boxes.find(cls);
      if (it != img.gt_boxes.end() && !it->second.empty()) gt[img.id] = it->second;
    }
    double ap = 0.0;
    if (average_precision(detections, gt, cfg.eval.iou_threshold, cfg.eval.ap_style, &ap)) {
      per_class_ap[cls] = ap;
      rows.push_back({run_id, cls, "ap", "", "", fmt(ap)});
    } else {
      std::cerr << "warning: class " << cls << " has no test gt boxes, AP skipped\n";
    }
  }

  rows.push_back({run_id, "mean", "corloc_final", "", "",
                  fmt(corloc_sum / static_cast<double>(wsol_set.classes.size()))});
  if (!per_class_ap.empty())
    rows.push_back({run_id, "mean", "map", "", "", fmt(mean_average_precision(per_class_ap))});

  // Estimation quality and the recall curves, from the estimates file.
  std::map<std::string, SizeEstimates> estimates;
  const std::string est_path = (dir / "estimates.json").string();
  std::ostringstream recall_csv;
  recall_csv << "class,k,recall\n";
  if (fs::exists(est_path)) {
    estimates = load_estimates(est_path);
    for (const std::string& cls : wsol_set.classes) {
      const SizeEstimates& est = estimates.at(cls);
      std::vector<double> est_raw, truth_raw;
      std::vector<std::pair<std::string, double>> est_pairs, truth_pairs;
      for (const ImageBag& img : wsol_set.images) {
        auto it = est.s_e_root.find(img.id);
        if (it == est.s_e_root.end()) continue;
        double truth = 0.0;
        if (!true_size_of(img, cls, &truth)) continue;
        est_raw.push_back(std::pow(it->second, static_cast<double>(est.root)));
        truth_raw.push_back(truth);
        est_pairs.emplace_back(img.id, est_raw.back());
        truth_pairs.emplace_back(img.id, truth);
      }
      if (est_raw.size() < 2) continue;
      rows.push_back({run_id, cls, "kendall_tau", "", "", fmt(kendall_tau(est_raw, truth_raw))});
      rows.push_back(
          {run_id, cls, "mse_root", "", "", fmt(mse_root_space(est_raw, truth_raw, est.root))});

      auto order_ids = [](std::vector<std::pair<std::string, double>> pairs) {
        std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
          if (a.second != b.second) return a.second > b.second;
          return a.first < b.first;
        });
        std::vector<std::string> ids;
        ids.reserve(pairs.size());
        for (const auto& [id, v] : pairs) ids.push_back(id);
        return ids;
      };
      if (est_pairs.size() >= static_cast<std::size_t>(cc.batches)) {
        RecallCurve curve =
            interbatch_recall(order_ids(truth_pairs), order_ids(est_pairs), cc.batches);
        for (std::size_t k = 0; k < curve.size(); ++k) {
          rows.push_back({run_id, cls, "interbatch_recall", std::to_string(k + 1), "",
                          fmt(curve[k])});
          recall_csv << cls << ',' << (k + 1) << ',' << fmt(curve[k]) << '\n';
        }
      }
    }
  }

  write_file_atomic((dir / "metrics.csv").string(), csv_join(rows));
  write_file_atomic((dir / "plotdata-recall.csv").string(), recall_csv.str());

  json manifest = manifest_skeleton("eval", cfg);
  manifest["run_id"] = run_id;
  add_hashes(manifest, "inputs", cfg.out_dir, {"wsol.jsonl", "test.jsonl", "wsol-manifest.json"});
  add_hashes(manifest, "outputs", cfg.out_dir, {"metrics.csv", "plotdata-recall.csv"});
  write_file_atomic((dir / "eval-manifest.json").string(), manifest.dump(2) + "\n");
}

SweepResult run_sweep(const RunConfig& cfg) {
  if (cfg.sweep.seeds.empty()) throw std::invalid_argument("sweep: empty seed list");
  if (cfg.sweep.variants.empty()) throw std::invalid_argument("sweep: empty variant list");
  for (const std::string& v : cfg.sweep.variants) variant_config(cfg.curriculum, v);

  SweepResult result;
  result.variants.resize(cfg.sweep.seeds.size() * cfg.sweep.variants.size());
  result.ladder.resize(cfg.sweep.seeds.size() * cfg.sweep.n_ladder.size());

  const auto n_seeds = static_cast<std::ptrdiff_t>(cfg.sweep.seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t si = 0; si < n_seeds; ++si) {
    const std::uint64_t seed = cfg.sweep.seeds[static_cast<std::size_t>(si)];
    SyntheticConfig sc = cfg.synthetic;
    sc.seed = seed;
    SyntheticWorld world = generate_synthetic(sc);

    SizeModelSet models = train_size_models(world.regressor_set, cfg.regressor, seed);
    std::map<std::string, SizeEstimates> estimates = estimate_sizes(models, world.wsol_set);

    for (std::size_t vi = 0; vi < cfg.sweep.variants.size(); ++vi) {
      const std::string& variant = cfg.sweep.variants[vi];
      CurriculumConfig cc = variant_config(cfg.curriculum, variant);
      cc.seed = seed;
      SweepVariantResult& slot =
          result.variants[static_cast<std::size_t>(si) * cfg.sweep.variants.size() + vi];
      slot.seed = seed;
      slot.variant = variant;
      for (const std::string& cls : world.wsol_set.classes) {
        RunTrace trace = run_curriculum(world.wsol_set, cls, estimates.at(cls), cc);
        slot.final_corloc[cls] = trace.final_corloc;
      }
    }

    for (std::size_t ni = 0; ni < cfg.sweep.n_ladder.size(); ++ni) {
      const std::size_t n = cfg.sweep.n_ladder[ni];
      Dataset truncated = world.regressor_set;
      if (n > 0 && n < truncated.images.size()) truncated.images.resize(n);

      SizeModelSet models_n = train_size_models(truncated, cfg.regressor, seed);
      std::map<std::string, SizeEstimates> est_n = estimate_sizes(models_n, world.wsol_set);

      SweepLadderResult& slot =
          result.ladder[static_cast<std::size_t>(si) * cfg.sweep.n_ladder.size() + ni];
      slot.seed = seed;
      slot.n = n;
      for (const std::string& cls : world.wsol_set.classes) {
        const SizeEstimates& est = est_n.at(cls);
        std::vector<double> est_raw, truth_raw;
        std::vector<std::pair<std::string, double>> est_pairs, truth_pairs;
        for (const ImageBag& img : world.wsol_set.images) {
          auto it = est.s_e_root.find(img.id);
          if (it == est.s_e_root.end()) continue;
          double truth = 0.0;
          if (!true_size_of(img, cls, &truth)) continue;
          est_raw.push_back(std::pow(it->second, static_cast<double>(est.root)));
          truth_raw.push_back(truth);
          est_pairs.emplace_back(img.id, est_raw.back());
          truth_pairs.emplace_back(img.id, truth);
        }
        if (est_raw.size() < 2) continue;
        slot.tau[cls] = kendall_tau(est_raw, truth_raw);
        slot.mse_root[cls] = mse_root_space(est_raw, truth_raw, est.root);

        auto order_ids = [](std::vector<std::pair<std::string, double>> pairs) {
          std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
          });
          std::vector<std::string> ids;
          ids.reserve(pairs.size());
          for (const auto& [id, v] : pairs) ids.push_back(id);
          return ids;
        };
        if (est_pairs.size() >= static_cast<std::size_t>(cfg.curriculum.batches))
          slot.recall[cls] = interbatch_recall(order_ids(truth_pairs), order_ids(est_pairs),
                                               cfg.curriculum.batches);
      }
    }
  }
  return result;
}

void cmd_sweep(const RunConfig& cfg) {
  SweepResult result = run_sweep(cfg);
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  std::vector<CsvRow> rows;
  for (const SweepVariantResult& r : result.variants) {
    const std::string run_id = "s" + std::to_string(r.seed) + "-" + r.variant;
    double sum = 0.0;
    for (const auto& [cls, v] : r.final_corloc) {
      rows.push_back({run_id, cls, "corloc_final", "", "", fmt(v)});
      sum += v;
    }
    rows.push_back({run_id, "mean", "corloc_final", "", "",
                    fmt(sum / static_cast<double>(r.final_corloc.size()))});
  }
  for (const SweepLadderResult& r : result.ladder) {
    const std::string run_id =
        "s" + std::to_string(r.seed) + "-n" + (r.n == 0 ? "all" : std::to_string(r.n));
    for (const auto& [cls, v] : r.tau) rows.push_back({run_id, cls, "kendall_tau", "", "", fmt(v)});
    for (const auto& [cls, v] : r.mse_root)
      rows.push_back({run_id, cls, "mse_root", "", "", fmt(v)});
    for (const auto& [cls, curve] : r.recall)
      for (std::size_t k = 0; k < curve.size(); ++k)
        rows.push_back(
            {run_id, cls, "interbatch_recall", std::to_string(k + 1), "", fmt(curve[k])});
  }
  write_file_atomic((dir / "sweep.csv").string(), csv_join(rows));

  // Aggregated plot data: variant means, tau vs N, recall vs N.
  {
    std::map<std::string, std::pair<double, std::size_t>> by_variant;
    for (const SweepVariantResult& r : result.variants)
      for (const auto& [cls, v] : r.final_corloc) {
        by_variant[r.variant].first += v;
        by_variant[r.variant].second += 1;
      }
    std::ostringstream out;
    out << "variant,mean_corloc\n";
    for (const std::string& variant : cfg.sweep.variants) {
      const auto& [sum, count] = by_variant[variant];
      out << variant << ',' << fmt(count ? sum / static_cast<double>(count) : 0.0) << '\n';
    }
    write_file_atomic((dir / "plot-corloc-vs-variant.csv").string(), out.str());
  }
  {
    std::map<std::size_t, std::pair<double, std::size_t>> by_n;
    for (const SweepLadderResult& r : result.ladder)
      for (const auto& [cls, v] : r.tau) {
        by_n[r.n].first += v;
        by_n[r.n].second += 1;
      }
    std::ostringstream out;
    out << "n,mean_tau\n";
    for (std::size_t n : cfg.sweep.n_ladder) {
      const auto& [sum, count] = by_n[n];
      out << (n == 0 ? std::string("all") : std::to_string(n)) << ','
          << fmt(count ? sum / static_cast<double>(count) : 0.0) << '\n';
    }
    write_file_atomic((dir / "plot-tau-vs-n.csv").string(), out.str());
  }
  {
    std::map<std::size_t, std::map<std::size_t, std::pair<double, std::size_t>>> by_n_k;
    for (const SweepLadderResult& r : result.ladder)
      for (const auto& [cls, curve] : r.recall)
        for (std::size_t k = 0; k < curve.size(); ++k) {
          by_n_k[r.n][k].first += curve[k];
          by_n_k[r.n][k].second += 1;
        }
    std::ostringstream out;
    out << "n,k,mean_recall\n";
    for (std::size_t n : cfg.sweep.n_ladder)
      for (const auto& [k, agg] : by_n_k[n])
        out << (n == 0 ? std::string("all") : std::to_string(n)) << ',' << (k + 1) << ','
            << fmt(agg.second ? agg.first / static_cast<double>(agg.second) : 0.0) << '\n';
    write_file_atomic((dir / "plot-recall-vs-n.csv").string(), out.str());
  }

  json manifest = manifest_skeleton("sweep", cfg);
  add_hashes(manifest, "outputs", cfg.out_dir,
             {"sweep.csv", "plot-corloc-vs-variant.csv", "plot-tau-vs-n.csv",
              "plot-recall-vs-n.csv"});
  write_file_atomic((dir / "sweep-manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace wsol
