#include "wsol/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "wsol/rng.hpp"

namespace wsol {

using json = nlohmann::ordered_json;

std::string role_name(DatasetRole role) {
  switch (role) {
    case DatasetRole::regressor_train: return "regressor-train";
    case DatasetRole::wsol_train: return "wsol-train";
    case DatasetRole::test: return "test";
  }
  throw std::logic_error("unknown role");
}

DatasetRole role_from_name(const std::string& name) {
  if (name == "regressor-train") return DatasetRole::regressor_train;
  if (name == "wsol-train") return DatasetRole::wsol_train;
  if (name == "test") return DatasetRole::test;
  throw std::invalid_argument("unknown dataset role: " + name);
}

const ImageBag* Dataset::find(const std::string& id) const {
  for (const auto& img : images)
    if (img.id == id) return &img;
  return nullptr;
}

namespace {

json box_to_json(const Box& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box must be [x0,y0,x1,y1]");
  Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.valid()) throw std::invalid_argument("invalid box coordinates");
  return b;
}

json image_to_json(const ImageBag& img) {
  json j;
  j["id"] = img.id;
  j["width"] = img.width;
  j["height"] = img.height;
  j["class_labels"] = json::array();
  for (const auto& c : img.class_labels) j["class_labels"].push_back(c);
  j["whole_image_feature"] = img.whole_image_feature;
  json gts = json::object();
  for (const auto& [cls, boxes] : img.gt_boxes) {
    json arr = json::array();
    for (const auto& b : boxes) arr.push_back(box_to_json(b));
    gts[cls] = arr;
  }
  j["gt_boxes"] = gts;
  json props = json::array();
  for (const auto& p : img.proposals) {
    json pj;
    pj["box"] = box_to_json(p.box);
    pj["objectness"] = p.objectness;
    pj["feature"] = p.feature;
    props.push_back(pj);
  }
  j["proposals"] = props;
  return j;
}

ImageBag image_from_json(const json& j, std::size_t feature_dim) {
  ImageBag img;
  img.id = j.at("id").get<std::string>();
  img.width = j.at("width").get<double>();
  img.height = j.at("height").get<double>();
  if (!(img.width > 0.0) || !(img.height > 0.0))
    throw std::invalid_argument("image dimensions must be positive");
  for (const auto& c : j.at("class_labels")) img.class_labels.insert(c.get<std::string>());
  img.whole_image_feature = j.at("whole_image_feature").get<std::vector<double>>();
  if (img.whole_image_feature.size() != feature_dim)
    throw std::invalid_argument("whole_image_feature dimension mismatch");
  for (const auto& [cls, arr] : j.at("gt_boxes").items()) {
    std::vector<Box> boxes;
    for (const auto& bj : arr) boxes.push_back(box_from_json(bj));
    img.gt_boxes[cls] = boxes;
  }
  for (const auto& pj : j.at("proposals")) {
    Proposal p;
    p.box = box_from_json(pj.at("box"));
    p.objectness = pj.at("objectness").get<double>();
    if (p.objectness < 0.0 || p.objectness > 1.0)
      throw std::invalid_argument("objectness out of [0,1]");
    p.feature = pj.at("feature").get<std::vector<double>>();
    if (p.feature.size() != feature_dim)
      throw std::invalid_argument("proposal feature dimension mismatch");
    img.proposals.push_back(std::move(p));
  }
  return img;
}

}  // namespace

void save_jsonl(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  json header;
  header["format_version"] = 1;
  header["role"] = role_name(ds.role);
  header["classes"] = ds.classes;
  header["feature_dim"] = ds.feature_dim;
  out << header.dump() << "\n";
  for (const auto& img : ds.images) out << image_to_json(img).dump() << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  std::size_t line_no = 0;
  Dataset ds;
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      if (line_no == 1) {
        if (j.at("format_version").get<int>() != 1)
          throw std::invalid_argument("unsupported format_version");
        ds.role = role_from_name(j.at("role").get<std::string>());
        ds.classes = j.at("classes").get<std::vector<std::string>>();
        ds.feature_dim = j.at("feature_dim").get<std::size_t>();
      } else {
        ImageBag img = image_from_json(j, ds.feature_dim);
        if (!seen_ids.insert(img.id).second)
          throw std::invalid_argument("duplicate image id: " + img.id);
        ds.images.push_back(std::move(img));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (line_no == 0) throw std::runtime_error(path + ": empty file, missing header line");
  return ds;
}

void canonicalize(Dataset& ds) {
  std::vector<ImageBag> kept;
  kept.reserve(ds.images.size());
  for (auto& img : ds.images) {
    if (!img.class_labels.empty() && img.proposals.empty()) {
      std::cerr << "warning: dropping positive image '" << img.id << "' with no proposals\n";
      continue;
    }
    for (auto& [cls, boxes] : img.gt_boxes)
      for (auto& b : boxes) b = clip_to_image(b, img.width, img.height);
    kept.push_back(std::move(img));
  }
  ds.images = std::move(kept);
}

std::vector<std::pair<std::size_t, std::size_t>> contiguous_split(std::size_t n, int k) {
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  if (static_cast<std::size_t>(k) > n)
    throw std::invalid_argument("K exceeds the number of images");
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t rem = n % static_cast<std::size_t>(k);
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  spans.reserve(static_cast<std::size_t>(k));
  std::size_t pos = 0;
  for (std::size_t b = 0; b < static_cast<std::size_t>(k); ++b) {
    const std::size_t len = base + (b < rem ? 1 : 0);
    spans.emplace_back(pos, pos + len);
    pos += len;
  }
  return spans;
}

namespace {

std::vector<std::vector<std::string>> cut_by_spans(const std::vector<std::string>& ordered, int k) {
  auto spans = contiguous_split(ordered.size(), k);
  std::vector<std::vector<std::string>> batches;
  batches.reserve(spans.size());
  for (const auto& [begin, end] : spans)
    batches.emplace_back(ordered.begin() + static_cast<std::ptrdiff_t>(begin),
                         ordered.begin() + static_cast<std::ptrdiff_t>(end));
  return batches;
}

}  // namespace

std::vector<std::vector<std::string>> split_batches(const std::vector<const ImageBag*>& images,
                                                    const std::map<std::string, double>& estimates,
                                                    int k) {
  std::vector<std::string> ids;
  ids.reserve(images.size());
  for (const ImageBag* img : images) {
    if (estimates.find(img->id) == estimates.end())
      throw std::invalid_argument("missing size estimate for image " + img->id);
    ids.push_back(img->id);
  }
  std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
    const double ea = estimates.at(a);
    const double eb = estimates.at(b);
    if (ea != eb) return ea > eb;
    return a < b;
  });
  return cut_by_spans(ids, k);
}

std::vector<std::vector<std::string>> random_batches(const std::vector<const ImageBag*>& images,
                                                     int k, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(images.size());
  for (const ImageBag* img : images) ids.push_back(img->id);
  Rng rng(seed, "random-batches");
  rng.shuffle(ids);
  return cut_by_spans(ids, k);
}

}  // namespace wsol
