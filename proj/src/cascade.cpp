#include <cmath>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "text.hpp"
#include "vigil/error.hpp"
#include "vigil/vision.hpp"

namespace vigil::vision {

namespace {

namespace pt = boost::property_tree;

const pt::ptree& child(const pt::ptree& node, const std::string& name, const std::string& path) {
  const auto found = node.get_child_optional(pt::ptree::path_type(name, '/'));
  if (!found) throw Error(Errc::SchemaError, "missing element " + path + "/" + name);
  return *found;
}

// Element children named "_" in document order.
std::vector<const pt::ptree*> items(const pt::ptree& node) {
  std::vector<const pt::ptree*> out;
  for (const auto& [key, value] : node) {
    if (key == "_") out.push_back(&value);
  }
  return out;
}

std::vector<double> numbers(const pt::ptree& node, const std::string& path) {
  std::vector<double> out;
  std::istringstream in(node.data());
  std::string tok;
  while (in >> tok) {
    const auto v = detail::parse_double(tok);
    if (!v) throw Error(Errc::SchemaError, path + ": '" + tok + "' is not a number");
    out.push_back(*v);
  }
  return out;
}

double number(const pt::ptree& node, const std::string& name, const std::string& path) {
  const auto v = numbers(child(node, name, path), path + "/" + name);
  if (v.size() != 1) throw Error(Errc::SchemaError, path + "/" + name + ": expected one number");
  return v.front();
}

int integer(double v, const std::string& path) {
  if (v != std::floor(v) || std::abs(v) > 1e9) throw Error(Errc::SchemaError, path + ": expected an integer");
  return static_cast<int>(v);
}

std::string text(const pt::ptree& node, const std::string& name, const std::string& path) {
  return std::string(detail::trim(child(node, name, path).data()));
}

int tree_depth(const WeakClassifier& wc, int node, const std::string& path) {
  const auto& n = wc.nodes[static_cast<std::size_t>(node)];
  int deepest = 0;
  for (const int next : {n.left, n.right}) {
    if (next > 0) {
      if (next <= node || static_cast<std::size_t>(next) >= wc.nodes.size()) {
        throw Error(Errc::SchemaError, path + ": node link " + std::to_string(next) + " out of order");
      }
      deepest = std::max(deepest, tree_depth(wc, next, path));
    } else if (static_cast<std::size_t>(-next) >= wc.leaves.size()) {
      throw Error(Errc::SchemaError, path + ": leaf index " + std::to_string(-next) + " out of range");
    }
  }
  return deepest + 1;
}

}  // namespace

std::size_t HaarCascade::weak_count() const {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.weak.size();
  return n;
}

HaarCascade parse_cascade_xml(std::string_view xml) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw Error(Errc::SchemaError, std::string("malformed XML: ") + e.what());
  }

  std::string path = "opencv_storage/cascade";
  const auto& root = child(doc, path, "");

  if (const auto type = text(root, "featureType", path); type != "HAAR") {
    throw Error(Errc::SchemaError, path + "/featureType: unsupported feature type '" + type + "'");
  }
  if (const auto type = root.get_optional<std::string>("stageType")) {
    if (detail::trim(*type) != "BOOST") throw Error(Errc::SchemaError, path + "/stageType: expected BOOST");
  }

  HaarCascade cascade;
  cascade.window_w = integer(number(root, "width", path), path + "/width");
  cascade.window_h = integer(number(root, "height", path), path + "/height");
  if (cascade.window_w <= 0 || cascade.window_h <= 0) throw Error(Errc::SchemaError, path + ": window size must be positive");

  // Features first so node references can be range-checked below.
  const auto feature_items = items(child(root, "features", path));
  for (std::size_t f = 0; f < feature_items.size(); ++f) {
    const auto fpath = path + "/features/_[" + std::to_string(f) + "]";
    if (const auto tilted = feature_items[f]->get_optional<std::string>("tilted")) {
      if (detail::trim(*tilted) != "0") throw Error(Errc::SchemaError, fpath + "/tilted: rotated features are not supported");
    }
    HaarFeature feature;
    const auto rect_items = items(child(*feature_items[f], "rects", fpath));
    if (rect_items.empty()) throw Error(Errc::SchemaError, fpath + "/rects: feature has no rectangles");
    for (std::size_t r = 0; r < rect_items.size(); ++r) {
      const auto rpath = fpath + "/rects/_[" + std::to_string(r) + "]";
      const auto v = numbers(*rect_items[r], rpath);
      if (v.size() != 5) throw Error(Errc::SchemaError, rpath + ": expected 'x y w h weight'");
      HaarRect rect{integer(v[0], rpath), integer(v[1], rpath), integer(v[2], rpath), integer(v[3], rpath), v[4]};
      if (rect.x < 0 || rect.y < 0 || rect.w <= 0 || rect.h <= 0 || rect.x + rect.w > cascade.window_w ||
          rect.y + rect.h > cascade.window_h) {
        throw Error(Errc::RectOutOfWindow, rpath + ": rect (" + std::to_string(rect.x) + "," + std::to_string(rect.y) +
                                               "," + std::to_string(rect.w) + "," + std::to_string(rect.h) +
                                               ") leaves the " + std::to_string(cascade.window_w) + "x" +
                                               std::to_string(cascade.window_h) + " window");
      }
      feature.rects.push_back(rect);
    }
    cascade.features.push_back(std::move(feature));
  }

  const auto stage_items = items(child(root, "stages", path));
  if (stage_items.empty()) throw Error(Errc::SchemaError, path + "/stages: no stages");
  if (const auto declared = root.get_optional<std::string>("stageNum")) {
    const auto n = detail::parse_double(*declared);
    if (!n || *n != static_cast<double>(stage_items.size())) {
      throw Error(Errc::SchemaError, path + "/stageNum: declares " + std::string(detail::trim(*declared)) +
                                         " stages, found " + std::to_string(stage_items.size()));
    }
  }

  for (std::size_t s = 0; s < stage_items.size(); ++s) {
    const auto spath = path + "/stages/_[" + std::to_string(s) + "]";
    Stage stage;
    stage.threshold = number(*stage_items[s], "stageThreshold", spath);
    const auto weak_items = items(child(*stage_items[s], "weakClassifiers", spath));
    if (weak_items.empty()) throw Error(Errc::SchemaError, spath + "/weakClassifiers: stage has no weak classifier");
    for (std::size_t w = 0; w < weak_items.size(); ++w) {
      const auto wpath = spath + "/weakClassifiers/_[" + std::to_string(w) + "]";
      const auto raw = numbers(child(*weak_items[w], "internalNodes", wpath), wpath + "/internalNodes");
      if (raw.empty() || raw.size() % 4 != 0) {
        throw Error(Errc::SchemaError, wpath + "/internalNodes: expected groups of 'left right feature threshold'");
      }
      WeakClassifier wc;
      for (std::size_t k = 0; k < raw.size(); k += 4) {
        const auto npath = wpath + "/internalNodes";
        TreeNode node{integer(raw[k], npath), integer(raw[k + 1], npath), integer(raw[k + 2], npath), raw[k + 3]};
        if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= cascade.features.size()) {
          throw Error(Errc::SchemaError, npath + ": feature index " + std::to_string(node.feature) + " out of range");
        }
        wc.nodes.push_back(node);
      }
      wc.leaves = numbers(child(*weak_items[w], "leafValues", wpath), wpath + "/leafValues");
      if (const int depth = tree_depth(wc, 0, wpath); depth > 2) {
        throw Error(Errc::NotStumpBased, wpath + ": tree depth " + std::to_string(depth) + " exceeds 2");
      }
      stage.weak.push_back(std::move(wc));
    }
    if (const auto declared = stage_items[s]->get_optional<std::string>("maxWeakCount")) {
      const auto n = detail::parse_double(*declared);
      if (!n || *n != static_cast<double>(stage.weak.size())) {
        throw Error(Errc::SchemaError, spath + "/maxWeakCount: does not match the weak classifier count");
      }
    }
    cascade.stages.push_back(std::move(stage));
  }
  return cascade;
}

HaarCascade load_cascade(const std::string& path) {
  try {
    return parse_cascade_xml(io::read_file(path));
  } catch (const Error& e) {
    if (e.code() == Errc::IoError) throw;
    throw Error(e.code(), path + ": " + e.detail());
  }
}

}  // namespace vigil::vision
