#pragma once

// Forest JSON, version 1:
//   {"version":1,
//    "conditions":[{"id":0,"attribute":"A","kind":"numerical","op":">","value":25}, ...],
//    "trees":[{"nodes":[{"leaf":0}, {"cond":0,"left":0,"right":2}, ...],"root":1}, ...]}

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rectx/condition.hpp"
#include "rectx/error.hpp"
#include "rectx/tree.hpp"

namespace rectx {

inline constexpr int kForestSchemaVersion = 1;

inline nlohmann::json condition_to_json(const Condition& c) {
  nlohmann::json j{{"id", c.id}, {"attribute", c.attribute}, {"kind", std::string(to_string(c.kind))}};
  if (c.is_threshold()) {
    j["op"] = ">";
    j["value"] = c.threshold();
  } else {
    j["op"] = "=";
    j["value"] = c.category();
  }
  return j;
}

inline nlohmann::json forest_to_json(const RandomForest& f) {
  nlohmann::json conds = nlohmann::json::array();
  for (const Condition& c : f.conditions) conds.push_back(condition_to_json(c));
  nlohmann::json trees = nlohmann::json::array();
  for (const DecisionTree& t : f.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& n : t.nodes()) {
      if (n.is_leaf) {
        nodes.push_back({{"leaf", n.label ? 1 : 0}});
      } else {
        nodes.push_back({{"cond", n.condition}, {"left", n.left}, {"right", n.right}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}, {"root", t.root()}});
  }
  return {{"version", kForestSchemaVersion}, {"conditions", std::move(conds)}, {"trees", std::move(trees)}};
}

namespace detail {

template <class T>
T json_field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorKind::MalformedModel, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::MalformedModel, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

inline Condition condition_from_json(const nlohmann::json& j) {
  Condition c;
  c.id = detail::json_field<ConditionId>(j, "id");
  c.attribute = detail::json_field<std::string>(j, "attribute");
  try {
    c.kind = parse_attribute_kind(detail::json_field<std::string>(j, "kind"));
  } catch (const Error& e) {
    fail(ErrorKind::MalformedModel, e.what());
  }
  const std::string op = detail::json_field<std::string>(j, "op");
  if (op == ">") {
    if (c.kind != AttributeKind::Numerical) fail(ErrorKind::MalformedModel, "'>' on a non-numerical attribute");
    c.predicate = GreaterThan{detail::json_field<double>(j, "value")};
  } else if (op == "=") {
    if (c.kind == AttributeKind::Numerical) fail(ErrorKind::MalformedModel, "'=' on a numerical attribute");
    c.predicate = Equals{detail::json_field<std::string>(j, "value")};
  } else {
    fail(ErrorKind::MalformedModel, "unknown operator '" + op + "'");
  }
  return c;
}

inline RandomForest forest_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::MalformedModel, "model document must be an object");
  const int version = detail::json_field<int>(j, "version");
  if (version != kForestSchemaVersion) {
    fail(ErrorKind::SchemaVersionMismatch, "unsupported model version " + std::to_string(version));
  }
  RandomForest f;
  const auto conds = detail::json_field<nlohmann::json>(j, "conditions");
  if (!conds.is_array()) fail(ErrorKind::MalformedModel, "'conditions' must be an array");
  for (const auto& c : conds) {
    f.conditions.push_back(condition_from_json(c));
    if (f.conditions.back().id != f.conditions.size() - 1) {
      fail(ErrorKind::MalformedModel, "condition ids must be 0..n-1 in order");
    }
  }
  const auto trees = detail::json_field<nlohmann::json>(j, "trees");
  if (!trees.is_array() || trees.empty()) fail(ErrorKind::MalformedModel, "'trees' must be a non-empty array");
  for (const auto& t : trees) {
    const auto nodes = detail::json_field<nlohmann::json>(t, "nodes");
    if (!nodes.is_array()) fail(ErrorKind::MalformedModel, "'nodes' must be an array");
    std::vector<Node> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) {
      Node node;
      if (n.is_object() && n.contains("leaf")) {
        const int label = detail::json_field<int>(n, "leaf");
        if (label != 0 && label != 1) fail(ErrorKind::MalformedModel, "leaf label must be 0 or 1");
        node.is_leaf = true;
        node.label = label == 1;
      } else {
        node.is_leaf = false;
        node.condition = detail::json_field<ConditionId>(n, "cond");
        node.left = detail::json_field<NodeIndex>(n, "left");
        node.right = detail::json_field<NodeIndex>(n, "right");
        if (node.condition >= f.conditions.size()) {
          fail(ErrorKind::DanglingConditionId, "node tests unknown condition id " + std::to_string(node.condition));
        }
      }
      out.push_back(node);
    }
    f.trees.emplace_back(std::move(out), detail::json_field<NodeIndex>(t, "root"));
  }
  f.validate();
  return f;
}

inline void write_forest(std::ostream& out, const RandomForest& f) { out << forest_to_json(f).dump(1) << '\n'; }

inline RandomForest read_forest(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedModel, std::string("invalid JSON: ") + e.what());
  }
  return forest_from_json(j);
}

inline void save_forest(const std::string& path, const RandomForest& f) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  write_forest(out, f);
}

inline RandomForest load_forest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  return read_forest(in);
}

}  // namespace rectx
