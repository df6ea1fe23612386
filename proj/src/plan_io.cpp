#include "lhtn/plan_io.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace lhtn {

namespace {

ActionId action_named(const GroundHtnProblem& p, const std::string& name) {
  ActionId a = p.find_action(name);
  if (a == kNone) throw std::runtime_error("unknown action " + name);
  return a;
}

MethodId method_named(const GroundHtnProblem& p, const std::string& name) {
  MethodId m = p.find_method(name);
  if (m == kNone) throw std::runtime_error("unknown method " + name);
  return m;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Splits "{x, y}" at top-level commas.
std::vector<std::string> layer_items(const std::string& line) {
  std::string body = trim(line);
  if (body.size() < 2 || body.front() != '{' || body.back() != '}') {
    throw std::runtime_error("malformed layer: " + line);
  }
  body = body.substr(1, body.size() - 2);
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : body) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
      continue;
    }
    cur.push_back(c);
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

}  // namespace

void write_plan_text(std::ostream& out, const LayeredPlan& plan, const GroundHtnProblem& p) {
  out << ";; makespan " << plan.makespan() << '\n';
  for (const auto& layer : plan.layers) out << layer_to_string(layer, p) << '\n';
  for (const auto& step : plan.trace) {
    switch (step.kind) {
      case StepKind::Method:
        out << ";; trace method " << step.node << ' ' << p.methods.at(step.resolver).name << '\n';
        break;
      case StepKind::Action:
        out << ";; trace action " << step.node << ' ' << p.actions.at(step.resolver).name << '\n';
        break;
      case StepKind::Switch:
        out << ";; trace switch\n";
        break;
    }
  }
}

LayeredPlan read_plan_text(std::istream& in, const GroundHtnProblem& p) {
  LayeredPlan plan;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t.rfind(";; trace ", 0) == 0) {
      std::istringstream ss(t.substr(9));
      std::string kind;
      ss >> kind;
      if (kind == "switch") {
        plan.trace.push_back({StepKind::Switch, kNone, kNone});
        continue;
      }
      NodeId node = 0;
      ss >> node;
      std::string name;
      std::getline(ss, name);
      name = trim(name);
      if (kind == "method") {
        plan.trace.push_back({StepKind::Method, node, method_named(p, name)});
      } else if (kind == "action") {
        plan.trace.push_back({StepKind::Action, node, action_named(p, name)});
      } else {
        throw std::runtime_error("unknown trace step: " + t);
      }
      continue;
    }
    if (t[0] == ';') continue;
    ActionLayer layer;
    for (const auto& item : layer_items(t)) layer.push_back(action_named(p, item));
    std::sort(layer.begin(), layer.end());
    plan.layers.push_back(std::move(layer));
  }
  return plan;
}

nlohmann::json plan_to_json(const LayeredPlan& plan, const GroundHtnProblem& p) {
  nlohmann::json j;
  j["makespan"] = plan.makespan();
  j["layers"] = nlohmann::json::array();
  for (const auto& layer : plan.layers) {
    nlohmann::json l = nlohmann::json::array();
    for (ActionId a : layer) l.push_back(p.actions.at(a).name);
    j["layers"].push_back(std::move(l));
  }
  j["trace"] = nlohmann::json::array();
  for (const auto& step : plan.trace) {
    nlohmann::json s;
    switch (step.kind) {
      case StepKind::Method:
        s = {{"kind", "method"}, {"node", step.node}, {"method", p.methods.at(step.resolver).name}};
        break;
      case StepKind::Action:
        s = {{"kind", "action"}, {"node", step.node}, {"action", p.actions.at(step.resolver).name}};
        break;
      case StepKind::Switch:
        s = {{"kind", "switch"}};
        break;
    }
    j["trace"].push_back(std::move(s));
  }
  return j;
}

LayeredPlan plan_from_json(const nlohmann::json& j, const GroundHtnProblem& p) {
  LayeredPlan plan;
  for (const auto& l : j.at("layers")) {
    ActionLayer layer;
    for (const auto& name : l) layer.push_back(action_named(p, name.get<std::string>()));
    std::sort(layer.begin(), layer.end());
    plan.layers.push_back(std::move(layer));
  }
  if (j.contains("trace")) {
    for (const auto& s : j.at("trace")) {
      std::string kind = s.at("kind").get<std::string>();
      if (kind == "switch") {
        plan.trace.push_back({StepKind::Switch, kNone, kNone});
      } else if (kind == "method") {
        plan.trace.push_back({StepKind::Method, s.at("node").get<NodeId>(),
                              method_named(p, s.at("method").get<std::string>())});
      } else if (kind == "action") {
        plan.trace.push_back({StepKind::Action, s.at("node").get<NodeId>(),
                              action_named(p, s.at("action").get<std::string>())});
      } else {
        throw std::runtime_error("unknown trace step kind " + kind);
      }
    }
  }
  return plan;
}

}  // namespace lhtn
