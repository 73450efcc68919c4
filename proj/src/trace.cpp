#include "fclverify/trace.hpp"

#include <fstream>
#include <ostream>

#include <json.hpp>

#include "fclverify/errors.hpp"

namespace fclv::fcl {

using nlohmann::json;

static json value_to_json(const Value& v) {
  switch (v.index()) {
    case 0: return std::get<bool>(v);
    case 1: return std::get<std::int64_t>(v);
    case 2: return std::get<double>(v);
    case 3: return std::get<std::string>(v);
    default: return std::get<ComponentRef>(v).id;
  }
}

static Value value_from_json(const json& j, const std::string& where) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_unsigned()) return static_cast<std::int64_t>(j.get<std::uint64_t>());
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw Error("unsupported attribute value type at " + where);
}

static json attrs_to_json(const AttrMap& attrs) {
  json out = json::object();
  for (const auto& [k, v] : attrs) out[k] = value_to_json(v);
  return out;
}

static AttrMap attrs_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error("attribute map expected at " + where);
  AttrMap out;
  for (const auto& [k, v] : j.items()) out.emplace(k, value_from_json(v, where + "." + k));
  return out;
}

std::string to_record(const Snapshot& s) {
  json rec;
  rec["step"] = s.step;
  json comps = json::object();
  for (const auto& [id, c] : s.components) {
    comps[id] = json{{"type", c.type}, {"attrs", attrs_to_json(c.attrs)}};
  }
  rec["components"] = comps;
  json ens = json::object();
  for (const auto& [id, members] : s.ensembles) {
    ens[id] = json(std::vector<std::string>(members.begin(), members.end()));
  }
  rec["ensembles"] = ens;
  json bc = json::object();
  for (const auto& [name, attrs] : s.beyond_control) bc[name] = attrs_to_json(attrs);
  rec["beyond_control"] = bc;
  return rec.dump();
}

Snapshot snapshot_from_record(const std::string& line) {
  json rec = json::parse(line, nullptr, true);
  if (!rec.is_object()) throw Error("snapshot record must be an object");
  for (const auto& [k, v] : rec.items()) {
    (void)v;
    if (k != "step" && k != "components" && k != "ensembles" && k != "beyond_control") {
      throw Error("unknown field in snapshot record: " + k);
    }
  }
  Snapshot s;
  if (!rec.contains("step") || !rec["step"].is_number_integer()) {
    throw Error("snapshot record missing integer 'step'");
  }
  s.step = rec["step"].get<std::int64_t>();
  if (rec.contains("components")) {
    for (const auto& [id, cj] : rec["components"].items()) {
      if (!cj.is_object()) throw Error("component record must be an object: " + id);
      for (const auto& [k, v] : cj.items()) {
        (void)v;
        if (k != "type" && k != "attrs") throw Error("unknown field in component " + id + ": " + k);
      }
      Component c;
      c.type = cj.value("type", std::string{});
      if (c.type.empty()) throw Error("component missing type: " + id);
      if (cj.contains("attrs")) c.attrs = attrs_from_json(cj["attrs"], id);
      s.components.emplace(id, std::move(c));
    }
  }
  if (rec.contains("ensembles")) {
    for (const auto& [id, mj] : rec["ensembles"].items()) {
      if (!mj.is_array()) throw Error("ensemble members must be an array: " + id);
      std::set<std::string> members;
      for (const auto& m : mj) members.insert(m.get<std::string>());
      s.ensembles.emplace(id, std::move(members));
    }
  }
  if (rec.contains("beyond_control")) {
    for (const auto& [name, aj] : rec["beyond_control"].items()) {
      s.beyond_control.emplace(name, attrs_from_json(aj, name));
    }
  }
  return s;
}

void write_trace(std::ostream& out, const Trace& t) {
  for (const auto& s : t.snapshots) out << to_record(s) << "\n";
}

Trace read_trace(std::istream& in) {
  Trace t;
  std::string line;
  std::int64_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Snapshot s = snapshot_from_record(line);
    if (s.step != expected) {
      throw Error("trace steps must be contiguous from 0; got " + std::to_string(s.step) +
                  " expected " + std::to_string(expected));
    }
    ++expected;
    t.snapshots.push_back(std::move(s));
  }
  if (t.snapshots.empty()) throw Error("trace is empty");
  return t;
}

void save_trace(const std::string& path, const Trace& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open trace file for writing: " + path);
  write_trace(out, t);
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open trace file: " + path);
  return read_trace(in);
}

}  // namespace fclv::fcl
