#include "mfnet/schema.hpp"

#include <cmath>
#include <sstream>

#include "mfnet/errors.hpp"
#include "mfnet/resources.hpp"

namespace mfnet {

namespace {

std::string basename_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

std::string type_name(const Json& v) {
  if (v.is_null()) return "null";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  return "object";
}

bool has_type(const Json& v, const std::string& type) {
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (!v.is_number_float()) return false;
    const double d = v.get<double>();
    return std::isfinite(d) && std::floor(d) == d;
  }
  return type_name(v) == type;
}

std::string display(const Json& v) { return v.dump(); }

}  // namespace

SchemaValidator::SchemaValidator(const std::string& schema_path) : root_(basename_of(schema_path)) {
  for (const auto& r : resources()) {
    const std::string path = r.path;
    if (path.rfind("schema/", 0) != 0) continue;
    documents_.emplace_back(basename_of(path), Json::parse(r.text));
  }
  bool found = false;
  for (const auto& [name, doc] : documents_) found = found || name == root_;
  if (!found) throw InvalidArgument("unknown schema '" + schema_path + "'");
}

SchemaValidator::Located SchemaValidator::resolve(const Json& node, const std::string& document) const {
  const Json* current = &node;
  std::string doc = document;
  for (int depth = 0; current->is_object() && current->contains("$ref"); ++depth) {
    if (depth > 32) throw Error(ErrorCode::kInternal, "schema: $ref cycle");
    const std::string ref = current->at("$ref").get<std::string>();
    const auto hash = ref.find('#');
    const std::string file = ref.substr(0, hash);
    const std::string pointer = hash == std::string::npos ? "" : ref.substr(hash + 1);
    if (!file.empty()) doc = basename_of(file);
    const Json* base = nullptr;
    for (const auto& [name, d] : documents_)
      if (name == doc) base = &d;
    if (!base) throw Error(ErrorCode::kInternal, "schema: unresolved reference '" + ref + "'");
    current = &base->at(Json::json_pointer(pointer));
  }
  return {current, doc};
}

void SchemaValidator::check(const Json& schema_in, const std::string& document_in, const Json& value,
                            const std::string& path, std::vector<SchemaIssue>& issues) const {
  const auto [schema_ptr, document] = resolve(schema_in, document_in);
  const Json& schema = *schema_ptr;
  if (!schema.is_object()) return;

  if (auto t = schema.find("type"); t != schema.end()) {
    bool ok = false;
    std::string expected;
    if (t->is_string()) {
      ok = has_type(value, t->get<std::string>());
      expected = t->get<std::string>();
    } else {
      for (const auto& alt : *t) {
        ok = ok || has_type(value, alt.get<std::string>());
        expected += (expected.empty() ? "" : " or ") + alt.get<std::string>();
      }
    }
    if (!ok) {
      issues.push_back({path, "expected " + expected + ", got " + type_name(value)});
      return;
    }
  }
  if (auto c = schema.find("const"); c != schema.end() && value != *c)
    issues.push_back({path, "must equal " + display(*c)});
  if (auto e = schema.find("enum"); e != schema.end()) {
    bool ok = false;
    for (const auto& alt : *e) ok = ok || alt == value;
    if (!ok) issues.push_back({path, "must be one of " + display(*e)});
  }
  if (value.is_number()) {
    const double x = value.get<double>();
    if (auto m = schema.find("minimum"); m != schema.end() && x < m->get<double>())
      issues.push_back({path, "must be >= " + display(*m)});
    if (auto m = schema.find("maximum"); m != schema.end() && x > m->get<double>())
      issues.push_back({path, "must be <= " + display(*m)});
    if (auto m = schema.find("exclusiveMinimum"); m != schema.end() && !(x > m->get<double>()))
      issues.push_back({path, "must be > " + display(*m)});
    if (auto m = schema.find("exclusiveMaximum"); m != schema.end() && !(x < m->get<double>()))
      issues.push_back({path, "must be < " + display(*m)});
  }
  if (value.is_string()) {
    if (auto m = schema.find("minLength"); m != schema.end() && value.get<std::string>().size() < m->get<std::size_t>())
      issues.push_back({path, "must have at least " + display(*m) + " characters"});
  }
  if (value.is_array()) {
    if (auto m = schema.find("minItems"); m != schema.end() && value.size() < m->get<std::size_t>())
      issues.push_back({path, "must have at least " + display(*m) + " items"});
    if (auto m = schema.find("maxItems"); m != schema.end() && value.size() > m->get<std::size_t>())
      issues.push_back({path, "must have at most " + display(*m) + " items"});
    if (auto items = schema.find("items"); items != schema.end())
      for (std::size_t i = 0; i < value.size(); ++i)
        check(*items, document, value[i], path + "/" + std::to_string(i), issues);
  }
  if (value.is_object()) {
    if (auto req = schema.find("required"); req != schema.end())
      for (const auto& key : *req)
        if (!value.contains(key.get<std::string>()))
          issues.push_back({path + "/" + escape_token(key.get<std::string>()), "missing required field"});
    const auto props = schema.find("properties");
    if (props != schema.end())
      for (const auto& [key, sub] : props->items())
        if (value.contains(key)) check(sub, document, value.at(key), path + "/" + escape_token(key), issues);
    if (auto extra = schema.find("additionalProperties"); extra != schema.end() && *extra == false)
      for (const auto& [key, sub] : value.items())
        if (props == schema.end() || !props->contains(key))
          issues.push_back({path + "/" + escape_token(key), "unknown key"});
  }
  if (auto all = schema.find("allOf"); all != schema.end())
    for (const auto& sub : *all) check(sub, document, value, path, issues);
  if (auto cond = schema.find("if"); cond != schema.end()) {
    std::vector<SchemaIssue> probe;
    check(*cond, document, value, path, probe);
    if (probe.empty()) {
      if (auto then = schema.find("then"); then != schema.end()) check(*then, document, value, path, issues);
    } else if (auto other = schema.find("else"); other != schema.end()) {
      check(*other, document, value, path, issues);
    }
  }
}

std::vector<SchemaIssue> SchemaValidator::validate(const Json& instance) const {
  std::vector<SchemaIssue> issues;
  const Json* root = nullptr;
  for (const auto& [name, d] : documents_)
    if (name == root_) root = &d;
  check(*root, root_, instance, "", issues);
  return issues;
}

Json SchemaValidator::fill(const Json& schema_in, const std::string& document_in, const Json& value) const {
  const auto [schema_ptr, document] = resolve(schema_in, document_in);
  const Json& schema = *schema_ptr;
  if (!schema.is_object()) return value;
  Json out = value;

  if (out.is_object()) {
    if (auto props = schema.find("properties"); props != schema.end()) {
      const bool closed = schema.contains("additionalProperties") && schema.at("additionalProperties") == false;
      Json rebuilt = closed ? Json::object() : out;
      for (const auto& [key, sub] : props->items()) {
        if (out.contains(key)) {
          rebuilt[key] = fill(sub, document, out.at(key));
        } else {
          const Json& resolved = *resolve(sub, document).node;
          if (resolved.is_object() && resolved.contains("default"))
            rebuilt[key] = fill(sub, document, resolved.at("default"));
        }
      }
      if (closed)
        for (const auto& [key, v] : out.items())
          if (!rebuilt.contains(key)) rebuilt[key] = v;
      out = std::move(rebuilt);
    }
  }
  if (out.is_array())
    if (auto items = schema.find("items"); items != schema.end())
      for (auto& element : out) element = fill(*items, document, element);
  if (auto all = schema.find("allOf"); all != schema.end())
    for (const auto& sub : *all) out = fill(sub, document, out);
  if (auto cond = schema.find("if"); cond != schema.end()) {
    std::vector<SchemaIssue> probe;
    check(*cond, document, out, "", probe);
    if (probe.empty()) {
      if (auto then = schema.find("then"); then != schema.end()) out = fill(*then, document, out);
    } else if (auto other = schema.find("else"); other != schema.end()) {
      out = fill(*other, document, out);
    }
  }
  return out;
}

Json SchemaValidator::materialize(const Json& instance) const {
  const Json* root = nullptr;
  for (const auto& [name, d] : documents_)
    if (name == root_) root = &d;
  return fill(*root, root_, instance);
}

std::string describe(const std::vector<SchemaIssue>& issues) {
  std::ostringstream out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) out << '\n';
    out << (issues[i].path.empty() ? "/" : issues[i].path) << ": " << issues[i].message;
  }
  return out.str();
}

}  // namespace mfnet
