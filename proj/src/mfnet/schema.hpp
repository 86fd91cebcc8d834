#pragma once

#include <json.hpp>
#include <string>
#include <vector>

namespace mfnet {

using Json = nlohmann::ordered_json;

struct SchemaIssue {
  std::string path;  // JSON pointer into the instance, "" for the root
  std::string message;
};

// Validator for the JSON Schema subset used by the published schemas: type,
// enum, const, properties, required, additionalProperties (boolean), items,
// minItems, maxItems, minLength, minimum, maximum, exclusiveMinimum,
// exclusiveMaximum, allOf, if/then/else and $ref. A $ref is either local
// ("#/...") or names another embedded schema ("other.json#/...").
class SchemaValidator {
 public:
  // `schema_path` is the resource path of the root schema, e.g. "schema/experiment.schema.json".
  explicit SchemaValidator(const std::string& schema_path);

  std::vector<SchemaIssue> validate(const Json& instance) const;

  // Inserts "default" values for absent properties, recursively, and orders
  // object keys as the schema lists them. Run on a valid instance.
  Json materialize(const Json& instance) const;

 private:
  struct Located {
    const Json* node;
    std::string document;
  };

  Located resolve(const Json& node, const std::string& document) const;
  void check(const Json& schema, const std::string& document, const Json& value, const std::string& path,
             std::vector<SchemaIssue>& issues) const;
  Json fill(const Json& schema, const std::string& document, const Json& value) const;

  std::vector<std::pair<std::string, Json>> documents_;
  std::string root_;
};

std::string describe(const std::vector<SchemaIssue>& issues);

}  // namespace mfnet
