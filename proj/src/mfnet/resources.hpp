#pragma once

#include <string>
#include <vector>

namespace mfnet {

// Files compiled into the library, keyed by repository-relative path.
struct Resource {
  const char* path;
  const char* text;
};

const std::vector<Resource>& resources();

// Text of a resource; throws InvalidArgument for an unknown path.
std::string resource_text(const std::string& path);

}  // namespace mfnet
