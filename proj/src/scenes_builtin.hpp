#ifndef TRACKFUSE_SCENES_BUILTIN_HPP
#define TRACKFUSE_SCENES_BUILTIN_HPP

#include <map>
#include <string>

namespace trackfuse {

// Scene documents compiled into the library (sourced from scenes/*.scene).
const std::map<std::string, std::string>& builtin_scenes();
// Returns nullptr when no bundled scene has that name.
const std::string* builtin_scene(const std::string& name);

}  // namespace trackfuse

#endif
