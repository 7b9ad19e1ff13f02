#ifndef DORFL_CONFIG_HPP
#define DORFL_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include "dorfl/experiment.hpp"

namespace dorfl {

// Flat key = value pairs; section headers prefix the keys ("[hyper]" then
// "rho = 2" yields "hyper.rho").
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_file(const std::string& path);

// Applies repeatable --set key=value overrides; flags win over the file.
void apply_overrides(ConfigMap& cfg, const std::vector<std::string>& sets);

// Typed materialization with unknown-key detection.
RunConfig make_run_config(const ConfigMap& cfg);

}  // namespace dorfl

#endif
