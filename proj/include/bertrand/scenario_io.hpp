#pragma once

#include "bertrand/model_zoo.hpp"

#include <string>
#include <vector>

namespace bertrand {

/// Parses a scenario document. Firm indices in the document are 1-based.
Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& scenario);

Scenario load_scenario(const std::string& path);

/// A preset name or a path to a scenario file.
Scenario resolve_scenario(const std::string& name_or_path);

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    BoundednessReport bounds;

    bool ok() const { return errors.empty(); }
};

/// Market and model sanity plus boundedness diagnostics along c + t 1.
ValidationReport validate_scenario(const std::string& name_or_path);

}  // namespace bertrand
