#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "whatif/model.hpp"

namespace whatif {

using Json = nlohmann::json;

// Dataset and config documents. Unlimited capacity is written as `null`.
// Parsing throws DataError on missing keys or wrong types; semantic problems
// are left to validate_dataset.

Json to_json(const PlanConfig& config);
PlanConfig config_from_json(const Json& doc);

Json to_json(const Dataset& dataset);
Dataset dataset_from_json(const Json& doc);

/// Canonical text form: sorted keys, two-space indent, trailing newline.
std::string canonical_dump(const Json& doc);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Dataset load_dataset(const std::filesystem::path& path);

}  // namespace whatif
