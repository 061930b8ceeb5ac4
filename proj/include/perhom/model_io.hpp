#pragma once

#include "perhom/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace perhom {

/// Model files are JSON documents:
///
///   { "name": "...", "periods": [1.0],
///     "drift": [field, ...],                 // d entries
///     "diffusion": [[field, ...], ...],      // full symmetric d x d
///     "jumps": {"family": "none" | "atoms" | "convolution" | "stable_like", ...},
///     "symmetric": true,                     // optional assertion
///     "second_moment_bound": 1000.0 }        // optional
///
/// A field is either a number or {"const": c, "terms": [{"k": [..], "cos": a, "sin": b}]}.
LevyTripletModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const LevyTripletModel& model);

LevyTripletModel parse_model(std::string_view text);
std::string serialize_model(const LevyTripletModel& model);

/// Reads a model file; the pseudo-path "builtin:NAME" selects a builtin model.
LevyTripletModel load_model(const std::string& path);

/// FNV-1a hash of the canonical serialisation.
std::uint64_t model_hash(const LevyTripletModel& model);

}  // namespace perhom
