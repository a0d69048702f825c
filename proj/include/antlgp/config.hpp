#pragma once

#include "antlgp/pipeline.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace antlgp::config {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Flat `key = value` text; '#' starts a comment, blank lines ignored.
KeyValues parse_key_values(std::istream& in);
KeyValues load_key_values(const std::string& path);

// Applies recognized keys onto the config; unknown keys are an error.
void apply(pipeline::PipelineConfig& cfg, const KeyValues& kvs);

// Full flat dump of a config, in fixed key order.
KeyValues to_key_values(const pipeline::PipelineConfig& cfg);

// Reproduction manifest: the resolved configuration plus derived stage seeds
// and any caller-supplied extras (command line, input path, ...).
void write_manifest(std::ostream& out, const pipeline::PipelineConfig& resolved, const KeyValues& extras);

} // namespace antlgp::config
