#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fsqkd/sim.hpp"

namespace fsqkd::config {

/// Parsed configuration file: the scenario plus optional per-command tables.
/// Parsing is fail-closed: unknown keys anywhere are errors, so a typo in a
/// physics parameter cannot silently fall back to a default.
struct RunSpec {
    sim::Scenario scenario{};

    std::optional<std::vector<double>> plan_cn2_list;

    std::optional<std::vector<double>> interrupt_distances_m;
    std::optional<std::vector<double>> interrupt_cn2_list;
    std::optional<double> interrupt_capture_radius_m;

    std::optional<std::string> sweep_parameter;
    std::optional<std::vector<double>> sweep_values;
    bool sweep_analytic_only = false;
};

/// Parse JSON text. Throws ConfigError with a field-level message on schema
/// violations, and converts invariant violations (negative cn2, ...) into
/// ConfigError naming the field.
RunSpec parse(const std::string& json_text);
RunSpec load(const std::filesystem::path& config_path);

/// Canonical serialization: defaults expanded, keys sorted, shortest
/// round-trip numbers. parse(canonical_json(r)) reproduces the same
/// canonical form byte for byte.
std::string canonical_json(const RunSpec& r);

/// FNV-1a 64 over the canonical serialization; stable across platforms for
/// identical config content.
std::uint64_t digest(const RunSpec& r);
std::string digest_hex(const RunSpec& r);

struct RunManifest {
    std::string tool_version;
    std::string scenario_digest;
    std::string created_utc;
    std::vector<std::string> assumption_flags;
    std::vector<std::string> outputs;
};

/// Manifest JSON embedding the fully resolved config, written next to each
/// output file so a figure can be regenerated from its outputs alone.
void write_manifest(const std::filesystem::path& path, const RunManifest& m,
                    const RunSpec& resolved);

} // namespace fsqkd::config
