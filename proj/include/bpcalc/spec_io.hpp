#pragma once

#include <string>

#include <yaml-cpp/yaml.h>

#include "bpcalc/bernstein.hpp"

namespace bpcalc {

/// Text form of a BernsteinSpec (YAML; JSON documents are accepted too).
/// The schema is described in docs/formats.md. Numbers are written with 17
/// significant digits so that parse(serialize(spec)) reproduces every double.
std::string serialize_spec(const BernsteinSpec& spec);
BernsteinSpec parse_spec(const std::string& text);

BernsteinSpec spec_from_node(const YAML::Node& node);
void emit_spec(YAML::Emitter& out, const BernsteinSpec& spec);

// Helpers shared with the CLI config reader. All throw ParseError naming
// `key` and the 1-based line of the offending node.
double read_double(const YAML::Node& node, const std::string& key);
int read_int(const YAML::Node& node, const std::string& key);
Vector read_vector(const YAML::Node& node, const std::string& key);
int line_of(const YAML::Node& node);

}  // namespace bpcalc
