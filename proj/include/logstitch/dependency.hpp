#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "logstitch/log_model.hpp"

namespace logstitch {

struct ArchitectureGraph {
  std::vector<std::string> components;
  std::vector<std::pair<std::string, std::string>> uses;  // (from, to)
  std::string main;

  std::vector<std::string> users_of(const std::string& component) const;
  std::vector<std::string> used_by(const std::string& component) const;
  bool has_component(const std::string& c) const;
  void validate() const;  // main present, endpoints known, acyclic

  static ArchitectureGraph load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
};

struct DepKey {
  std::string component;
  int seq_no = 0;
  auto operator<=>(const DepKey&) const = default;
};

/// One downstream segment: a communication entry followed by the
/// non-communication entries up to the next communication entry.
struct DepSequence {
  std::string component;
  std::vector<LogEntry> entries;
};

struct DependencyMap {
  std::string exec_id;
  std::map<DepKey, std::vector<DepSequence>> deps;

  const std::vector<DepSequence>* sequences_for(const std::string& component, int seq_no) const;
  std::size_t relation_count() const;
};

// Pairs each downstream communication entry with the most recent upstream
// entry (timestamp <=; ties broken by larger seq_no). Returns downstream
// seq_no -> upstream seq_no.
std::map<int, int> comm_leads_to(const ComponentLog& upstream, const ComponentLog& downstream,
                                 const TemplateSet& templates);

DependencyMap extract_dependencies(const Execution& exec, const ArchitectureGraph& arch,
                                   const TemplateSet& templates);

struct LinearEntry {
  std::string component;
  LogEntry entry;
};

std::vector<LogEntry> strip_components(const std::vector<LinearEntry>& seq);

// Canonical system-level order: main log order, dependents expanded
// depth-first right after their trigger, sibling sequences sorted by
// (component, seq_no).
std::vector<LinearEntry> linearize_canonical(const Execution& exec, const DependencyMap& deps,
                                             const ArchitectureGraph& arch);

// Seeded variant: sibling dependent blocks are randomly interleaved.
std::vector<LinearEntry> linearize_seeded(const Execution& exec, const DependencyMap& deps,
                                          const ArchitectureGraph& arch, std::uint64_t seed);

// Table-style dump, e.g. "e^TC_1 ~> <e^MUX_1, e^MUX_2>".
std::string format_dependency_map(const DependencyMap& map);

}  // namespace logstitch
