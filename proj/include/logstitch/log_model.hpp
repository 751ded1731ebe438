#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "logstitch/errors.hpp"

namespace logstitch {

/// An event type: fixed tokens with `$k` placeholders, plus a flag marking
/// inter-component communication events.
struct EventTemplate {
  std::string id;
  std::vector<std::string> tokens;  // "$1".."$n" are placeholders
  int param_count = 0;
  bool is_communication = false;
};

class TemplateSet {
 public:
  void add(EventTemplate t);
  const EventTemplate& by_id(const std::string& id) const;
  bool is_communication(const std::string& id) const;
  const std::vector<EventTemplate>& all() const { return templates_; }

  static TemplateSet load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

 private:
  std::vector<EventTemplate> templates_;
  std::map<std::string, size_t> index_;
};

struct LogEntry {
  std::int64_t timestamp = 0;  // integer seconds
  std::string template_id;
  std::vector<std::string> params;
  int seq_no = 0;  // 0-based position within its component log
};

struct ComponentLog {
  std::string component;
  std::vector<LogEntry> entries;
};

struct Execution {
  std::string exec_id;
  std::map<std::string, ComponentLog> logs;

  std::size_t total_entries() const;
};

struct ParseConfig {
  // Date assumed for HH:MM:SS lines, as an epoch offset in seconds.
  std::int64_t base_date = 0;
};

struct MatchedEntry {
  std::int64_t timestamp;
  std::string template_id;
  std::vector<std::string> params;
};

// Splits on whitespace; '=' is a separator that stays as its own token.
std::vector<std::string> tokenize(const std::string& message);

// Accepts YYYYMMDD:HH:MM:SS or HH:MM:SS (the latter offset by base_date).
std::int64_t parse_timestamp(const std::string& text, const ParseConfig& cfg);

MatchedEntry match_entry(const std::string& raw_line, const TemplateSet& templates,
                         const ParseConfig& cfg = {});

// Re-renders a matched entry's message, token for token.
std::string render(const EventTemplate& tmpl, const std::vector<std::string>& params);
std::string format_timestamp(std::int64_t ts);

// Loads <root>/<component>.log files into one execution.
Execution load_execution(const std::filesystem::path& root, const TemplateSet& templates,
                         const ParseConfig& cfg = {});

// Loads <root>/<exec_id>/<component>.log, executions sorted by id.
std::vector<Execution> load_dataset(const std::filesystem::path& root,
                                    const TemplateSet& templates, const ParseConfig& cfg = {});

void write_execution(const Execution& exec, const std::filesystem::path& root,
                     const TemplateSet& templates);

}  // namespace logstitch
