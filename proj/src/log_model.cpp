#include "logstitch/log_model.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

namespace logstitch {

namespace {

bool is_placeholder(const std::string& token) {
  if (token.size() < 2 || token[0] != '$') return false;
  return std::all_of(token.begin() + 1, token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int placeholder_index(const std::string& token) { return std::stoi(token.substr(1)); }

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int to_int(const std::string& s, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw IoError(std::string("bad integer field '") + s + "' in " + what);
  return v;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& message) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  };
  for (char c : message) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      flush();
    } else if (c == '=') {
      flush();
      tokens.emplace_back("=");
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return tokens;
}

std::int64_t parse_timestamp(const std::string& text, const ParseConfig& cfg) {
  auto bad = [&] { return NoMatchError("unparseable timestamp '" + text + "'"); };
  auto hms = [&](const std::string& s) -> std::int64_t {
    if (s.size() != 8 || s[2] != ':' || s[5] != ':') throw bad();
    int h = to_int(s.substr(0, 2), "timestamp");
    int m = to_int(s.substr(3, 2), "timestamp");
    int sec = to_int(s.substr(6, 2), "timestamp");
    if (h > 23 || m > 59 || sec > 60) throw bad();
    return h * 3600 + m * 60 + sec;
  };
  if (text.size() == 8) return cfg.base_date + hms(text);
  if (text.size() == 17 && text[8] == ':') {
    int y = to_int(text.substr(0, 4), "timestamp");
    unsigned mo = static_cast<unsigned>(to_int(text.substr(4, 2), "timestamp"));
    unsigned d = static_cast<unsigned>(to_int(text.substr(6, 2), "timestamp"));
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                    std::chrono::day{d}};
    if (!ymd.ok()) throw bad();
    auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * 86400 + hms(text.substr(9));
  }
  throw bad();
}

std::string format_timestamp(std::int64_t ts) {
  char buf[32];
  std::int64_t sec_of_day = ((ts % 86400) + 86400) % 86400;
  std::int64_t days = (ts - sec_of_day) / 86400;
  int h = static_cast<int>(sec_of_day / 3600);
  int m = static_cast<int>((sec_of_day / 60) % 60);
  int s = static_cast<int>(sec_of_day % 60);
  if (days == 0) {
    std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", h, m, s);
    return buf;
  }
  std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  std::snprintf(buf, sizeof(buf), "%04d%02u%02u:%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h, m, s);
  return buf;
}

void TemplateSet::add(EventTemplate t) {
  if (index_.count(t.id)) throw IoError("duplicate template id " + t.id);
  int params = 0;
  for (const auto& tok : t.tokens)
    if (is_placeholder(tok)) ++params;
  t.param_count = params;
  index_[t.id] = templates_.size();
  templates_.push_back(std::move(t));
}

const EventTemplate& TemplateSet::by_id(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw IoError("unknown template id " + id);
  return templates_[it->second];
}

bool TemplateSet::is_communication(const std::string& id) const {
  return by_id(id).is_communication;
}

TemplateSet TemplateSet::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open template file " + file.string());
  TemplateSet set;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line, '\t');
    if (fields.size() != 3)
      throw IoError(file.string() + ":" + std::to_string(lineno) +
                    ": expected <id>\\t<comm>\\t<pattern>");
    EventTemplate t;
    t.id = fields[0];
    t.is_communication = to_int(fields[1], "template comm flag") != 0;
    t.tokens = tokenize(fields[2]);
    set.add(std::move(t));
  }
  return set;
}

void TemplateSet::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  for (const auto& t : templates_) {
    out << t.id << '\t' << (t.is_communication ? 1 : 0) << '\t';
    for (size_t i = 0; i < t.tokens.size(); ++i) {
      if (i) out << ' ';
      out << t.tokens[i];
    }
    out << '\n';
  }
}

std::size_t Execution::total_entries() const {
  std::size_t n = 0;
  for (const auto& [_, log] : logs) n += log.entries.size();
  return n;
}

MatchedEntry match_entry(const std::string& raw_line, const TemplateSet& templates,
                         const ParseConfig& cfg) {
  if (templates.all().empty()) throw NoMatchError("empty template set");
  auto sp = raw_line.find(' ');
  if (sp == std::string::npos) throw NoMatchError("line has no message: '" + raw_line + "'");
  std::int64_t ts = parse_timestamp(raw_line.substr(0, sp), cfg);
  auto tokens = tokenize(raw_line.substr(sp + 1));

  std::vector<std::pair<std::string, std::vector<std::string>>> matches;
  for (const auto& t : templates.all()) {
    if (t.tokens.size() != tokens.size()) continue;
    std::vector<std::string> params(static_cast<size_t>(t.param_count));
    bool ok = true;
    for (size_t i = 0; i < tokens.size() && ok; ++i) {
      if (is_placeholder(t.tokens[i])) {
        params[static_cast<size_t>(placeholder_index(t.tokens[i]) - 1)] = tokens[i];
      } else if (t.tokens[i] != tokens[i]) {
        ok = false;
      }
    }
    if (ok) matches.emplace_back(t.id, std::move(params));
  }
  if (matches.empty()) throw NoMatchError("no template matches '" + raw_line + "'");
  if (matches.size() > 1) {
    std::string ids;
    for (const auto& [id, _] : matches) ids += (ids.empty() ? "" : ", ") + id;
    throw AmbiguousMatchError("line '" + raw_line + "' matches templates: " + ids);
  }
  return {ts, matches[0].first, std::move(matches[0].second)};
}

std::string render(const EventTemplate& tmpl, const std::vector<std::string>& params) {
  std::string out;
  for (size_t i = 0; i < tmpl.tokens.size(); ++i) {
    if (i) out += ' ';
    if (is_placeholder(tmpl.tokens[i]))
      out += params.at(static_cast<size_t>(placeholder_index(tmpl.tokens[i]) - 1));
    else
      out += tmpl.tokens[i];
  }
  return out;
}

Execution load_execution(const std::filesystem::path& root, const TemplateSet& templates,
                         const ParseConfig& cfg) {
  Execution exec;
  exec.exec_id = root.filename().string();
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_regular_file() && entry.path().extension() == ".log")
      files.push_back(entry.path());
  if (files.empty()) throw EmptyExecutionError("no component .log files in " + root.string());
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    ComponentLog log;
    log.component = file.stem().string();
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        auto m = match_entry(line, templates, cfg);
        log.entries.push_back({m.timestamp, m.template_id, std::move(m.params), 0});
      } catch (const Error& e) {
        throw NoMatchError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    std::stable_sort(log.entries.begin(), log.entries.end(),
                     [](const LogEntry& a, const LogEntry& b) { return a.timestamp < b.timestamp; });
    for (size_t i = 0; i < log.entries.size(); ++i) log.entries[i].seq_no = static_cast<int>(i);
    exec.logs.emplace(log.component, std::move(log));
  }
  return exec;
}

std::vector<Execution> load_dataset(const std::filesystem::path& root,
                                    const TemplateSet& templates, const ParseConfig& cfg) {
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<Execution> out;
  out.reserve(dirs.size());
  for (const auto& d : dirs) out.push_back(load_execution(d, templates, cfg));
  return out;
}

void write_execution(const Execution& exec, const std::filesystem::path& root,
                     const TemplateSet& templates) {
  std::filesystem::create_directories(root);
  for (const auto& [component, log] : exec.logs) {
    std::ofstream out(root / (component + ".log"));
    if (!out) throw IoError("cannot write log for " + component);
    for (const auto& e : log.entries)
      out << format_timestamp(e.timestamp) << ' ' << render(templates.by_id(e.template_id), e.params)
          << '\n';
  }
}

}  // namespace logstitch
