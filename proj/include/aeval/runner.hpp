#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "aeval/core.hpp"
#include "aeval/corpus.hpp"
#include "aeval/proc.hpp"

namespace aeval {

enum class TestStatus { Pass, Fail, CompileError, RuntimeError, Timeout };

inline const char* to_string(TestStatus s) {
  switch (s) {
    case TestStatus::Pass: return "pass";
    case TestStatus::Fail: return "fail";
    case TestStatus::CompileError: return "compile_error";
    case TestStatus::RuntimeError: return "runtime_error";
    case TestStatus::Timeout: return "timeout";
  }
  return "?";
}

inline TestStatus status_from_string(const std::string& s) {
  if (s == "pass") return TestStatus::Pass;
  if (s == "fail") return TestStatus::Fail;
  if (s == "compile_error") return TestStatus::CompileError;
  if (s == "runtime_error") return TestStatus::RuntimeError;
  if (s == "timeout") return TestStatus::Timeout;
  throw Error("unknown test status '" + s + "'");
}

struct TestOutcome {
  std::string case_id;
  TestStatus status = TestStatus::Fail;
  std::string actual;  // captured output, possibly truncated
};

struct Partition {
  std::set<std::string> gold;
  std::set<std::string> incorrect;
  std::map<std::string, double> pass_fraction;
};

struct RunnerConfig {
  // Templates may use {src}, {bin} and {workdir}. An empty compile command skips
  // the compile step (interpreted submissions).
  std::string compile_command;
  std::string run_command = "{bin}";
  std::filesystem::path workdir = "aeval_work";
  int64_t compile_timeout_ms = 30000;
  size_t max_output_bytes = 1 << 20;
  bool stub_mode = false;
  std::filesystem::path stub_outcomes_path;  // outcomes.csv
  int jobs = 1;
};

// Trailing whitespace per line and trailing blank lines do not count as output
// differences; everything else does.
inline std::string normalize_output(std::string_view text) {
  std::vector<std::string> lines;
  size_t start = 0;
  for (size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      std::string_view line = text.substr(start, i - start);
      size_t end = line.size();
      while (end > 0 && (line[end - 1] == ' ' || line[end - 1] == '\t' || line[end - 1] == '\r'))
        --end;
      lines.emplace_back(line.substr(0, end));
      start = i + 1;
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::string out;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

namespace detail {

inline std::string expand_template(std::string tmpl, const std::string& src,
                                   const std::string& bin, const std::string& workdir) {
  auto replace_all = [](std::string& s, std::string_view key, const std::string& value) {
    size_t pos = 0;
    while ((pos = s.find(key, pos)) != std::string::npos) {
      s.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  replace_all(tmpl, "{src}", src);
  replace_all(tmpl, "{bin}", bin);
  replace_all(tmpl, "{workdir}", workdir);
  return tmpl;
}

}  // namespace detail

// Stub backend: statuses come from a CSV of (submission_id, case_id, status).
// The table must cover exactly the corpus; missing or unknown entries are errors.
class StubOutcomes {
public:
  StubOutcomes(const std::filesystem::path& path, const Corpus& corpus) {
    const auto lines = nonblank_lines(read_text_file(path));
    std::set<std::string> case_ids;
    for (const TestCase& c : corpus.test_suite.cases) case_ids.insert(c.id);
    for (const std::string& line : lines) {
      const auto fields = split_csv_line(line);
      if (fields.size() != 3)
        throw Error(path.string() + ": expected 'submission_id,case_id,status' got '" + line + "'");
      if (!corpus.has(fields[0]))
        throw Error(path.string() + ": unknown submission id '" + fields[0] + "'");
      if (!case_ids.count(fields[1]))
        throw Error(path.string() + ": unknown case id '" + fields[1] + "'");
      const auto key = std::make_pair(fields[0], fields[1]);
      if (!table_.emplace(key, status_from_string(fields[2])).second)
        throw Error(path.string() + ": duplicate outcome for (" + fields[0] + "," + fields[1] + ")");
    }
    for (const Submission& s : corpus.submissions)
      for (const TestCase& c : corpus.test_suite.cases)
        if (!table_.count({s.id, c.id}))
          throw Error(path.string() + ": missing outcome for (" + s.id + "," + c.id + ")");
  }

  TestStatus status(const std::string& submission_id, const std::string& case_id) const {
    return table_.at({submission_id, case_id});
  }

private:
  std::map<std::pair<std::string, std::string>, TestStatus> table_;
};

// Runs one submission against the whole suite. Compile failure marks every case
// compile_error; a clean exit compares normalized output; nonzero exit is a
// runtime error even if the output happens to match.
inline std::vector<TestOutcome> run_submission(const Submission& s, const TestSuite& suite,
                                               const RunnerConfig& cfg,
                                               const StubOutcomes* stub = nullptr) {
  std::vector<TestOutcome> outcomes;
  outcomes.reserve(suite.cases.size());

  if (cfg.stub_mode) {
    if (!stub) throw Error("stub_mode requires a loaded outcomes table");
    for (const TestCase& c : suite.cases) {
      TestOutcome o;
      o.case_id = c.id;
      o.status = stub->status(s.id, c.id);
      o.actual = o.status == TestStatus::Pass ? c.expected : std::string("\x01stub\x01");
      outcomes.push_back(std::move(o));
    }
    return outcomes;
  }

  namespace fs = std::filesystem;
  const fs::path subdir = cfg.workdir / s.id;
  fs::create_directories(subdir);
  // keep the original extension: compilers dispatch on it
  const std::string ext = s.path.has_extension() ? s.path.extension().string() : ".src";
  const fs::path src_path = subdir / (s.id + ext);
  write_text_file(src_path, s.source);
  const std::string src = src_path.string();
  const std::string bin = (subdir / (s.id + ".bin")).string();
  const std::string wd = subdir.string();

  if (!cfg.compile_command.empty()) {
    const std::string cmd = detail::expand_template(cfg.compile_command, src, bin, wd);
    const RunResult r = run_command(cmd, "", subdir, cfg.compile_timeout_ms, cfg.max_output_bytes);
    if (r.timed_out || r.exit_code != 0) {
      for (const TestCase& c : suite.cases)
        outcomes.push_back({c.id, TestStatus::CompileError, r.output});
      return outcomes;
    }
  }

  const std::string run_cmd = detail::expand_template(cfg.run_command, src, bin, wd);
  for (const TestCase& c : suite.cases) {
    const RunResult r = run_command(run_cmd, c.input, subdir, c.timeout_ms, cfg.max_output_bytes);
    TestOutcome o;
    o.case_id = c.id;
    o.actual = r.output;
    if (r.timed_out)
      o.status = TestStatus::Timeout;
    else if (r.exit_code != 0)
      o.status = TestStatus::RuntimeError;
    else
      o.status = normalize_output(r.output) == normalize_output(c.expected) ? TestStatus::Pass
                                                                            : TestStatus::Fail;
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

using OutcomeTable = std::map<std::string, std::vector<TestOutcome>>;

// Runs every submission, up to cfg.jobs in parallel. Results land in fixed
// per-submission slots, so the table is identical regardless of scheduling.
inline OutcomeTable run_all(const Corpus& corpus, const RunnerConfig& cfg) {
  std::unique_ptr<StubOutcomes> stub;
  if (cfg.stub_mode) {
    const auto path = cfg.stub_outcomes_path.empty() ? corpus.config.root / "outcomes.csv"
                                                     : cfg.stub_outcomes_path;
    stub = std::make_unique<StubOutcomes>(path, corpus);
  }

  const size_t n = corpus.submissions.size();
  std::vector<std::vector<TestOutcome>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  const int jobs = std::max(1, cfg.jobs);

  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        slots[i] = run_submission(corpus.submissions[i], corpus.test_suite, cfg, stub.get());
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  if (jobs == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  for (size_t i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  OutcomeTable table;
  for (size_t i = 0; i < n; ++i) table.emplace(corpus.submissions[i].id, std::move(slots[i]));
  return table;
}

// Splits the corpus into the fully passing set and its complement. Total over
// complete outcome tables.
inline Partition partition(const Corpus& corpus, const OutcomeTable& outcomes) {
  Partition p;
  const size_t total = corpus.test_suite.cases.size();
  for (const Submission& s : corpus.submissions) {
    auto it = outcomes.find(s.id);
    if (it == outcomes.end() || it->second.size() != total)
      throw Error("partition: incomplete outcomes for submission '" + s.id + "'");
    size_t passes = 0;
    for (const TestOutcome& o : it->second)
      if (o.status == TestStatus::Pass) ++passes;
    p.pass_fraction[s.id] = static_cast<double>(passes) / static_cast<double>(total);
    if (passes == total)
      p.gold.insert(s.id);
    else
      p.incorrect.insert(s.id);
  }
  return p;
}

}  // namespace aeval
