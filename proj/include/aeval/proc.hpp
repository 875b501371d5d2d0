#pragma once

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <string>
#include <thread>

#include <fcntl.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "aeval/core.hpp"

namespace aeval {

struct RunResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;  // captured stdout, possibly truncated
};

namespace detail {

inline std::string unique_stem() {
  static std::atomic<uint64_t> counter{0};
  return std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1));
}

}  // namespace detail

// Runs `sh -c command` with the given stdin text, a wall-clock timeout and a cap
// on captured stdout. The child gets its own process group so a timeout kill
// reaches grandchildren too. stdio goes through files in `workdir` to avoid pipe
// deadlocks; the files are removed afterwards.
inline RunResult run_command(const std::string& command, const std::string& stdin_text,
                             const std::filesystem::path& workdir, int64_t timeout_ms,
                             size_t max_output_bytes = 1 << 20) {
  namespace fs = std::filesystem;
  fs::create_directories(workdir);
  const std::string stem = detail::unique_stem();
  const fs::path in_path = workdir / ("stdin_" + stem);
  const fs::path out_path = workdir / ("stdout_" + stem);
  write_text_file(in_path, stdin_text);
  write_text_file(out_path, "");

  const pid_t pid = ::fork();
  if (pid < 0) throw Error("fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    const int in_fd = ::open(in_path.c_str(), O_RDONLY);
    const int out_fd = ::open(out_path.c_str(), O_WRONLY | O_TRUNC);
    if (in_fd < 0 || out_fd < 0) ::_exit(127);
    ::dup2(in_fd, STDIN_FILENO);
    ::dup2(out_fd, STDOUT_FILENO);
    ::close(in_fd);
    ::close(out_fd);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }

  RunResult result;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  int status = 0;
  for (;;) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0) throw Error("waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }

  if (WIFEXITED(status))
    result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status))
    result.exit_code = 128 + WTERMSIG(status);

  std::string output = read_text_file(out_path);
  if (output.size() > max_output_bytes) output.resize(max_output_bytes);
  result.output = std::move(output);

  std::error_code ec;
  fs::remove(in_path, ec);
  fs::remove(out_path, ec);
  return result;
}

}  // namespace aeval
