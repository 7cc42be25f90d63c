/*
 * Copyright 2026 The levshap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <string>

#include "json.hpp"
#include "levshap/errors.hpp"
#include "levshap/games.hpp"

namespace levshap {

namespace {

using nlohmann::json;

std::vector<std::string> wire_batch(std::span<const SubsetMask> masks) {
  std::vector<std::string> out;
  out.reserve(masks.size());
  for (const auto& m : masks) out.push_back(m.to_string());
  return out;
}

// One child process, one request in flight at a time.
class ExternalOracle final : public ValueOracle {
 public:
  explicit ExternalOracle(const ExternalConfig& config)
      : ValueOracle(config.n, "external"), command_(config.command) {
    // Writes to a dead child must surface as errors, not kill the process.
    ::signal(SIGPIPE, SIG_IGN);
    spawn();
    try {
      const json reply = round_trip(json{{"op", "init"}, {"n", config.n}}, {});
      if (!reply.is_object() || !reply.contains("ok") || reply["ok"] != true) {
        throw EvaluationError("external oracle: init rejected: " + reply.dump());
      }
    } catch (...) {
      close_child();
      throw;
    }
  }

  ~ExternalOracle() override { close_child(); }

 protected:
  std::vector<double> do_eval(std::span<const SubsetMask> masks) override {
    if (masks.empty()) return {};
    auto batch = wire_batch(masks);
    std::lock_guard lock(mu_);
    const json reply = round_trip(json{{"op", "eval"}, {"masks", batch}}, batch);
    if (!reply.is_object() || !reply.contains("values") || !reply["values"].is_array()) {
      throw EvaluationError("external oracle: protocol error, expected {\"values\":[...]}, got " +
                                reply.dump(),
                            std::move(batch));
    }
    const auto& values = reply["values"];
    if (values.size() != masks.size()) {
      throw EvaluationError("external oracle: protocol error, got " +
                                std::to_string(values.size()) + " values for " +
                                std::to_string(masks.size()) + " masks",
                            std::move(batch));
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& v : values) {
      if (!v.is_number()) {
        throw EvaluationError("external oracle: non-numeric value " + v.dump(),
                              std::move(batch));
      }
      const double x = v.get<double>();
      if (!std::isfinite(x)) {
        throw EvaluationError("external oracle: non-finite value", std::move(batch));
      }
      out.push_back(x);
    }
    return out;
  }

 private:
  void close_child() {
    if (to_child_ != nullptr) {
      std::fputs("{\"op\":\"shutdown\"}\n", to_child_);
      std::fflush(to_child_);
      std::fclose(to_child_);
      to_child_ = nullptr;
    }
    if (from_child_ != nullptr) {
      std::fclose(from_child_);
      from_child_ = nullptr;
    }
    if (pid_ > 0) {
      int status = 0;
      ::waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  void spawn() {
    int in_pipe[2];   // parent -> child
    int out_pipe[2];  // child -> parent
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) {
      throw EvaluationError(std::string("external oracle: pipe failed: ") +
                            std::strerror(errno));
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      throw EvaluationError(std::string("external oracle: fork failed: ") +
                            std::strerror(errno));
    }
    if (pid_ == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
    to_child_ = ::fdopen(in_pipe[1], "w");
    from_child_ = ::fdopen(out_pipe[0], "r");
    if (to_child_ == nullptr || from_child_ == nullptr) {
      throw EvaluationError("external oracle: fdopen failed");
    }
  }

  json round_trip(const json& request, std::vector<std::string> batch) {
    const std::string line = request.dump() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), to_child_) != line.size() ||
        std::fflush(to_child_) != 0) {
      throw EvaluationError("external oracle: child closed its input (exited?)",
                            std::move(batch));
    }
    std::string reply;
    int ch = 0;
    while ((ch = std::fgetc(from_child_)) != EOF && ch != '\n') {
      reply.push_back(static_cast<char>(ch));
    }
    if (ch == EOF && reply.empty()) {
      throw EvaluationError("external oracle: child exited without replying",
                            std::move(batch));
    }
    try {
      return json::parse(reply);
    } catch (const json::parse_error& e) {
      throw EvaluationError("external oracle: protocol error, unparsable line '" + reply +
                                "'",
                            std::move(batch));
    }
  }

  std::string command_;
  pid_t pid_ = -1;
  FILE* to_child_ = nullptr;
  FILE* from_child_ = nullptr;
  std::mutex mu_;
};

}  // namespace

OraclePtr external_oracle(const ExternalConfig& config) {
  if (config.n < 1) throw DomainError("external_oracle: need n >= 1");
  if (config.command.empty()) throw DomainError("external_oracle: empty command");
  return std::make_shared<ExternalOracle>(config);
}

}  // namespace levshap
